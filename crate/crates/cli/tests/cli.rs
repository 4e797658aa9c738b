use std::path::Path;
use std::process::{Command, Output};

fn ymc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ymc"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn ymc")
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap_or(-1)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

#[test]
fn usage_errors_exit_two() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&ymc(&["evolve", "--bogus"], d.path())), 2);
    assert_eq!(code(&ymc(&["nonsense"], d.path())), 2);
    assert_eq!(code(&ymc(&["--help"], d.path())), 0);
}

#[test]
fn config_errors_exit_two() {
    let d = tempfile::tempdir().unwrap();
    write(d.path(), "empty.toml", "");
    assert_eq!(code(&ymc(&["run", "--config", "empty.toml"], d.path())), 2);
    write(d.path(), "bad.toml", "[grid]\nn = 1\n[run]\ntasks = [\"fock-check\"]\n");
    assert_eq!(code(&ymc(&["run", "--config", "bad.toml"], d.path())), 2);
    write(d.path(), "unknown.toml", "[fock]\nwidth = 3\n");
    assert_eq!(code(&ymc(&["fock-check", "--config", "unknown.toml"], d.path())), 2);
    assert_eq!(code(&ymc(&["run", "--config", "missing.toml"], d.path())), 2);
    assert_eq!(code(&ymc(&["spectrum"], d.path())), 2);
    assert_eq!(code(&ymc(&["evolve", "--init", "nowhere.ymc", "--steps", "1"], d.path())), 3);
    assert_eq!(code(&ymc(&["evolve", "--coulomb", "on", "--gradient", "analytic", "--steps", "1"], d.path())), 2);
}

#[test]
fn fock_check_reports_every_suite() {
    let d = tempfile::tempdir().unwrap();
    let o = ymc(&["fock-check", "--out", "fock.json"], d.path());
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let text = std::fs::read_to_string(d.path().join("fock.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["all_pass"], true);
    let suites = v["suites"].as_array().unwrap();
    assert!(suites.len() >= 9);
    assert!(suites.iter().all(|s| s["status"] == "pass"));
}

#[test]
fn evolve_then_analyse_snapshot() {
    let d = tempfile::tempdir().unwrap();
    let o = ymc(
        &["evolve", "--init", "random:3", "--steps", "20", "--g", "0.2", "--out-traj", "t.csv", "--out-final", "f.ymc"],
        d.path(),
    );
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let traj = std::fs::read_to_string(d.path().join("t.csv")).unwrap();
    let mut lines = traj.lines();
    assert_eq!(lines.next(), Some("step,t,energy,gauge_residual,f_norm"));
    assert_eq!(lines.count(), 21);

    // resume from the final snapshot
    let o = ymc(&["evolve", "--init", "f.ymc", "--steps", "5", "--out-traj", "t2.csv"], d.path());
    assert_eq!(code(&o), 0);
    let t2 = std::fs::read_to_string(d.path().join("t2.csv")).unwrap();
    let last1 = traj.lines().last().unwrap().split(',').nth(2).unwrap().to_string();
    let first2 = t2.lines().nth(1).unwrap().split(',').nth(2).unwrap().to_string();
    assert_eq!(last1, first2);

    let o = ymc(&["spectrum", "--snapshot", "f.ymc", "-m", "4", "--out", "s.csv"], d.path());
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let s = std::fs::read_to_string(d.path().join("s.csv")).unwrap();
    assert!(s.starts_with("index,eigenvalue,residual"));
    assert_eq!(s.lines().count(), 5);

    for m in ["born", "pinv"] {
        let out = format!("{m}.json");
        let o = ymc(&["greens", "--snapshot", "f.ymc", "--method", m, "--probes", "2", "--out", &out], d.path());
        assert_eq!(code(&o), 0, "{}", stdout(&o));
        let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(d.path().join(&out)).unwrap()).unwrap();
        assert_eq!(v["pass"], true);
        assert_eq!(v["probes"], 2);
    }
}

#[test]
fn gap_scan_writes_table_and_footer() {
    let d = tempfile::tempdir().unwrap();
    write(
        d.path(),
        "gap.toml",
        "[gap]\ng_list = [0.1, 0.2, 0.4]\nsites = [[1, 1, 1, 0, 0, 0], [0, 0, 0, 1, 1, 1]]\nk_max = 1\nout = \"gap.csv\"\n[run]\ntasks = [\"gap-scan\"]\n",
    );
    let o = ymc(&["run", "--config", "gap.toml"], d.path());
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let text = std::fs::read_to_string(d.path().join("gap.csv")).unwrap();
    assert!(text.starts_with("g,x0,y0,i,a,k,I,lambda,flags"));
    assert!(text.lines().any(|l| l.starts_with("fitted_slope,")));
    assert_eq!(text.lines().filter(|l| l.starts_with("eta_per_g,")).count(), 3);

    write(d.path(), "bad.toml", "[gap]\nsites = [[1, 1, 1, 0, 0, 1]]\n");
    assert_eq!(code(&ymc(&["gap-scan", "--config", "bad.toml"], d.path())), 2);
}

#[test]
fn outputs_are_deterministic() {
    let run = || {
        let d = tempfile::tempdir().unwrap();
        let o = ymc(&["evolve", "--seed", "9", "--steps", "10", "--out-traj", "t.csv", "--out-final", "f.ymc"], d.path());
        assert_eq!(code(&o), 0);
        let o2 = ymc(&["fock-check", "--d", "2", "--nmax", "3", "--out", "f.json"], d.path());
        assert_eq!(code(&o2), 0);
        (
            stdout(&o),
            std::fs::read(d.path().join("t.csv")).unwrap(),
            std::fs::read(d.path().join("f.ymc")).unwrap(),
            std::fs::read(d.path().join("f.json")).unwrap(),
        )
    };
    assert_eq!(run(), run());
}

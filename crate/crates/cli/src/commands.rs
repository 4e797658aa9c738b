//! Subcommand implementations. Each resolves its options, runs, writes its
//! artifacts and reports whether its in-run assertions held.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::Serialize;
use ymc_core::faddeev_popov::{FaddeevPopovOperator, EIG_TOL, GAUGE_TOL};
use ymc_core::fock::{fock_check, FockCheckConfig};
use ymc_core::gap::{gap_scan, GapScanConfig, PathFamily, SitePair};
use ymc_core::greens::{born_apply, modified_green, GreensMethod};
use ymc_core::hamiltonian::{evolve, FlowState, GradientMethod, HamiltonianConfig};
use ymc_core::random::{generate_field, generate_scalar, RandomFieldSpec, SpectrumShape};
use ymc_core::{FieldKind, Grid, LatticeField, Snapshot, StructureConstants};

use crate::config::{FieldSection, RunConfig};
use crate::error::CliError;

/// Summary lines for stdout and the overall assertion status.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub lines: Vec<String>,
    pub passed: bool,
}

impl Outcome {
    fn new() -> Self {
        Self {
            lines: Vec::new(),
            passed: true,
        }
    }

    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    fn check(&mut self, name: &str, ok: bool) {
        self.passed &= ok;
        self.lines.push(format!("assert {name}: {}", if ok { "pass" } else { "fail" }));
    }

    fn extend(&mut self, o: Outcome) {
        self.passed &= o.passed;
        self.lines.extend(o.lines);
    }
}

pub const DEFAULT_N: usize = 4;
pub const DEFAULT_L_BOX: f64 = 2.0 * PI;
pub const DEFAULT_G: f64 = 0.2;

/// Grid from the config, defaulting to `N = 4`, `L = 2π`.
pub fn grid_from(cfg: &RunConfig) -> Result<Grid, CliError> {
    let sec = cfg.grid.clone().unwrap_or_default();
    Ok(Grid::new(sec.n.unwrap_or(DEFAULT_N), sec.l_box.unwrap_or(DEFAULT_L_BOX))?)
}

fn colors_from(cfg: &RunConfig) -> usize {
    cfg.algebra.as_ref().and_then(|a| a.colors).unwrap_or(3)
}

fn coupling_from(cfg: &RunConfig) -> Option<f64> {
    cfg.algebra.as_ref().and_then(|a| a.g)
}

fn field_spec(sec: &FieldSection, seed: u64, amplitude: f64) -> Result<RandomFieldSpec, CliError> {
    Ok(match sec.shape.as_deref().unwrap_or("white") {
        "white" => RandomFieldSpec::white(seed, amplitude, true),
        "band_limited" => RandomFieldSpec::band_limited(seed, sec.p_max.unwrap_or(1), amplitude, true),
        other => return Err(CliError::config("field", "shape", format!("unknown shape {other}"))),
    })
}

/// Resolve a relative path against `base`.
pub fn resolve(base: Option<&Path>, p: &Path) -> PathBuf {
    match base {
        Some(b) if p.is_relative() => b.join(p),
        _ => p.to_path_buf(),
    }
}

fn fmt_f(x: f64) -> String {
    format!("{x}")
}

fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::output(path, e))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::output(path, e))?;
    s.push('\n');
    write_text(path, &s)
}

fn write_csv(path: &Path, rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .flexible(true)
        .from_path(path)
        .map_err(|e| CliError::output(path, e))?;
    for r in rows {
        w.write_record(r).map_err(|e| CliError::output(path, e))?;
    }
    w.flush().map_err(|e| CliError::output(path, e))
}

fn parse_method(section: &str, s: &str, n_terms: usize) -> Result<GreensMethod, CliError> {
    match s {
        "born" => Ok(GreensMethod::Born { n_terms }),
        "pinv" => Ok(GreensMethod::PseudoInverse),
        other => Err(CliError::config(section, "method", format!("expected born or pinv, got {other}"))),
    }
}

fn method_name(m: GreensMethod) -> &'static str {
    match m {
        GreensMethod::Born { .. } => "born",
        GreensMethod::PseudoInverse => "pinv",
    }
}

/// Load the first record of a snapshot file as the background potential.
fn load_background(path: &Path) -> Result<Snapshot, CliError> {
    let mut recs = Snapshot::load(path)?;
    if recs.is_empty() {
        return Err(CliError::config("snapshot", "records", format!("{} holds no records", path.display())));
    }
    Ok(recs.remove(0))
}

// ---------------------------------------------------------------------------
// evolve

#[derive(Debug, Clone, PartialEq)]
pub enum Init {
    Snapshot(PathBuf),
    Random(u64),
}

impl FromStr for Init {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s.strip_prefix("random:") {
            Some(seed) => seed
                .parse()
                .map(Init::Random)
                .map_err(|_| CliError::config("evolve", "init", format!("bad seed in {s}"))),
            None if s.is_empty() => Err(CliError::config("evolve", "init", "empty init")),
            None => Ok(Init::Snapshot(PathBuf::from(s))),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvolveFlags {
    pub init: Option<String>,
    pub seed: Option<u64>,
    pub steps: Option<usize>,
    pub dt: Option<f64>,
    pub coulomb: Option<bool>,
    pub gradient: Option<String>,
    pub g: Option<f64>,
    pub out_traj: Option<PathBuf>,
    pub out_final: Option<PathBuf>,
}

pub fn run_evolve(cfg: &RunConfig, flags: &EvolveFlags, base: Option<&Path>) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let sec = cfg.evolve.clone().unwrap_or_default();
    let init = match flags.init.clone().or(sec.init.clone()) {
        Some(s) => s.parse::<Init>()?,
        None => Init::Random(flags.seed.or(cfg.seed).unwrap_or(1)),
    };
    let g_override = flags.g.or(coupling_from(cfg));
    let (a, e, g, t0) = match &init {
        Init::Snapshot(p) => {
            let p = resolve(base, p);
            let recs = Snapshot::load(&p)?;
            let Some(first) = recs.first() else {
                return Err(CliError::config("evolve", "init", format!("{} holds no records", p.display())));
            };
            let a = first.field.clone().with_kind(FieldKind::Potential);
            let e = match recs.get(1) {
                Some(r) => r.field.clone().with_kind(FieldKind::Momentum),
                None => LatticeField::zeros(*a.grid(), a.colors(), FieldKind::Momentum),
            };
            (a, e, g_override.unwrap_or(first.coupling), first.time)
        }
        Init::Random(seed) => {
            let grid = grid_from(cfg)?;
            let k = colors_from(cfg);
            let fs = cfg.field.clone().unwrap_or_default();
            let amp = fs.amplitude.unwrap_or(0.3);
            let mamp = fs.momentum_amplitude.unwrap_or(amp);
            let a = generate_field(grid, k, FieldKind::Potential, &field_spec(&fs, *seed, amp)?);
            let e = generate_field(grid, k, FieldKind::Momentum, &field_spec(&fs, seed.wrapping_add(1), mamp)?);
            (a, e, g_override.unwrap_or(DEFAULT_G), 0.0)
        }
    };
    let sc = StructureConstants::new(a.colors(), g)?;
    let mut hc = HamiltonianConfig::new(sc, a.grid());
    hc.coulomb = flags.coulomb.or(sec.coulomb).unwrap_or(false);
    if let Some(dt) = flags.dt.or(sec.dt) {
        hc.dt = dt;
    }
    if let Some(h) = sec.fd_step {
        hc.fd_step = h;
    }
    hc.greens = parse_method("evolve", sec.method.as_deref().unwrap_or("born"), sec.n_terms.unwrap_or(6))?;
    let analytic_ok = !hc.coulomb || g == 0.0;
    hc.gradient = match flags.gradient.clone().or(sec.gradient.clone()).as_deref() {
        None => {
            if analytic_ok {
                GradientMethod::Analytic
            } else {
                GradientMethod::FiniteDifference
            }
        }
        Some("analytic") if analytic_ok => GradientMethod::Analytic,
        Some("analytic") => {
            return Err(CliError::config(
                "evolve",
                "gradient",
                "the analytic A-gradient needs the Coulomb term off or g = 0",
            ))
        }
        Some("finite_difference") => GradientMethod::FiniteDifference,
        Some(other) => {
            return Err(CliError::config("evolve", "gradient", format!("expected analytic or finite_difference, got {other}")));
        }
    };
    hc.validate()?;
    let steps = flags.steps.or(sec.steps).unwrap_or(100);
    let state = FlowState::new(&hc, a, e, t0)?;
    let traj = evolve(&hc, &state, steps)?;

    let mut out = Outcome::new();
    let h0 = traj.records[0].energy;
    let last = traj.records.last().expect("record 0 exists");
    out.line(format!(
        "evolve: steps={steps} g={g} dt={} coulomb={} energy0={} energy_final={} secular_drift={} max_fluctuation={} max_gauge_residual={}",
        hc.dt,
        if hc.coulomb { "on" } else { "off" },
        h0,
        last.energy,
        traj.secular_drift(),
        traj.max_fluctuation(),
        traj.max_gauge_residual()
    ));
    out.check("gauge_residual < 1e-8", traj.max_gauge_residual() < GAUGE_TOL);
    out.check("energy finite", traj.records.iter().all(|r| r.energy.is_finite()));

    if let Some(p) = flags.out_traj.clone().or(sec.out_traj.clone().map(|p| resolve(base, &p))) {
        let mut rows = vec![["step", "t", "energy", "gauge_residual", "f_norm"].map(String::from).to_vec()];
        for r in &traj.records {
            rows.push(vec![r.step.to_string(), fmt_f(r.t), fmt_f(r.energy), fmt_f(r.gauge_residual), fmt_f(r.f_norm)]);
        }
        write_csv(&p, &rows)?;
    }
    if let Some(p) = flags.out_final.clone().or(sec.out_final.clone().map(|p| resolve(base, &p))) {
        let st = &traj.last;
        Snapshot::save(&p, &[Snapshot::new(st.a.clone(), g, st.t), Snapshot::new(st.e.clone(), g, st.t)])?;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// spectrum

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SpectrumFlags {
    pub snapshot: Option<PathBuf>,
    pub m: Option<usize>,
    pub g: Option<f64>,
    pub out: Option<PathBuf>,
}

pub fn run_spectrum(cfg: &RunConfig, flags: &SpectrumFlags, base: Option<&Path>) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let sec = cfg.spectrum.clone().unwrap_or_default();
    let path = flags
        .snapshot
        .clone()
        .or(sec.snapshot.map(|p| resolve(base, &p)))
        .ok_or_else(|| CliError::config("spectrum", "snapshot", "a snapshot file is required"))?;
    let snap = load_background(&path)?;
    let g = flags.g.or(coupling_from(cfg)).unwrap_or(snap.coupling);
    let m = flags.m.or(sec.m).unwrap_or(6);
    if m == 0 {
        return Err(CliError::config("spectrum", "m", "must be ≥ 1"));
    }
    let sc = StructureConstants::new(snap.field.colors(), g)?;
    let op = FaddeevPopovOperator::assemble(&sc, &snap.field.clone().with_kind(FieldKind::Potential))?;
    let slice = op.low_spectrum(m)?;
    let mut out = Outcome::new();
    let worst = slice.residuals.iter().fold(0.0f64, |a, b| a.max(*b));
    out.line(format!("spectrum: m={m} g={g} lowest={} max_residual={worst}", slice.eigenvalues[0]));
    out.check("residuals < 1e-8", worst < EIG_TOL);
    if let Some(p) = flags.out.clone().or(sec.out.map(|p| resolve(base, &p))) {
        let mut rows = vec![["index", "eigenvalue", "residual"].map(String::from).to_vec()];
        for (i, (v, r)) in slice.eigenvalues.iter().zip(&slice.residuals).enumerate() {
            rows.push(vec![i.to_string(), fmt_f(*v), fmt_f(*r)]);
        }
        write_csv(&p, &rows)?;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// greens

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GreensFlags {
    pub snapshot: Option<PathBuf>,
    pub method: Option<String>,
    pub n_terms: Option<usize>,
    pub probe_seed: Option<u64>,
    pub probes: Option<usize>,
    pub g: Option<f64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct BornJson {
    residuals: Vec<f64>,
    fitted_rate: Option<f64>,
    fitted_ratio: Option<f64>,
}

#[derive(Debug, Serialize)]
struct GreensJson {
    method: &'static str,
    n_terms: Option<usize>,
    g: f64,
    probe_seed: u64,
    probes: usize,
    kernel_dimension: usize,
    defect: f64,
    symmetry_defect: f64,
    born: Option<BornJson>,
    pass: bool,
}

pub const PINV_DEFECT_TOL: f64 = 1e-10;
pub const SYMMETRY_TOL: f64 = 1e-9;

pub fn run_greens(cfg: &RunConfig, flags: &GreensFlags, base: Option<&Path>) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let sec = cfg.greens.clone().unwrap_or_default();
    let path = flags
        .snapshot
        .clone()
        .or(sec.snapshot.map(|p| resolve(base, &p)))
        .ok_or_else(|| CliError::config("greens", "snapshot", "a snapshot file is required"))?;
    let snap = load_background(&path)?;
    let a = snap.field.clone().with_kind(FieldKind::Potential);
    let g = flags.g.or(coupling_from(cfg)).unwrap_or(snap.coupling);
    let n_terms = flags.n_terms.or(sec.n_terms).unwrap_or(6);
    let method = parse_method("greens", flags.method.as_deref().or(sec.method.as_deref()).unwrap_or("born"), n_terms)?;
    let probe_seed = flags.probe_seed.or(sec.probe_seed).or(cfg.seed).unwrap_or(1);
    let probes = flags.probes.or(sec.probes).unwrap_or(4);
    if probes < 2 {
        return Err(CliError::config("greens", "probes", "need at least two probes"));
    }
    let sc = StructureConstants::new(a.colors(), g)?;
    let op = modified_green(&sc, &a, method)?;
    let fs: Vec<_> = (0..probes as u64)
        .map(|p| generate_scalar(*a.grid(), a.colors(), probe_seed.wrapping_add(p), SpectrumShape::White, 1.0))
        .collect();
    let defect = op.defect(&fs)?;
    let symmetry_defect = op.symmetry_defect(&fs)?;
    let born = match method {
        GreensMethod::Born { n_terms } => {
            let (_, rep) = born_apply(&sc, &a, &fs[0], n_terms)?;
            Some(BornJson {
                fitted_ratio: rep.fitted_ratio(),
                fitted_rate: rep.fitted_rate,
                residuals: rep.residuals,
            })
        }
        GreensMethod::PseudoInverse => None,
    };
    let mut out = Outcome::new();
    out.line(format!(
        "greens: method={} g={g} defect={defect} symmetry_defect={symmetry_defect} kernel_dimension={}",
        method_name(method),
        op.kernel().len()
    ));
    out.check("symmetry_defect < 1e-9", symmetry_defect < SYMMETRY_TOL);
    if method == GreensMethod::PseudoInverse {
        out.check("defect < 1e-10", defect < PINV_DEFECT_TOL);
    } else {
        out.check("defect finite", defect.is_finite());
    }
    if let Some(p) = flags.out.clone().or(sec.out.map(|p| resolve(base, &p))) {
        let json = GreensJson {
            method: method_name(method),
            n_terms: match method {
                GreensMethod::Born { n_terms } => Some(n_terms),
                GreensMethod::PseudoInverse => None,
            },
            g,
            probe_seed,
            probes,
            kernel_dimension: op.kernel().len(),
            defect,
            symmetry_defect,
            born,
            pass: out.passed,
        };
        write_json(&p, &json)?;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// gap-scan

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GapFlags {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

/// Build the scan configuration from the `[gap]` table.
pub fn gap_config(cfg: &RunConfig, seed: Option<u64>) -> Result<GapScanConfig, CliError> {
    let grid = grid_from(cfg)?;
    let mut gc = GapScanConfig::new(grid, colors_from(cfg));
    let sec = cfg.gap.clone().unwrap_or_default();
    if let Some(v) = sec.g_list {
        gc.g_list = v;
    }
    if let Some(v) = sec.r_amp {
        gc.r_amp = v;
    }
    if let Some(v) = seed.or(sec.profile_seed) {
        gc.profile_seed = v;
    }
    if let Some(v) = sec.sites {
        gc.sites = v
            .iter()
            .map(|s| SitePair {
                x0: [s[0], s[1], s[2]],
                y0: [s[3], s[4], s[5]],
            })
            .collect();
    }
    if let Some(v) = sec.directions {
        gc.directions = v;
    }
    if let Some(v) = sec.c {
        gc.c = v;
        gc.color_indices = (0..gc.colors).filter(|&a| a != v).collect();
    }
    if let Some(v) = sec.colors {
        gc.color_indices = v;
    }
    if let Some(v) = sec.j {
        gc.j = v;
    }
    if let Some(v) = sec.k_max {
        gc.k_max = v;
    }
    if let Some(v) = sec.n_terms {
        gc.n_terms = v;
    }
    if let Some(p) = sec.path {
        gc.path = PathFamily::parse(&p)
            .ok_or_else(|| CliError::config("gap", "path", format!("expected single_component or scaled, got {p}")))?;
    }
    if let Some(v) = sec.principal_value {
        gc.quadrature.principal_value = v;
    }
    if let Some(v) = sec.quad_order {
        gc.quadrature.order = v;
    }
    if let Some(v) = sec.quad_panels {
        gc.quadrature.panels = v;
    }
    if let Some(v) = sec.quad_max_doublings {
        gc.quadrature.max_doublings = v;
    }
    if let Some(v) = sec.quad_rel_tol {
        gc.quadrature.rel_tol = v;
    }
    gc.validate().map_err(|e| match e {
        ymc_core::YmError::Domain { message, .. } => CliError::config("gap", "config", message),
        other => other.into(),
    })?;
    Ok(gc)
}

pub fn run_gap(cfg: &RunConfig, flags: &GapFlags, base: Option<&Path>) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let gc = gap_config(cfg, flags.seed)?;
    let res = gap_scan(&gc)?;
    let mut out = Outcome::new();
    let slope = res.fitted_slope.map_or("none".to_string(), fmt_f);
    out.line(format!(
        "gap-scan: path={} pairs={} entries={} fitted_slope={slope}",
        res.path.name(),
        gc.sites.len(),
        res.entries.len()
    ));
    for (g, eta) in &res.eta {
        out.line(format!("gap-scan: g={g} eta={eta}"));
    }
    out.check("eta > 0 for every g", res.all_eta_positive());
    out.check("fitted slope finite", res.fitted_slope.is_some_and(f64::is_finite));
    let target = flags.out.clone().or(cfg.gap.as_ref().and_then(|s| s.out.clone()).map(|p| resolve(base, &p)));
    if let Some(p) = target {
        let mut rows = vec![["g", "x0", "y0", "i", "a", "k", "I", "lambda", "flags"].map(String::from).to_vec()];
        for e in &res.entries {
            rows.push(vec![
                fmt_f(e.g),
                e.x0.to_string(),
                e.y0.to_string(),
                e.i.to_string(),
                e.a.to_string(),
                e.k.to_string(),
                fmt_f(e.integral),
                fmt_f(e.lambda),
                e.flags.label(),
            ]);
        }
        for (g, eta) in &res.eta {
            rows.push(vec!["eta_per_g".into(), fmt_f(*g), fmt_f(*eta)]);
        }
        rows.push(vec!["fitted_slope".into(), slope]);
        rows.push(vec!["path".into(), res.path.name().into()]);
        rows.push(vec!["index_factor".into(), fmt_f(res.index_factor)]);
        for (g, b) in &res.uniform_bound {
            rows.push(vec!["uniform_bound".into(), fmt_f(*g), fmt_f(*b)]);
        }
        write_csv(&p, &rows)?;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// fock-check

#[derive(Debug, Clone, Default, PartialEq)]
pub struct FockFlags {
    pub d: Option<usize>,
    pub n_max: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Serialize)]
struct SuiteJson {
    name: &'static str,
    max_deviation: f64,
    tolerance: f64,
    bound: &'static str,
    status: &'static str,
}

#[derive(Debug, Serialize)]
struct FockJson {
    d: usize,
    n_max: usize,
    seed: u64,
    suites: Vec<SuiteJson>,
    all_pass: bool,
}

pub fn run_fock(cfg: &RunConfig, flags: &FockFlags, base: Option<&Path>) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let sec = cfg.fock.clone().unwrap_or_default();
    let def = FockCheckConfig::default();
    let fc = FockCheckConfig {
        d: flags.d.or(sec.d).unwrap_or(def.d),
        n_max: flags.n_max.or(sec.n_max).unwrap_or(def.n_max),
        seed: flags.seed.or(sec.seed).or(cfg.seed).unwrap_or(def.seed),
    };
    if fc.d == 0 {
        return Err(CliError::config("fock", "d", "must be ≥ 1"));
    }
    if fc.n_max < 2 {
        return Err(CliError::config("fock", "n_max", "must be ≥ 2"));
    }
    let rep = fock_check(&fc)?;
    let mut out = Outcome::new();
    out.line(format!("fock-check: d={} n_max={} seed={}", fc.d, fc.n_max, fc.seed));
    for s in &rep.suites {
        let rel = if s.upper_bound { "<" } else { ">" };
        out.line(format!("fock-check: {} max_deviation={} {rel} {}", s.name, s.max_deviation, s.tolerance));
        out.check(s.name, s.pass());
    }
    if let Some(p) = flags.out.clone().or(sec.out.map(|p| resolve(base, &p))) {
        let json = FockJson {
            d: fc.d,
            n_max: fc.n_max,
            seed: fc.seed,
            suites: rep
                .suites
                .iter()
                .map(|s| SuiteJson {
                    name: s.name,
                    max_deviation: s.max_deviation,
                    tolerance: s.tolerance,
                    bound: if s.upper_bound { "upper" } else { "lower" },
                    status: if s.pass() { "pass" } else { "fail" },
                })
                .collect(),
            all_pass: rep.all_pass(),
        };
        write_json(&p, &json)?;
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// run

/// Execute the `[run].tasks` list with options taken from the file only;
/// relative paths resolve against the config file's directory.
pub fn run_config(cfg: &RunConfig, base: Option<&Path>) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let tasks = cfg
        .run
        .as_ref()
        .map(|r| r.tasks.clone())
        .ok_or_else(|| CliError::config("run", "tasks", "the config has no [run] table"))?;
    let mut out = Outcome::new();
    for t in &tasks {
        let o = match t.as_str() {
            "evolve" => run_evolve(cfg, &EvolveFlags::default(), base)?,
            "spectrum" => run_spectrum(cfg, &SpectrumFlags::default(), base)?,
            "greens" => run_greens(cfg, &GreensFlags::default(), base)?,
            "gap-scan" => run_gap(cfg, &GapFlags::default(), base)?,
            "fock-check" => run_fock(cfg, &FockFlags::default(), base)?,
            other => return Err(CliError::config("run", "tasks", format!("unknown task {other}"))),
        };
        out.extend(o);
    }
    Ok(out)
}

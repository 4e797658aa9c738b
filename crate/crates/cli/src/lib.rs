//! Command-line experiment runner for the `ymc-core` workbench.
//!
//! Exit status: `0` when every in-run assertion holds, `1` when an
//! assertion fails, `2` for configuration or precondition errors, `3` for
//! numerical failures and output errors.

pub mod commands;
pub mod config;
pub mod error;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::commands::{EvolveFlags, FockFlags, GapFlags, GreensFlags, Outcome, SpectrumFlags};
use crate::config::RunConfig;
use crate::error::{CliError, EXIT_ASSERTION, EXIT_CONFIG};

#[derive(Debug, Parser)]
#[command(name = "ymc", version, about = "Coulomb-gauge Yang-Mills lattice workbench")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Switch {
    On,
    Off,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Leapfrog evolution of (A, E).
    Evolve {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Seed for `random` initial data when `--init` is absent.
        #[arg(long)]
        seed: Option<u64>,
        /// Snapshot path or `random:<seed>`.
        #[arg(long)]
        init: Option<String>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, value_enum)]
        coulomb: Option<Switch>,
        /// `analytic` or `finite_difference`.
        #[arg(long)]
        gradient: Option<String>,
        /// Coupling override.
        #[arg(long)]
        g: Option<f64>,
        #[arg(long = "out-traj")]
        out_traj: Option<PathBuf>,
        #[arg(long = "out-final")]
        out_final: Option<PathBuf>,
    },
    /// Faddeev-Popov eigenvalues nearest zero.
    Spectrum {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        snapshot: Option<PathBuf>,
        #[arg(short = 'm', long = "count")]
        m: Option<usize>,
        #[arg(long)]
        g: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Modified Green's function defects and Born remainders.
    Greens {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        snapshot: Option<PathBuf>,
        /// `born` or `pinv`.
        #[arg(long)]
        method: Option<String>,
        #[arg(short = 'n', long = "terms")]
        n_terms: Option<usize>,
        /// Seed of the first probe; `--seed` is an alias.
        #[arg(long = "probe-seed", visible_alias = "seed")]
        probe_seed: Option<u64>,
        #[arg(long)]
        probes: Option<usize>,
        #[arg(long)]
        g: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generalized-eigenvalue gap scan.
    GapScan {
        #[arg(long)]
        config: Option<PathBuf>,
        /// Profile seed override.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fock-space identity checks.
    FockCheck {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long = "nmax")]
        n_max: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the tasks listed in the config's `[run]` table.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
}

fn load(config: &Option<PathBuf>) -> Result<(RunConfig, Option<PathBuf>), CliError> {
    match config {
        Some(p) => Ok((RunConfig::load(p)?, p.parent().map(Path::to_path_buf))),
        None => Ok((RunConfig::default(), None)),
    }
}

/// Execute a parsed command.
pub fn execute(cmd: Command) -> Result<Outcome, CliError> {
    match cmd {
        Command::Evolve {
            config,
            seed,
            init,
            steps,
            dt,
            coulomb,
            gradient,
            g,
            out_traj,
            out_final,
        } => {
            let (cfg, base) = load(&config)?;
            let flags = EvolveFlags {
                init,
                seed,
                steps,
                dt,
                coulomb: coulomb.map(|s| s == Switch::On),
                gradient,
                g,
                out_traj,
                out_final,
            };
            commands::run_evolve(&cfg, &flags, base.as_deref())
        }
        Command::Spectrum { config, snapshot, m, g, out } => {
            let (cfg, base) = load(&config)?;
            commands::run_spectrum(&cfg, &SpectrumFlags { snapshot, m, g, out }, base.as_deref())
        }
        Command::Greens {
            config,
            snapshot,
            method,
            n_terms,
            probe_seed,
            probes,
            g,
            out,
        } => {
            let (cfg, base) = load(&config)?;
            let flags = GreensFlags {
                snapshot,
                method,
                n_terms,
                probe_seed,
                probes,
                g,
                out,
            };
            commands::run_greens(&cfg, &flags, base.as_deref())
        }
        Command::GapScan { config, seed, out } => {
            let (cfg, base) = load(&config)?;
            commands::run_gap(&cfg, &GapFlags { seed, out }, base.as_deref())
        }
        Command::FockCheck { config, d, n_max, seed, out } => {
            let (cfg, base) = load(&config)?;
            commands::run_fock(&cfg, &FockFlags { d, n_max, seed, out }, base.as_deref())
        }
        Command::Run { config } => {
            let (cfg, base) = load(&Some(config))?;
            commands::run_config(&cfg, base.as_deref())
        }
    }
}

/// Parse `args`, run, print the summary and return the exit status.
pub fn run_cli<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(out) => {
            for l in &out.lines {
                println!("{l}");
            }
            if out.passed {
                0
            } else {
                eprintln!("error: in-run assertions failed");
                EXIT_ASSERTION
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

//! Run configuration: a TOML file with one table per subcommand.
//!
//! Every key is optional in the file; missing values fall back to the
//! defaults listed in `docs/format.md`, and command-line flags take
//! precedence over the file.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub grid: Option<GridSection>,
    pub algebra: Option<AlgebraSection>,
    pub field: Option<FieldSection>,
    pub evolve: Option<EvolveSection>,
    pub spectrum: Option<SpectrumSection>,
    pub greens: Option<GreensSection>,
    pub gap: Option<GapSection>,
    pub fock: Option<FockSection>,
    pub run: Option<RunSection>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridSection {
    pub n: Option<usize>,
    pub l_box: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct AlgebraSection {
    pub colors: Option<usize>,
    pub g: Option<f64>,
}

/// Random initial data.
#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FieldSection {
    /// `white` or `band_limited`.
    pub shape: Option<String>,
    pub p_max: Option<u32>,
    pub amplitude: Option<f64>,
    pub momentum_amplitude: Option<f64>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct EvolveSection {
    /// A snapshot path or `random:<seed>`.
    pub init: Option<String>,
    pub steps: Option<usize>,
    pub dt: Option<f64>,
    pub coulomb: Option<bool>,
    /// `analytic` or `finite_difference`.
    pub gradient: Option<String>,
    pub fd_step: Option<f64>,
    /// `born` or `pinv`.
    pub method: Option<String>,
    pub n_terms: Option<usize>,
    pub out_traj: Option<PathBuf>,
    pub out_final: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SpectrumSection {
    pub snapshot: Option<PathBuf>,
    pub m: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GreensSection {
    pub snapshot: Option<PathBuf>,
    pub method: Option<String>,
    pub n_terms: Option<usize>,
    pub probe_seed: Option<u64>,
    pub probes: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GapSection {
    pub g_list: Option<Vec<f64>>,
    pub r_amp: Option<f64>,
    pub profile_seed: Option<u64>,
    /// Each entry is `[x0₁, x0₂, x0₃, y0₁, y0₂, y0₃]`.
    pub sites: Option<Vec<[usize; 6]>>,
    pub directions: Option<Vec<usize>>,
    pub colors: Option<Vec<usize>>,
    pub j: Option<usize>,
    pub c: Option<usize>,
    pub k_max: Option<usize>,
    pub n_terms: Option<usize>,
    /// `single_component` or `scaled`.
    pub path: Option<String>,
    pub principal_value: Option<bool>,
    pub quad_order: Option<usize>,
    pub quad_panels: Option<usize>,
    pub quad_max_doublings: Option<usize>,
    pub quad_rel_tol: Option<f64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct FockSection {
    pub d: Option<usize>,
    pub n_max: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    /// Subcommands to execute in order.
    pub tasks: Vec<String>,
}

pub const TASKS: [&str; 5] = ["evolve", "spectrum", "greens", "gap-scan", "fock-check"];

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::config("config", "schema", e.message().to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config("config", "path", format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Structural checks that do not depend on the subcommand.
    pub fn validate(&self) -> Result<(), CliError> {
        if let Some(g) = &self.grid {
            if let Some(n) = g.n {
                if n < 4 || n % 2 != 0 {
                    return Err(CliError::config("grid", "n", format!("must be even and ≥ 4, got {n}")));
                }
            }
            if let Some(l) = g.l_box {
                if !(l > 0.0 && l.is_finite()) {
                    return Err(CliError::config("grid", "l_box", format!("must be positive, got {l}")));
                }
            }
        }
        if let Some(a) = &self.algebra {
            if let Some(k) = a.colors {
                if k != 3 {
                    return Err(CliError::config("algebra", "colors", format!("only K = 3 is supported, got {k}")));
                }
            }
            if let Some(g) = a.g {
                if !(g >= 0.0 && g.is_finite()) {
                    return Err(CliError::config("algebra", "g", format!("must be ≥ 0, got {g}")));
                }
            }
        }
        if let Some(f) = &self.field {
            if let Some(s) = &f.shape {
                if s != "white" && s != "band_limited" {
                    return Err(CliError::config("field", "shape", format!("expected white or band_limited, got {s}")));
                }
            }
            for (name, v) in [("amplitude", f.amplitude), ("momentum_amplitude", f.momentum_amplitude)] {
                if let Some(v) = v {
                    if !(v >= 0.0 && v.is_finite()) {
                        return Err(CliError::config("field", name, format!("must be ≥ 0, got {v}")));
                    }
                }
            }
        }
        if let Some(r) = &self.run {
            if r.tasks.is_empty() {
                return Err(CliError::config("run", "tasks", "no tasks listed"));
            }
            for t in &r.tasks {
                if !TASKS.contains(&t.as_str()) {
                    return Err(CliError::config("run", "tasks", format!("unknown task {t}; expected one of {TASKS:?}")));
                }
            }
        }
        Ok(())
    }
}

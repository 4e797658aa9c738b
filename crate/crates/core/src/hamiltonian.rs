//! Hamilton function `H(A, E)` with the instantaneous Coulomb term, its
//! functional gradients, and projected leapfrog evolution.
//!
//! `H = ½∫(E² + B² + fΔf + 2ρA₀)` with `f = −g·Gρ` and `A₀ = G·Δf`, where
//! `G` is the modified Green's function of the Faddeev–Popov operator with
//! the constants as kernel. Gradients are divided by the cell volume so the
//! flow does not depend on the quadrature weight.

use crate::algebra::{StructureConstants, EPS_TRIPLES};
use crate::error::{Result, YmError};
use crate::faddeev_popov::GAUGE_TOL;
use crate::fields::{charge_density, chromomagnetic};
use crate::greens::{GreensMethod, GreensOperator, KernelChoice};
use crate::lattice::{coulomb_residual, curl, laplacian, transverse_project, ColorScalarField, FieldKind, Grid, LatticeField};

const MODULE: &str = "hamiltonian";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientMethod {
    /// Closed-form gradient; for `∂H/∂A` only available without the Coulomb
    /// term or at `g = 0`.
    Analytic,
    /// Central differences on every slot.
    FiniteDifference,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianConfig {
    pub sc: StructureConstants,
    pub greens: GreensMethod,
    pub gradient: GradientMethod,
    /// Relative central-difference step; the step on slot `x` is
    /// `fd_step·(1 + |x|)`.
    pub fd_step: f64,
    pub dt: f64,
    pub coulomb: bool,
}

impl HamiltonianConfig {
    /// Defaults: Born with six terms, finite differences with step `1e−5`,
    /// `dt = 0.01·spacing`, Coulomb term on.
    pub fn new(sc: StructureConstants, grid: &Grid) -> Self {
        Self {
            sc,
            greens: GreensMethod::Born { n_terms: 6 },
            gradient: GradientMethod::FiniteDifference,
            fd_step: 1e-5,
            dt: 0.01 * grid.spacing(),
            coulomb: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(YmError::domain(MODULE, format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.fd_step > 0.0 && self.fd_step.is_finite()) {
            return Err(YmError::domain(MODULE, format!("fd_step must be positive, got {}", self.fd_step)));
        }
        Ok(())
    }
}

fn check_gauge(a: &LatticeField) -> Result<()> {
    let residual = coulomb_residual(a);
    if residual < GAUGE_TOL {
        Ok(())
    } else {
        Err(YmError::Gauge {
            module: MODULE,
            residual,
            tolerance: GAUGE_TOL,
        })
    }
}

fn green(cfg: &HamiltonianConfig, a: &LatticeField) -> Result<GreensOperator> {
    GreensOperator::new_unchecked(&cfg.sc, a, cfg.greens, KernelChoice::Constants)
}

/// `(f, A₀)` for a given Green's operator.
fn coulomb_fields(cfg: &HamiltonianConfig, g_op: &GreensOperator, a: &LatticeField, e: &LatticeField) -> Result<(ColorScalarField, ColorScalarField)> {
    let rho = charge_density(&cfg.sc, a, e)?;
    let f = g_op.apply(&rho)?.scaled(-cfg.sc.coupling());
    let a0 = g_op.apply(&laplacian(&f))?;
    Ok((f, a0))
}

/// `f^a = −g ∫G^{ab}ρ^b`, `A₀^a = ∫G^{ab}Δf^b`.
pub fn solve_f_and_a0(cfg: &HamiltonianConfig, a: &LatticeField, e: &LatticeField) -> Result<(ColorScalarField, ColorScalarField)> {
    check_gauge(a)?;
    a.check_shape(e)?;
    let g_op = green(cfg, a)?;
    coulomb_fields(cfg, &g_op, a, e)
}

fn sum_squares(v: &LatticeField) -> f64 {
    v.data().iter().map(|x| x * x).sum()
}

/// `H` without the gauge check; the same function is used by the
/// finite-difference probes.
fn energy_unchecked(cfg: &HamiltonianConfig, a: &LatticeField, e: &LatticeField) -> Result<f64> {
    let w = a.grid().cell_volume();
    let b = chromomagnetic(&cfg.sc, a)?;
    let mut h = 0.5 * w * (sum_squares(e) + sum_squares(&b));
    if cfg.coulomb && cfg.sc.coupling() != 0.0 {
        let g_op = green(cfg, a)?;
        let (f, a0) = coulomb_fields(cfg, &g_op, a, e)?;
        let rho = charge_density(&cfg.sc, a, e)?;
        h += 0.5 * f.dot(&laplacian(&f)) + rho.dot(&a0);
    }
    Ok(h)
}

/// `H(A, E)`; with the Coulomb term disabled only `½∫(E² + B²)`.
pub fn energy(cfg: &HamiltonianConfig, a: &LatticeField, e: &LatticeField) -> Result<f64> {
    check_gauge(a)?;
    a.check_shape(e)?;
    energy_unchecked(cfg, a, e)
}

/// Central-difference gradient over every slot of `x`, divided by the cell
/// volume. Slots are split across threads; each slot is independent.
fn fd_gradient(cfg: &HamiltonianConfig, x: &LatticeField, eval: &(dyn Fn(&LatticeField) -> Result<f64> + Sync)) -> Result<LatticeField> {
    let len = x.data().len();
    let w = x.grid().cell_volume();
    let threads = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).min(len.max(1));
    let chunk = len.div_ceil(threads);
    let mut out = vec![0.0; len];
    let results: Vec<Result<()>> = std::thread::scope(|scope| {
        let handles: Vec<_> = out
            .chunks_mut(chunk)
            .enumerate()
            .map(|(ci, slice)| {
                scope.spawn(move || -> Result<()> {
                    let mut probe = x.clone();
                    for (off, slot) in slice.iter_mut().enumerate() {
                        let j = ci * chunk + off;
                        let x0 = x.data()[j];
                        let h = cfg.fd_step * (1.0 + x0.abs());
                        probe.data_mut()[j] = x0 + h;
                        let hp = eval(&probe)?;
                        probe.data_mut()[j] = x0 - h;
                        let hm = eval(&probe)?;
                        probe.data_mut()[j] = x0;
                        let d = (hp - hm) / (2.0 * h * w);
                        if !d.is_finite() {
                            return Err(YmError::numerical(MODULE, format!("non-finite difference quotient at slot {j}")));
                        }
                        *slot = d;
                    }
                    Ok(())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("gradient worker panicked")).collect()
    });
    for r in results {
        r?;
    }
    LatticeField::from_vec(*x.grid(), x.colors(), FieldKind::Auxiliary, out)
}

/// Exact discrete gradient of `½∫B²`:
/// `½ ∇×B + (g/2) ε_imk C^a_{dc} B_i^a A_k^c` in slot `(d, m)`.
fn magnetic_gradient(sc: &StructureConstants, a: &LatticeField) -> Result<LatticeField> {
    let b = chromomagnetic(sc, a)?;
    let mut grad = curl(&b).scaled(0.5);
    let grid = *a.grid();
    let k = a.colors();
    for s in 0..grid.sites() {
        for d in 0..k {
            for (i, m, kk, e_imk) in EPS_TRIPLES {
                let mut acc = 0.0;
                for col in 0..k {
                    for c in 0..k {
                        acc += sc.get(col, d, c) * b.get(s, col, i) * a.get(s, c, kk);
                    }
                }
                let v = grad.get(s, d, m) + 0.5 * e_imk * acc;
                grad.set(s, d, m, v);
            }
        }
    }
    Ok(grad.with_kind(FieldKind::Auxiliary))
}

/// `∂H/∂A` per unit cell volume, transversally projected.
pub fn grad_a(cfg: &HamiltonianConfig, a: &LatticeField, e: &LatticeField) -> Result<LatticeField> {
    check_gauge(a)?;
    a.check_shape(e)?;
    grad_a_unchecked(cfg, a, e)
}

fn grad_a_unchecked(cfg: &HamiltonianConfig, a: &LatticeField, e: &LatticeField) -> Result<LatticeField> {
    let raw = match cfg.gradient {
        GradientMethod::Analytic => {
            if cfg.coulomb && cfg.sc.coupling() != 0.0 {
                return Err(YmError::domain(
                    MODULE,
                    "analytic ∂H/∂A is unavailable with the Coulomb term at g ≠ 0; use finite differences",
                ));
            }
            magnetic_gradient(&cfg.sc, a)?
        }
        GradientMethod::FiniteDifference => fd_gradient(cfg, a, &|probe| energy_unchecked(cfg, probe, e))?,
    };
    Ok(transverse_project(&raw))
}

/// `∂H/∂E` per unit cell volume, transversally projected.
pub fn grad_e(cfg: &HamiltonianConfig, a: &LatticeField, e: &LatticeField) -> Result<LatticeField> {
    check_gauge(a)?;
    a.check_shape(e)?;
    grad_e_unchecked(cfg, a, e)
}

fn grad_e_unchecked(cfg: &HamiltonianConfig, a: &LatticeField, e: &LatticeField) -> Result<LatticeField> {
    let raw = match cfg.gradient {
        GradientMethod::Analytic => {
            let mut out = e.clone().with_kind(FieldKind::Auxiliary);
            let g = cfg.sc.coupling();
            if cfg.coulomb && g != 0.0 {
                // H_c = (½g² − g)⟨ρ, GΔGρ⟩ and ρ is linear in E.
                let g_op = green(cfg, a)?;
                let rho = charge_density(&cfg.sc, a, e)?;
                let m_rho = g_op.apply(&laplacian(&g_op.apply(&rho)?))?;
                let s = g * g - 2.0 * g;
                let grid = *a.grid();
                for site in 0..grid.sites() {
                    for (col, b, c, _) in EPS_TRIPLES {
                        let coef = s * cfg.sc.get(col, b, c) * m_rho.get(site, col);
                        for i in 0..3 {
                            let v = out.get(site, b, i) + coef * a.get(site, c, i);
                            out.set(site, b, i, v);
                        }
                    }
                }
            }
            out
        }
        GradientMethod::FiniteDifference => fd_gradient(cfg, e, &|probe| energy_unchecked(cfg, a, probe))?,
    };
    Ok(transverse_project(&raw))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub t: f64,
    pub a: LatticeField,
    pub e: LatticeField,
    pub energy: f64,
}

impl FlowState {
    /// Validate the gauge condition on both fields and evaluate `H`.
    pub fn new(cfg: &HamiltonianConfig, a: LatticeField, e: LatticeField, t: f64) -> Result<Self> {
        check_gauge(&e)?;
        let energy = energy(cfg, &a, &e)?;
        Ok(Self { t, a, e, energy })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRecord {
    pub step: usize,
    pub t: f64,
    pub energy: f64,
    /// `max(coulomb_residual(A), coulomb_residual(E))`.
    pub gauge_residual: f64,
    /// `‖f‖`; zero when the Coulomb term is disabled.
    pub f_norm: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub records: Vec<TrajectoryRecord>,
    pub last: FlowState,
}

impl Trajectory {
    /// Least-squares energy trend over the run times the duration, relative
    /// to the initial energy.
    pub fn secular_drift(&self) -> f64 {
        let r = &self.records;
        if r.len() < 2 || r[0].energy == 0.0 {
            return 0.0;
        }
        let ts: Vec<f64> = r.iter().map(|x| x.t).collect();
        let hs: Vec<f64> = r.iter().map(|x| x.energy).collect();
        let slope = crate::greens::ls_slope(&ts, &hs);
        (slope * (ts[ts.len() - 1] - ts[0]) / r[0].energy).abs()
    }

    /// `max_t |H(t) − H(0)| / |H(0)|`.
    pub fn max_fluctuation(&self) -> f64 {
        let h0 = self.records[0].energy;
        if h0 == 0.0 {
            return self.records.iter().fold(0.0, |m, r| m.max(r.energy.abs()));
        }
        self.records.iter().fold(0.0, |m, r| m.max(((r.energy - h0) / h0).abs()))
    }

    pub fn max_gauge_residual(&self) -> f64 {
        self.records.iter().fold(0.0, |m, r| m.max(r.gauge_residual))
    }
}

/// Free transverse frequency `ω = |p|/2` of Fourier mode `mode`.
pub fn linear_frequency(grid: &Grid, mode: usize) -> f64 {
    grid.laplacian_eigen(mode).abs().sqrt() / 2.0
}

/// Mean period of a sampled oscillation from its zero crossings (linear
/// interpolation between samples). `None` with fewer than three crossings.
pub fn oscillation_period(t: &[f64], x: &[f64]) -> Option<f64> {
    let mut crossings = Vec::new();
    for k in 1..t.len().min(x.len()) {
        let (x0, x1) = (x[k - 1], x[k]);
        if x0 == 0.0 || x0.signum() != x1.signum() && x1 != 0.0 {
            crossings.push(t[k - 1] + (t[k] - t[k - 1]) * x0 / (x0 - x1));
        }
    }
    if crossings.len() < 3 {
        return None;
    }
    let span = crossings[crossings.len() - 1] - crossings[0];
    Some(2.0 * span / (crossings.len() - 1) as f64)
}

/// One kick–drift–kick step with transverse projection after each substep.
pub fn leapfrog_step(cfg: &HamiltonianConfig, a: &LatticeField, e: &LatticeField) -> Result<(LatticeField, LatticeField)> {
    let dt = cfg.dt;
    let e_half = transverse_project(&e.axpy(-0.5 * dt, &grad_a_unchecked(cfg, a, e)?));
    let a_new = transverse_project(&a.axpy(dt, &grad_e_unchecked(cfg, a, &e_half)?));
    let e_new = transverse_project(&e_half.axpy(-0.5 * dt, &grad_a_unchecked(cfg, &a_new, &e_half)?));
    Ok((a_new, e_new))
}

fn record(cfg: &HamiltonianConfig, step: usize, st: &FlowState) -> Result<TrajectoryRecord> {
    let f_norm = if cfg.coulomb && cfg.sc.coupling() != 0.0 {
        solve_f_and_a0(cfg, &st.a, &st.e)?.0.norm()
    } else {
        0.0
    };
    Ok(TrajectoryRecord {
        step,
        t: st.t,
        energy: st.energy,
        gauge_residual: coulomb_residual(&st.a).max(coulomb_residual(&st.e)),
        f_norm,
    })
}

/// `n_steps` leapfrog steps; record 0 is the initial state.
pub fn evolve(cfg: &HamiltonianConfig, state: &FlowState, n_steps: usize) -> Result<Trajectory> {
    cfg.validate()?;
    check_gauge(&state.a)?;
    check_gauge(&state.e)?;
    let mut st = state.clone();
    let mut records = vec![record(cfg, 0, &st)?];
    for step in 1..=n_steps {
        let (a, e) = leapfrog_step(cfg, &st.a, &st.e)?;
        let h = energy_unchecked(cfg, &a, &e)?;
        if !h.is_finite() {
            return Err(YmError::numerical(MODULE, format!("energy became non-finite at step {step}")));
        }
        st = FlowState {
            t: state.t + step as f64 * cfg.dt,
            a,
            e,
            energy: h,
        };
        records.push(record(cfg, step, &st)?);
    }
    Ok(Trajectory { records, last: st })
}

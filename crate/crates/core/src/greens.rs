//! Green's functions of the Faddeev–Popov operator.
//!
//! `G₀` is the zero-mean inverse of `−Δ` on the torus. The Born series
//! `K_n = Σ_{m≤n} (G₀V)^m G₀` approximates `(−L)⁻¹` on mean-zero fields,
//! where `V` is the first-order part of `L`. The modified Green's function is
//! `G = −(I−P)·½(K_n + K_nᵀ)·(I−P)`, so that `L∘G = I − P` with `P` the
//! kernel projector. The pseudoinverse method builds the same object from a
//! dense eigendecomposition.

use nalgebra::DMatrix;

use crate::algebra::StructureConstants;
use crate::error::{Result, YmError};
use crate::faddeev_popov::{FaddeevPopovOperator, Perturbation, SpectralSlice, DENSE_LIMIT};
use crate::lattice::{ColorScalarField, Grid, LatticeField};
use crate::linalg::{self, FnOperator};
use crate::spectral;

const MODULE: &str = "greens";
const NORM_ITERATIONS: usize = 40;
const NORM_SEED: u64 = 0xB0_27;

fn fourier_multiplier(grid: &Grid, colors: usize, x: &[f64], symbol: impl Fn(f64) -> f64) -> Vec<f64> {
    let n = grid.n();
    let mut out = vec![0.0; x.len()];
    for a in 0..colors {
        let comp: Vec<f64> = x.iter().skip(a).step_by(colors).copied().collect();
        let mut spec = spectral::forward(&comp, n);
        for (m, c) in spec.iter_mut().enumerate() {
            let p2 = grid.laplacian_eigen(m);
            *c *= if p2 == 0.0 { 0.0 } else { symbol(p2) };
        }
        for (s, v) in spectral::inverse_real(spec, n).into_iter().enumerate() {
            out[s * colors + a] = v;
        }
    }
    out
}

fn g0_raw(grid: &Grid, colors: usize, x: &[f64]) -> Vec<f64> {
    fourier_multiplier(grid, colors, x, |p2| 1.0 / p2)
}

/// `u` with `Δu = −(f − mean f)` and zero mean per color.
pub fn free_green_apply(f: &ColorScalarField) -> Result<ColorScalarField> {
    if !f.is_finite() {
        return Err(YmError::domain(MODULE, "free_green_apply: non-finite input"));
    }
    ColorScalarField::from_vec(*f.grid(), f.colors(), g0_raw(f.grid(), f.colors(), f.data()))
}

/// Periodic free kernel `g₀(r) = V⁻¹ Σ_{p≠0} cos(p·r)/|p|²`, by direct
/// mode summation.
pub fn free_kernel_value(grid: &Grid, r: [usize; 3]) -> f64 {
    let dk = grid.dk();
    let mut acc = 0.0;
    for m in 0..grid.sites() {
        let p2 = grid.laplacian_eigen(m);
        if p2 == 0.0 {
            continue;
        }
        let k = grid.mode_numbers(m);
        let phase: f64 = (0..3)
            .map(|j| dk * k[j] as f64 * r[j] as f64 * grid.spacing())
            .sum();
        acc += phase.cos() / p2;
    }
    acc / grid.volume()
}

/// Raw-coordinate series pieces shared by every Born evaluation.
#[derive(Debug, Clone)]
struct BornParts {
    grid: Grid,
    colors: usize,
    pert: Perturbation,
}

impl BornParts {
    fn new(sc: &StructureConstants, a: &LatticeField) -> Self {
        Self {
            grid: *a.grid(),
            colors: a.colors(),
            pert: Perturbation::new(sc, a),
        }
    }

    fn g0(&self, x: &[f64]) -> Vec<f64> {
        g0_raw(&self.grid, self.colors, x)
    }

    /// `K_n x = Σ_{m≤n} (G₀V)^m G₀ x`.
    fn series(&self, x: &[f64], n_terms: usize) -> Vec<f64> {
        let mut u = self.g0(x);
        let mut sum = u.clone();
        for _ in 0..n_terms {
            u = self.g0(&self.pert.apply(&u));
            sum.iter_mut().zip(&u).for_each(|(s, v)| *s += v);
        }
        sum
    }

    /// `K_nᵀ x = Σ_{m≤n} G₀(VᵀG₀)^m x`.
    fn series_transpose(&self, x: &[f64], n_terms: usize) -> Vec<f64> {
        let mut w = x.to_vec();
        let mut acc = self.g0(&w);
        for _ in 0..n_terms {
            w = self.pert.apply_adjoint(&self.g0(&w));
            let gw = self.g0(&w);
            acc.iter_mut().zip(&gw).for_each(|(s, v)| *s += v);
        }
        acc
    }

    /// `‖(VG₀)^{m+1}‖` estimate: the exact defect `L·(−K_m) − (I−P₀)`.
    fn remainder_norm(&self, m: usize) -> f64 {
        let dim = self.grid.sites() * self.colors;
        let fwd = FnOperator::new(dim, |x: &[f64]| {
            let mut y = x.to_vec();
            for _ in 0..=m {
                y = self.pert.apply(&self.g0(&y));
            }
            y
        });
        let adj = FnOperator::new(dim, |x: &[f64]| {
            let mut y = x.to_vec();
            for _ in 0..=m {
                y = self.g0(&self.pert.apply_adjoint(&y));
            }
            y
        });
        linalg::operator_norm_estimate(&fwd, &adj, NORM_ITERATIONS, NORM_SEED)
    }
}

/// Per-order remainders of the Born series.
#[derive(Debug, Clone, PartialEq)]
pub struct BornSeriesReport {
    pub n_terms: usize,
    /// `r_m ≈ ‖L·(−K_m) − (I − P₀)‖` for `m = 0..=n_terms`.
    pub residuals: Vec<f64>,
    /// Least-squares slope of `ln r_m` over `m = 1..=n_terms`.
    pub fitted_rate: Option<f64>,
}

impl BornSeriesReport {
    /// `exp(fitted_rate)`, the geometric decay ratio.
    pub fn fitted_ratio(&self) -> Option<f64> {
        self.fitted_rate.map(f64::exp)
    }
}

/// Least-squares slope of `y` against `x`.
pub fn ls_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn check_born_inputs(sc: &StructureConstants, a: &LatticeField) -> Result<()> {
    if sc.coupling() >= 1.0 {
        return Err(YmError::domain(
            MODULE,
            format!("Born series needs g < 1, got g = {}", sc.coupling()),
        ));
    }
    // gauge and shape checks
    FaddeevPopovOperator::assemble(sc, a).map(|_| ())
}

/// `K_n f` together with the remainder report.
pub fn born_apply(
    sc: &StructureConstants,
    a: &LatticeField,
    f: &ColorScalarField,
    n_terms: usize,
) -> Result<(ColorScalarField, BornSeriesReport)> {
    check_born_inputs(sc, a)?;
    if f.grid() != a.grid() || f.colors() != a.colors() {
        return Err(YmError::shape(MODULE, "source and background shapes differ"));
    }
    let parts = BornParts::new(sc, a);
    let u = ColorScalarField::from_vec(*f.grid(), f.colors(), parts.series(f.data(), n_terms))?;
    let residuals: Vec<f64> = (0..=n_terms).map(|m| parts.remainder_norm(m)).collect();
    let fitted_rate = if n_terms >= 2 && residuals[1..].iter().all(|r| *r > 0.0) {
        let xs: Vec<f64> = (1..=n_terms).map(|m| m as f64).collect();
        let ys: Vec<f64> = residuals[1..].iter().map(|r| r.ln()).collect();
        Some(ls_slope(&xs, &ys))
    } else {
        None
    };
    Ok((
        u,
        BornSeriesReport {
            n_terms,
            residuals,
            fitted_rate,
        },
    ))
}

/// Spectral radius of `G₀V`, the asymptotic Born decay ratio.
///
/// Computed on the symmetric form `G₀^{1/2} V G₀^{1/2}`.
pub fn born_radius(sc: &StructureConstants, a: &LatticeField) -> Result<f64> {
    FaddeevPopovOperator::assemble(sc, a)?;
    let parts = BornParts::new(sc, a);
    let (grid, k) = (*a.grid(), a.colors());
    let half = |x: &[f64]| fourier_multiplier(&grid, k, x, |p2| 1.0 / p2.sqrt());
    let s = FnOperator::new(grid.sites() * k, |x: &[f64]| half(&parts.pert.apply(&half(x))));
    let (lo, hi) = linalg::lanczos_extremes(&s, 80, NORM_SEED);
    Ok(lo.abs().max(hi.abs()))
}

/// Rescale `A` so that the Born radius at coupling 1 equals 1; at coupling
/// `g` the series then decays like `gⁿ`.
pub fn normalize_born_radius(a: &LatticeField) -> Result<LatticeField> {
    let rho = born_radius(&StructureConstants::new(a.colors(), 1.0)?, a)?;
    if !(rho > 0.0) {
        return Err(YmError::numerical(MODULE, "Born radius vanishes; background is trivial"));
    }
    Ok(a.scaled(1.0 / rho))
}

/// How the kernel projector `P` is obtained.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KernelChoice {
    /// The per-color constants only.
    Constants,
    /// Iterative kernel search with the given threshold (default `1e−6‖L‖`).
    Search(Option<f64>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GreensMethod {
    Born { n_terms: usize },
    PseudoInverse,
}

#[derive(Debug, Clone)]
enum Backend {
    Born { parts: BornParts, n_terms: usize },
    Dense(DMatrix<f64>),
}

/// A modified Green's function `G` with `L∘G = I − P`.
#[derive(Debug, Clone)]
pub struct GreensOperator {
    method: GreensMethod,
    fp: FaddeevPopovOperator,
    kernel: SpectralSlice,
    backend: Backend,
}

/// Modified Green's function with the default kernel treatment: searched
/// kernel for the Born method, dense spectral threshold for the
/// pseudoinverse.
pub fn modified_green(sc: &StructureConstants, a: &LatticeField, method: GreensMethod) -> Result<GreensOperator> {
    GreensOperator::new(sc, a, method, KernelChoice::Search(None))
}

impl GreensOperator {
    pub fn new(sc: &StructureConstants, a: &LatticeField, method: GreensMethod, kernel: KernelChoice) -> Result<Self> {
        if let GreensMethod::Born { .. } = method {
            check_born_inputs(sc, a)?;
        }
        let fp = FaddeevPopovOperator::assemble(sc, a)?;
        Self::build(fp, method, kernel)
    }

    /// Build for a background that need not be transverse. `G` stays
    /// symmetric by construction; `L∘G = I − P` then holds only up to the
    /// longitudinal part of `A`.
    pub fn new_unchecked(sc: &StructureConstants, a: &LatticeField, method: GreensMethod, kernel: KernelChoice) -> Result<Self> {
        if let GreensMethod::Born { .. } = method {
            if sc.coupling() >= 1.0 {
                return Err(YmError::domain(
                    MODULE,
                    format!("Born series needs g < 1, got g = {}", sc.coupling()),
                ));
            }
        }
        let fp = FaddeevPopovOperator::assemble_unchecked(sc, a)?;
        Self::build(fp, method, kernel)
    }

    fn build(fp: FaddeevPopovOperator, method: GreensMethod, kernel: KernelChoice) -> Result<Self> {
        let grid = *fp.grid();
        let k = fp.colors();
        match method {
            GreensMethod::Born { n_terms } => {
                let kernel = match kernel {
                    KernelChoice::Constants => SpectralSlice::constants(grid, k),
                    KernelChoice::Search(tol) => {
                        let tol = tol.unwrap_or_else(|| fp.default_zero_tol());
                        fp.kernel_basis(tol)?
                    }
                };
                let parts = BornParts::new(fp.structure_constants(), fp.field());
                Ok(Self {
                    method,
                    fp,
                    kernel,
                    backend: Backend::Born {
                        parts,
                        n_terms,
                    },
                })
            }
            GreensMethod::PseudoInverse => {
                let dim = grid.sites() * k;
                if dim > DENSE_LIMIT {
                    return Err(YmError::capacity(
                        MODULE,
                        format!("pseudoinverse needs N³K ≤ {DENSE_LIMIT}, got {dim}"),
                    ));
                }
                let l = fp.to_dense()?;
                let (vals, vecs) = linalg::dense_symmetric_eigen(&l);
                let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
                let tol = match kernel {
                    KernelChoice::Search(Some(t)) => t,
                    _ => 1e-6 * scale,
                };
                let mut g = DMatrix::zeros(dim, dim);
                let mut kernel_vecs = Vec::new();
                let mut kernel_vals = Vec::new();
                for (j, &lam) in vals.iter().enumerate() {
                    let v = vecs.column(j);
                    if lam.abs() < tol {
                        kernel_vecs.push(v.iter().copied().collect::<Vec<f64>>());
                        kernel_vals.push(lam);
                    } else {
                        g += (v * v.transpose()) / lam;
                    }
                }
                let kernel = if let KernelChoice::Constants = kernel {
                    SpectralSlice::constants(grid, k)
                } else {
                    let s = 1.0 / grid.cell_volume().sqrt();
                    SpectralSlice {
                        residuals: vec![0.0; kernel_vals.len()],
                        eigenvalues: kernel_vals,
                        eigenvectors: kernel_vecs
                            .into_iter()
                            .map(|v| ColorScalarField::from_vec(grid, k, v.into_iter().map(|x| x * s).collect()).expect("shape"))
                            .collect(),
                        which: crate::faddeev_popov::SliceKind::NearZero,
                    }
                };
                Ok(Self {
                    method,
                    fp,
                    kernel,
                    backend: Backend::Dense(g),
                })
            }
        }
    }

    pub fn method(&self) -> GreensMethod {
        self.method
    }

    pub fn operator(&self) -> &FaddeevPopovOperator {
        &self.fp
    }

    pub fn kernel(&self) -> &SpectralSlice {
        &self.kernel
    }

    fn project_out(&self, f: &ColorScalarField) -> ColorScalarField {
        f.axpy(-1.0, &self.kernel.project(f))
    }

    pub fn apply(&self, f: &ColorScalarField) -> Result<ColorScalarField> {
        if f.grid() != self.fp.grid() || f.colors() != self.fp.colors() {
            return Err(YmError::shape(MODULE, "source shape does not match the Green's operator"));
        }
        let x = self.project_out(f);
        let y = match &self.backend {
            Backend::Born { parts, n_terms } => {
                let k1 = parts.series(x.data(), *n_terms);
                let k2 = parts.series_transpose(x.data(), *n_terms);
                k1.iter().zip(&k2).map(|(a, b)| -0.5 * (a + b)).collect()
            }
            Backend::Dense(g) => (g * linalg::dvector(x.data())).iter().copied().collect(),
        };
        let y = ColorScalarField::from_vec(*f.grid(), f.colors(), y)?;
        Ok(self.project_out(&y))
    }

    /// `max_f ‖L G f − (I−P) f‖ / ‖f‖` over the given probes.
    pub fn defect(&self, probes: &[ColorScalarField]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for f in probes {
            let lg = self.fp.apply(&self.apply(f)?)?;
            let d = lg.axpy(-1.0, &self.project_out(f));
            worst = worst.max(d.norm() / f.norm());
        }
        Ok(worst)
    }

    /// `max |⟨u, Gv⟩ − ⟨Gu, v⟩|` over consecutive probe pairs, relative to
    /// `‖u‖‖v‖`.
    pub fn symmetry_defect(&self, probes: &[ColorScalarField]) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for w in probes.windows(2) {
            let (u, v) = (&w[0], &w[1]);
            let d = u.dot(&self.apply(v)?) - self.apply(u)?.dot(v);
            worst = worst.max(d.abs() / (u.norm() * v.norm()));
        }
        Ok(worst)
    }
}

/// `G^{ab}(x₀, y₀)`, column `b` obtained from the source `δ_{y₀} e_b`.
pub fn green_point_kernel(g: &GreensOperator, x0: usize, y0: usize) -> Result<DMatrix<f64>> {
    let grid = *g.fp.grid();
    let k = g.fp.colors();
    if x0 >= grid.sites() || y0 >= grid.sites() {
        return Err(YmError::domain(MODULE, "site index outside the grid"));
    }
    let mut m = DMatrix::zeros(k, k);
    for b in 0..k {
        let col = g.apply(&ColorScalarField::delta(grid, k, y0, b))?;
        for a in 0..k {
            m[(a, b)] = col.get(x0, a);
        }
    }
    Ok(m)
}

/// Slow reference for `K_n f`, `n ≤ 2`: explicit site sums of the nested
/// integrals with the mode-summed periodic kernel.
pub fn born_nested_reference(
    sc: &StructureConstants,
    a: &LatticeField,
    f: &ColorScalarField,
    n_terms: usize,
) -> Result<ColorScalarField> {
    if n_terms > 2 {
        return Err(YmError::domain(MODULE, "nested reference is limited to n ≤ 2"));
    }
    let grid = *a.grid();
    let k = a.colors();
    let n = grid.n();
    let w = grid.cell_volume();
    let table: Vec<f64> = (0..grid.sites()).map(|s| free_kernel_value(&grid, grid.site_coords(s))).collect();
    let conv = |u: &[f64]| -> Vec<f64> {
        let mut out = vec![0.0; u.len()];
        for x in 0..grid.sites() {
            let cx = grid.site_coords(x);
            for y in 0..grid.sites() {
                let cy = grid.site_coords(y);
                let r = [(cx[0] + n - cy[0]) % n, (cx[1] + n - cy[1]) % n, (cx[2] + n - cy[2]) % n];
                let kv = table[grid.site_index(r)] * w;
                for c in 0..k {
                    out[x * k + c] += kv * u[y * k + c];
                }
            }
        }
        out
    };
    let pert = Perturbation::new(sc, a);
    let mut term = conv(f.data());
    let mut sum = term.clone();
    for _ in 0..n_terms {
        term = conv(&pert.apply(&term));
        sum.iter_mut().zip(&term).for_each(|(s, v)| *s += v);
    }
    ColorScalarField::from_vec(grid, k, sum)
}

//! The Faddeev–Popov operator `L^{ab} = δ^{ab}Δ + g ε^{acb} A_k^c ∂_k`
//! acting on color-scalar lattice functions, with its low spectrum and
//! kernel.
//!
//! The first-order term is evaluated with a 2× zero-padded product: `A_k^c`
//! and `∂_k f^b` are interpolated onto the doubled grid, multiplied there,
//! and low-pass truncated back. Products of three such band-limited factors
//! are integrated exactly by the doubled-grid sum, so summation by parts
//! holds to rounding and `L` is symmetric whenever `∂_k A_k = 0`.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::algebra::{StructureConstants, EPS_TRIPLES};
use crate::error::{Result, YmError};
use crate::lattice::{coulomb_residual, laplacian_values, ColorScalarField, Grid, LatticeField};
use crate::linalg::{self, LinearOperator, SubspaceOptions};
use crate::spectral::{self, Dealiaser};

const MODULE: &str = "faddeev_popov";

/// Largest admissible Coulomb residual of the background field.
pub const GAUGE_TOL: f64 = 1e-8;
/// Residual bound `‖Lψ − λψ‖` for unit eigenvectors.
pub const EIG_TOL: f64 = 1e-8;
/// Largest `N³K` for which dense materialization is allowed.
pub const DENSE_LIMIT: usize = 4096;

/// The first-order part `(Vf)^a = g ε^{acb} A_k^c ∂_k f^b`.
#[derive(Debug, Clone)]
pub(crate) struct Perturbation {
    grid: Grid,
    colors: usize,
    coupling: f64,
    dealias: std::sync::Arc<Dealiaser>,
    /// `padded[c * 3 + k]`: `A_k^c` on the doubled grid.
    padded: Vec<Vec<f64>>,
}

impl Perturbation {
    pub(crate) fn new(sc: &StructureConstants, a: &LatticeField) -> Self {
        let grid = *a.grid();
        let n = grid.n();
        let d = Dealiaser::new(n);
        let mut padded = Vec::with_capacity(a.colors() * 3);
        for c in 0..a.colors() {
            for k in 0..3 {
                padded.push(d.pad(&spectral::forward(&a.component(c, k), n)));
            }
        }
        Self {
            grid,
            colors: a.colors(),
            coupling: sc.coupling(),
            dealias: std::sync::Arc::new(d),
            padded,
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.grid.sites() * self.colors
    }

    fn split(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let k = self.colors;
        (0..k).map(|a| x.iter().skip(a).step_by(k).copied().collect()).collect()
    }

    fn merge(&self, comps: &[Vec<f64>]) -> Vec<f64> {
        let k = self.colors;
        let mut out = vec![0.0; self.dim()];
        for (a, comp) in comps.iter().enumerate() {
            for (s, v) in comp.iter().enumerate() {
                out[s * k + a] = *v;
            }
        }
        out
    }

    pub(crate) fn apply(&self, x: &[f64]) -> Vec<f64> {
        let g = self.coupling;
        if g == 0.0 {
            return vec![0.0; self.dim()];
        }
        let n = self.grid.n();
        let d = &*self.dealias;
        let comps = self.split(x);
        // padded ∂_k f^b
        let mut dpad: Vec<Vec<f64>> = Vec::with_capacity(self.colors * 3);
        for comp in &comps {
            let spec = spectral::forward(comp, n);
            for k in 0..3 {
                let ds: Vec<Complex64> = spec
                    .iter()
                    .enumerate()
                    .map(|(m, c)| c * Complex64::new(0.0, self.grid.derivative_wavevector(m)[k]))
                    .collect();
                dpad.push(d.pad(&ds));
            }
        }
        let fine_len = dpad[0].len();
        let mut out = vec![vec![0.0; self.grid.sites()]; self.colors];
        for (a, out_a) in out.iter_mut().enumerate() {
            let mut acc = vec![0.0; fine_len];
            for (ta, c, b, sign) in EPS_TRIPLES {
                if ta != a {
                    continue;
                }
                let s = g * sign;
                for k in 0..3 {
                    let pa = &self.padded[c * 3 + k];
                    let pd = &dpad[b * 3 + k];
                    for q in 0..fine_len {
                        acc[q] += s * pa[q] * pd[q];
                    }
                }
            }
            *out_a = spectral::inverse_real(d.truncate(&acc), n);
        }
        self.merge(&out)
    }

    /// Euclidean adjoint: `(Vᵀu)^b = −g ε^{acb} ∂_k(A_k^c u^a)`, same product rule.
    pub(crate) fn apply_adjoint(&self, x: &[f64]) -> Vec<f64> {
        let g = self.coupling;
        if g == 0.0 {
            return vec![0.0; self.dim()];
        }
        let n = self.grid.n();
        let d = &*self.dealias;
        let upad: Vec<Vec<f64>> = self
            .split(x)
            .iter()
            .map(|c| d.pad(&spectral::forward(c, n)))
            .collect();
        let fine_len = upad[0].len();
        let mut out = vec![vec![0.0; self.grid.sites()]; self.colors];
        for (b, out_b) in out.iter_mut().enumerate() {
            let mut total = vec![Complex64::new(0.0, 0.0); self.grid.sites()];
            for k in 0..3 {
                let mut acc = vec![0.0; fine_len];
                for (a, c, tb, sign) in EPS_TRIPLES {
                    if tb != b {
                        continue;
                    }
                    let s = g * sign;
                    let pa = &self.padded[c * 3 + k];
                    let pu = &upad[a];
                    for q in 0..fine_len {
                        acc[q] += s * pa[q] * pu[q];
                    }
                }
                let spec = d.truncate(&acc);
                for (m, v) in spec.into_iter().enumerate() {
                    total[m] -= v * Complex64::new(0.0, self.grid.derivative_wavevector(m)[k]);
                }
            }
            *out_b = spectral::inverse_real(total, n);
        }
        self.merge(&out)
    }
}

/// `L = Δ + V` for a fixed background `A`.
#[derive(Debug, Clone)]
pub struct FaddeevPopovOperator {
    sc: StructureConstants,
    field: LatticeField,
    pert: Perturbation,
}

impl FaddeevPopovOperator {
    /// Assemble for a transverse background; fails with a gauge error when
    /// `coulomb_residual(A) ≥ GAUGE_TOL`.
    pub fn assemble(sc: &StructureConstants, a: &LatticeField) -> Result<Self> {
        let residual = coulomb_residual(a);
        if !(residual < GAUGE_TOL) {
            return Err(YmError::Gauge {
                module: MODULE,
                residual,
                tolerance: GAUGE_TOL,
            });
        }
        Self::assemble_unchecked(sc, a)
    }

    /// Assemble without the Coulomb-gauge check. The result is not
    /// symmetric for longitudinal backgrounds.
    pub fn assemble_unchecked(sc: &StructureConstants, a: &LatticeField) -> Result<Self> {
        if a.colors() != sc.colors() {
            return Err(YmError::shape(
                MODULE,
                format!("field has {} colors, algebra has {}", a.colors(), sc.colors()),
            ));
        }
        if !a.is_finite() {
            return Err(YmError::domain(MODULE, "background field is not finite"));
        }
        Ok(Self {
            sc: *sc,
            field: a.clone(),
            pert: Perturbation::new(sc, a),
        })
    }

    pub fn structure_constants(&self) -> &StructureConstants {
        &self.sc
    }

    pub fn field(&self) -> &LatticeField {
        &self.field
    }

    pub fn grid(&self) -> &Grid {
        self.field.grid()
    }

    pub fn colors(&self) -> usize {
        self.field.colors()
    }


    fn check(&self, f: &ColorScalarField) -> Result<()> {
        if f.grid() != self.grid() || f.colors() != self.colors() {
            return Err(YmError::domain(MODULE, "input field shape does not match the operator"));
        }
        Ok(())
    }

    fn laplacian_raw(&self, x: &[f64]) -> Vec<f64> {
        let k = self.colors();
        let grid = *self.grid();
        let mut out = vec![0.0; x.len()];
        for a in 0..k {
            let comp: Vec<f64> = x.iter().skip(a).step_by(k).copied().collect();
            for (s, v) in laplacian_values(&grid, &comp).into_iter().enumerate() {
                out[s * k + a] = v;
            }
        }
        out
    }

    pub fn apply(&self, f: &ColorScalarField) -> Result<ColorScalarField> {
        self.check(f)?;
        ColorScalarField::from_vec(*self.grid(), self.colors(), self.apply_vec(f.data()))
    }

    pub fn apply_adjoint(&self, f: &ColorScalarField) -> Result<ColorScalarField> {
        self.check(f)?;
        let mut y = self.laplacian_raw(f.data());
        let v = self.pert.apply_adjoint(f.data());
        y.iter_mut().zip(&v).for_each(|(a, b)| *a += b);
        ColorScalarField::from_vec(*self.grid(), self.colors(), y)
    }

    /// Dense matrix in storage coordinates.
    pub fn to_dense(&self) -> Result<DMatrix<f64>> {
        let dim = self.dim();
        if dim > DENSE_LIMIT {
            return Err(YmError::capacity(
                MODULE,
                format!("dense materialization needs N³K ≤ {DENSE_LIMIT}, got {dim}"),
            ));
        }
        Ok(linalg::to_dense(self))
    }

    /// Estimate of `‖L‖₂` from a Lanczos run.
    pub fn norm_estimate(&self) -> f64 {
        let (lo, hi) = linalg::lanczos_extremes(self, 40, 0x4e4f524d);
        lo.abs().max(hi.abs())
    }

    /// Default kernel threshold `1e−6·‖L‖_est`.
    pub fn default_zero_tol(&self) -> f64 {
        1e-6 * self.norm_estimate()
    }

    /// The `m` eigenpairs nearest zero, ascending.
    pub fn low_spectrum(&self, m: usize) -> Result<SpectralSlice> {
        self.low_spectrum_with(m, EIG_TOL)
    }

    fn low_spectrum_with(&self, m: usize, tol: f64) -> Result<SpectralSlice> {
        if m > self.dim() {
            return Err(YmError::domain(MODULE, format!("m = {m} exceeds N³K = {}", self.dim())));
        }
        let opts = SubspaceOptions {
            shift: 1e-3 * self.grid().first_gap(),
            tol,
            ..SubspaceOptions::default()
        };
        let pairs = linalg::eigs_nearest_zero(self, m, &opts)?;
        Ok(SpectralSlice::from_raw(
            *self.grid(),
            self.colors(),
            pairs.values,
            pairs.vectors,
            pairs.residuals,
            SliceKind::LowestM,
        ))
    }

    /// Orthonormal eigenvectors with `|λ| < zero_tol`.
    pub fn kernel_basis(&self, zero_tol: f64) -> Result<SpectralSlice> {
        let mut m = (self.colors() + 3).min(self.dim());
        loop {
            let slice = self.low_spectrum(m)?;
            let inside = slice.eigenvalues.iter().filter(|v| v.abs() < zero_tol).count();
            if inside < m || m == self.dim() {
                let keep: Vec<usize> = (0..m).filter(|&j| slice.eigenvalues[j].abs() < zero_tol).collect();
                return Ok(SpectralSlice {
                    eigenvalues: keep.iter().map(|&j| slice.eigenvalues[j]).collect(),
                    eigenvectors: keep.iter().map(|&j| slice.eigenvectors[j].clone()).collect(),
                    residuals: keep.iter().map(|&j| slice.residuals[j]).collect(),
                    which: SliceKind::NearZero,
                });
            }
            m = (2 * m).min(self.dim());
        }
    }
}

impl LinearOperator for FaddeevPopovOperator {
    fn dim(&self) -> usize {
        self.grid().sites() * self.colors()
    }

    fn apply_to(&self, x: &[f64], y: &mut [f64]) {
        let lap = self.laplacian_raw(x);
        let v = self.pert.apply(x);
        for k in 0..y.len() {
            y[k] = lap[k] + v[k];
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SliceKind {
    LowestM,
    NearZero,
}

/// Eigenpairs of `L`, eigenvectors orthonormal under the lattice `L²` pairing.
#[derive(Debug, Clone)]
pub struct SpectralSlice {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: Vec<ColorScalarField>,
    /// `‖Lψ − λψ‖ / ‖ψ‖` per pair.
    pub residuals: Vec<f64>,
    pub which: SliceKind,
}

impl SpectralSlice {
    fn from_raw(grid: Grid, colors: usize, values: Vec<f64>, vectors: Vec<Vec<f64>>, residuals: Vec<f64>, which: SliceKind) -> Self {
        let s = 1.0 / grid.cell_volume().sqrt();
        let eigenvectors = vectors
            .into_iter()
            .map(|v| ColorScalarField::from_vec(grid, colors, v.into_iter().map(|x| x * s).collect()).expect("shape"))
            .collect();
        Self {
            eigenvalues: values,
            eigenvectors,
            residuals,
            which,
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    /// `max |⟨ψ_i, ψ_j⟩ − δ_ij|`.
    pub fn gram_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, u) in self.eigenvectors.iter().enumerate() {
            for (j, v) in self.eigenvectors.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((u.dot(v) - want).abs());
            }
        }
        worst
    }

    /// `P f = Σ ψ ⟨ψ, f⟩`.
    pub fn project(&self, f: &ColorScalarField) -> ColorScalarField {
        let mut out = ColorScalarField::zeros(*f.grid(), f.colors());
        for psi in &self.eigenvectors {
            out.add_assign_scaled(psi.dot(f), psi);
        }
        out
    }

    /// Orthonormal basis of the per-color constants.
    pub fn constants(grid: Grid, colors: usize) -> Self {
        let c = 1.0 / grid.volume().sqrt();
        Self {
            eigenvalues: vec![0.0; colors],
            eigenvectors: (0..colors)
                .map(|a| ColorScalarField::from_fn(grid, colors, |_, b| if a == b { c } else { 0.0 }))
                .collect(),
            residuals: vec![0.0; colors],
            which: SliceKind::NearZero,
        }
    }
}

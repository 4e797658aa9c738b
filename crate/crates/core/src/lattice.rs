//! Periodic `N³` spatial grid, lattice fields, spectral derivatives, the
//! transverse projector and Coulomb-gauge diagnostics.
//!
//! Wave vectors are `p_j = 2π m_j / L_box` with `m_j ∈ (−N/2, N/2]`.
//! First derivatives use the multiplier `i p_j` with the Nyquist component
//! set to zero (so real fields stay real); the Laplacian uses `−|p|²`
//! including Nyquist. The transverse projector is built from the same
//! first-derivative wave vector, which makes `div ∘ T = 0` exact.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Result, YmError};
use crate::spectral::{self, is_nyquist, mode_triple, signed_mode};

const MODULE: &str = "lattice";

/// Periodic cubic grid with `n` sites per edge and box length `l_box`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    n: usize,
    l_box: f64,
}

impl Grid {
    pub fn new(n: usize, l_box: f64) -> Result<Self> {
        if n < 4 || n % 2 != 0 {
            return Err(YmError::domain(
                MODULE,
                format!("grid size must be even and at least 4, got {n}"),
            ));
        }
        if !(l_box.is_finite() && l_box > 0.0) {
            return Err(YmError::domain(
                MODULE,
                format!("box length must be positive, got {l_box}"),
            ));
        }
        Ok(Self { n, l_box })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l_box(&self) -> f64 {
        self.l_box
    }

    pub fn spacing(&self) -> f64 {
        self.l_box / self.n as f64
    }

    /// Quadrature weight `spacing³`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(3)
    }

    pub fn volume(&self) -> f64 {
        self.l_box.powi(3)
    }

    pub fn sites(&self) -> usize {
        self.n * self.n * self.n
    }

    pub fn site_index(&self, x: [usize; 3]) -> usize {
        let n = self.n;
        ((x[0] % n) * n + (x[1] % n)) * n + (x[2] % n)
    }

    pub fn site_coords(&self, site: usize) -> [usize; 3] {
        mode_triple(site, self.n)
    }

    pub fn position(&self, site: usize) -> [f64; 3] {
        let c = self.site_coords(site);
        let h = self.spacing();
        [c[0] as f64 * h, c[1] as f64 * h, c[2] as f64 * h]
    }

    /// Fundamental wavenumber `2π / L_box`.
    pub fn dk(&self) -> f64 {
        2.0 * PI / self.l_box
    }

    /// Wave vector used for first derivatives (Nyquist components zeroed).
    pub fn derivative_wavevector(&self, mode: usize) -> [f64; 3] {
        let t = mode_triple(mode, self.n);
        let dk = self.dk();
        let mut p = [0.0; 3];
        for j in 0..3 {
            if !is_nyquist(t[j], self.n) {
                p[j] = dk * signed_mode(t[j], self.n) as f64;
            }
        }
        p
    }

    /// `|p|²` of the Laplacian symbol `−|p|²`, Nyquist included.
    pub fn laplacian_eigen(&self, mode: usize) -> f64 {
        let t = mode_triple(mode, self.n);
        let dk = self.dk();
        t.iter()
            .map(|&k| {
                let p = dk * signed_mode(k, self.n) as f64;
                p * p
            })
            .sum()
    }

    /// Integer wave indices of a flattened mode.
    pub fn mode_numbers(&self, mode: usize) -> [i64; 3] {
        let t = mode_triple(mode, self.n);
        [
            signed_mode(t[0], self.n),
            signed_mode(t[1], self.n),
            signed_mode(t[2], self.n),
        ]
    }

    /// Smallest non-zero `|p|²`, the first Laplacian gap.
    pub fn first_gap(&self) -> f64 {
        self.dk() * self.dk()
    }
}

/// Role of a vector-valued lattice field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum FieldKind {
    Potential = 0,
    Momentum = 1,
    Auxiliary = 2,
}

impl FieldKind {
    pub fn from_u8(v: u8) -> Option<Self> {
        match v {
            0 => Some(FieldKind::Potential),
            1 => Some(FieldKind::Momentum),
            2 => Some(FieldKind::Auxiliary),
            _ => None,
        }
    }
}

/// Real field `v_i^a(x)`: site-major, then color, then direction.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeField {
    grid: Grid,
    colors: usize,
    kind: FieldKind,
    data: Vec<f64>,
}

impl LatticeField {
    pub fn zeros(grid: Grid, colors: usize, kind: FieldKind) -> Self {
        Self {
            grid,
            colors,
            kind,
            data: vec![0.0; grid.sites() * colors * 3],
        }
    }

    pub fn from_vec(grid: Grid, colors: usize, kind: FieldKind, data: Vec<f64>) -> Result<Self> {
        let want = grid.sites() * colors * 3;
        if data.len() != want {
            return Err(YmError::shape(
                MODULE,
                format!("lattice field needs {want} entries, got {}", data.len()),
            ));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(YmError::domain(MODULE, "lattice field has non-finite entries"));
        }
        Ok(Self {
            grid,
            colors,
            kind,
            data,
        })
    }

    /// Build from a closure `(site, color, direction) -> value`.
    pub fn from_fn(
        grid: Grid,
        colors: usize,
        kind: FieldKind,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut out = Self::zeros(grid, colors, kind);
        for s in 0..grid.sites() {
            for a in 0..colors {
                for i in 0..3 {
                    out.data[(s * colors + a) * 3 + i] = f(s, a, i);
                }
            }
        }
        out
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn colors(&self) -> usize {
        self.colors
    }

    pub fn kind(&self) -> FieldKind {
        self.kind
    }

    pub fn with_kind(mut self, kind: FieldKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn slot(&self, site: usize, color: usize, dir: usize) -> usize {
        (site * self.colors + color) * 3 + dir
    }

    #[inline]
    pub fn get(&self, site: usize, color: usize, dir: usize) -> f64 {
        self.data[self.slot(site, color, dir)]
    }

    #[inline]
    pub fn set(&mut self, site: usize, color: usize, dir: usize, v: f64) {
        let k = self.slot(site, color, dir);
        self.data[k] = v;
    }

    /// Contiguous copy of the `(color, dir)` component over all sites.
    pub fn component(&self, color: usize, dir: usize) -> Vec<f64> {
        (0..self.grid.sites()).map(|s| self.get(s, color, dir)).collect()
    }

    pub fn set_component(&mut self, color: usize, dir: usize, values: &[f64]) {
        for (s, v) in values.iter().enumerate() {
            self.set(s, color, dir, *v);
        }
    }

    pub fn same_shape(&self, other: &LatticeField) -> bool {
        self.grid == other.grid && self.colors == other.colors
    }

    pub fn check_shape(&self, other: &LatticeField) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(YmError::shape(
                MODULE,
                "lattice fields live on different grids or color counts",
            ))
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= s);
        out
    }

    /// `self + s·other`
    pub fn axpy(&self, s: f64, other: &LatticeField) -> Self {
        let mut out = self.clone();
        out.data
            .iter_mut()
            .zip(&other.data)
            .for_each(|(a, b)| *a += s * b);
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `√⟨v,v⟩` with the lattice quadrature weight.
    pub fn norm(&self) -> f64 {
        (self.data.iter().map(|v| v * v).sum::<f64>() * self.grid.cell_volume()).sqrt()
    }
}

/// Real color-vector field `f^a(x)`: site-major, then color.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorScalarField {
    grid: Grid,
    colors: usize,
    data: Vec<f64>,
}

impl ColorScalarField {
    pub fn zeros(grid: Grid, colors: usize) -> Self {
        Self {
            grid,
            colors,
            data: vec![0.0; grid.sites() * colors],
        }
    }

    pub fn from_vec(grid: Grid, colors: usize, data: Vec<f64>) -> Result<Self> {
        let want = grid.sites() * colors;
        if data.len() != want {
            return Err(YmError::shape(
                MODULE,
                format!("color scalar field needs {want} entries, got {}", data.len()),
            ));
        }
        Ok(Self { grid, colors, data })
    }

    pub fn from_fn(grid: Grid, colors: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut out = Self::zeros(grid, colors);
        for s in 0..grid.sites() {
            for a in 0..colors {
                out.data[s * colors + a] = f(s, a);
            }
        }
        out
    }

    /// Lattice delta at `site` in color `color`, normalized so that
    /// `⟨δ, f⟩ = f(site)`.
    pub fn delta(grid: Grid, colors: usize, site: usize, color: usize) -> Self {
        let mut out = Self::zeros(grid, colors);
        out.data[site * colors + color] = 1.0 / grid.cell_volume();
        out
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn colors(&self) -> usize {
        self.colors
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, site: usize, color: usize) -> f64 {
        self.data[site * self.colors + color]
    }

    #[inline]
    pub fn set(&mut self, site: usize, color: usize, v: f64) {
        self.data[site * self.colors + color] = v;
    }

    pub fn component(&self, color: usize) -> Vec<f64> {
        (0..self.grid.sites()).map(|s| self.get(s, color)).collect()
    }

    pub fn set_component(&mut self, color: usize, values: &[f64]) {
        for (s, v) in values.iter().enumerate() {
            self.set(s, color, *v);
        }
    }

    pub fn same_shape(&self, other: &ColorScalarField) -> bool {
        self.grid == other.grid && self.colors == other.colors
    }

    pub fn check_shape(&self, other: &ColorScalarField) -> Result<()> {
        if self.same_shape(other) {
            Ok(())
        } else {
            Err(YmError::shape(
                MODULE,
                "color scalar fields live on different grids or color counts",
            ))
        }
    }

    pub fn scaled(&self, s: f64) -> Self {
        let mut out = self.clone();
        out.data.iter_mut().for_each(|v| *v *= s);
        out
    }

    pub fn axpy(&self, s: f64, other: &ColorScalarField) -> Self {
        let mut out = self.clone();
        out.data
            .iter_mut()
            .zip(&other.data)
            .for_each(|(a, b)| *a += s * b);
        out
    }

    pub fn add_assign_scaled(&mut self, s: f64, other: &ColorScalarField) {
        self.data
            .iter_mut()
            .zip(&other.data)
            .for_each(|(a, b)| *a += s * b);
    }

    pub fn dot(&self, other: &ColorScalarField) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum::<f64>()
            * self.grid.cell_volume()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Per-color spatial mean.
    pub fn color_means(&self) -> Vec<f64> {
        let sites = self.grid.sites() as f64;
        (0..self.colors)
            .map(|a| self.component(a).iter().sum::<f64>() / sites)
            .collect()
    }
}

/// Either kind of lattice field, for operations defined on both.
pub trait SpectralField: Sized + Clone {
    fn grid_ref(&self) -> &Grid;
    fn component_count(&self) -> usize;
    fn component_values(&self, c: usize) -> Vec<f64>;
    fn set_component_values(&mut self, c: usize, values: &[f64]);
    fn all_finite(&self) -> bool;
}

impl SpectralField for ColorScalarField {
    fn grid_ref(&self) -> &Grid {
        &self.grid
    }
    fn component_count(&self) -> usize {
        self.colors
    }
    fn component_values(&self, c: usize) -> Vec<f64> {
        self.component(c)
    }
    fn set_component_values(&mut self, c: usize, values: &[f64]) {
        self.set_component(c, values)
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

impl SpectralField for LatticeField {
    fn grid_ref(&self) -> &Grid {
        &self.grid
    }
    fn component_count(&self) -> usize {
        self.colors * 3
    }
    fn component_values(&self, c: usize) -> Vec<f64> {
        self.component(c / 3, c % 3)
    }
    fn set_component_values(&mut self, c: usize, values: &[f64]) {
        self.set_component(c / 3, c % 3, values)
    }
    fn all_finite(&self) -> bool {
        self.is_finite()
    }
}

/// `∂_j` of a single scalar array via the spectral multiplier `i p_j`.
pub(crate) fn derivative_values(grid: &Grid, values: &[f64], dir: usize) -> Vec<f64> {
    let n = grid.n();
    let mut spec = spectral::forward(values, n);
    for (m, c) in spec.iter_mut().enumerate() {
        let p = grid.derivative_wavevector(m)[dir];
        *c *= Complex64::new(0.0, p);
    }
    spectral::inverse_real(spec, n)
}

/// `∂_j` of every component of a field.
pub fn spectral_derivative<F: SpectralField>(field: &F, dir: usize) -> Result<F> {
    if dir >= 3 {
        return Err(YmError::domain(MODULE, format!("direction {dir} outside 0..3")));
    }
    if !field.all_finite() {
        return Err(YmError::domain(MODULE, "spectral_derivative: non-finite input"));
    }
    let grid = *field.grid_ref();
    let mut out = field.clone();
    for c in 0..field.component_count() {
        let d = derivative_values(&grid, &field.component_values(c), dir);
        out.set_component_values(c, &d);
    }
    Ok(out)
}

/// Spectral Laplacian `−|p|²` of a scalar array.
pub(crate) fn laplacian_values(grid: &Grid, values: &[f64]) -> Vec<f64> {
    let n = grid.n();
    let mut spec = spectral::forward(values, n);
    for (m, c) in spec.iter_mut().enumerate() {
        *c *= -grid.laplacian_eigen(m);
    }
    spectral::inverse_real(spec, n)
}

pub fn laplacian(f: &ColorScalarField) -> ColorScalarField {
    let mut out = f.clone();
    for a in 0..f.colors() {
        out.set_component(a, &laplacian_values(f.grid(), &f.component(a)));
    }
    out
}

/// `(Tv)_i = F⁻¹[(δ_ij − p_i p_j/|p|²) F v_j]`, identity on `p = 0`.
pub fn transverse_project(v: &LatticeField) -> LatticeField {
    let grid = *v.grid();
    let n = grid.n();
    let mut out = v.clone();
    for a in 0..v.colors() {
        let mut specs: Vec<Vec<Complex64>> =
            (0..3).map(|i| spectral::forward(&v.component(a, i), n)).collect();
        for m in 0..grid.sites() {
            let p = grid.derivative_wavevector(m);
            let p2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
            if p2 == 0.0 {
                continue;
            }
            let pv = p[0] * specs[0][m] + p[1] * specs[1][m] + p[2] * specs[2][m];
            for (i, spec) in specs.iter_mut().enumerate() {
                spec[m] -= pv * (p[i] / p2);
            }
        }
        for (i, spec) in specs.into_iter().enumerate() {
            out.set_component(a, i, &spectral::inverse_real(spec, n));
        }
    }
    out
}

/// `Σ_j ∂_j v_j^a` as a color scalar field.
pub fn divergence(v: &LatticeField) -> ColorScalarField {
    let grid = *v.grid();
    let n = grid.n();
    let mut out = ColorScalarField::zeros(grid, v.colors());
    for a in 0..v.colors() {
        let mut acc = vec![Complex64::new(0.0, 0.0); grid.sites()];
        for i in 0..3 {
            let spec = spectral::forward(&v.component(a, i), n);
            for (m, c) in spec.into_iter().enumerate() {
                acc[m] += c * Complex64::new(0.0, grid.derivative_wavevector(m)[i]);
            }
        }
        out.set_component(a, &spectral::inverse_real(acc, n));
    }
    out
}

/// `max_{x,a} |∂_j A_j^a(x)|`.
pub fn coulomb_residual(a: &LatticeField) -> f64 {
    divergence(a).max_abs()
}

/// Discrete `L²` pairing `Σ u·v · spacing³`.
pub fn l2_inner(u: &LatticeField, v: &LatticeField) -> Result<f64> {
    u.check_shape(v)?;
    Ok(u.data().iter().zip(v.data()).map(|(a, b)| a * b).sum::<f64>() * u.grid().cell_volume())
}

/// Curl of color component `a`: `(∇×A^a)_i = ε_ijk ∂_j A_k^a`.
pub fn curl(v: &LatticeField) -> LatticeField {
    let grid = *v.grid();
    let mut out = LatticeField::zeros(grid, v.colors(), v.kind());
    for a in 0..v.colors() {
        // d[j][k] = ∂_j A_k
        let mut d = vec![vec![Vec::new(); 3]; 3];
        for (j, row) in d.iter_mut().enumerate() {
            for (k, slot) in row.iter_mut().enumerate() {
                if j != k {
                    *slot = derivative_values(&grid, &v.component(a, k), j);
                }
            }
        }
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let c: Vec<f64> = d[j][k].iter().zip(&d[k][j]).map(|(x, y)| x - y).collect();
            out.set_component(a, i, &c);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pseudo(seed: u64, len: usize) -> Vec<f64> {
        // small LCG so lattice tests don't depend on the random module
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (0..len)
            .map(|_| {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
            })
            .collect()
    }

    fn random_field(grid: Grid, seed: u64) -> LatticeField {
        LatticeField::from_vec(grid, 3, FieldKind::Potential, pseudo(seed, grid.sites() * 9)).unwrap()
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(3, 1.0).is_err());
        assert!(Grid::new(2, 1.0).is_err());
        assert!(Grid::new(6, 0.0).is_err());
        let g = Grid::new(8, 2.0).unwrap();
        assert_eq!(g.spacing(), 0.25);
        assert_eq!(g.site_coords(g.site_index([1, 2, 3])), [1, 2, 3]);
    }

    #[test]
    fn derivative_of_sine_mode_is_exact() {
        let grid = Grid::new(8, 3.0).unwrap();
        let k = 2.0 * PI / grid.l_box();
        let f = ColorScalarField::from_fn(grid, 3, |s, _| (k * grid.position(s)[0]).sin());
        let d = spectral_derivative(&f, 0).unwrap();
        for s in 0..grid.sites() {
            let want = k * (k * grid.position(s)[0]).cos();
            for a in 0..3 {
                assert!((d.get(s, a) - want).abs() < 1e-12);
            }
        }
        let d1 = spectral_derivative(&f, 1).unwrap();
        assert!(d1.max_abs() < 1e-12);
    }

    #[test]
    fn derivative_of_constant_vanishes_and_rejects_nan() {
        let grid = Grid::new(4, 1.0).unwrap();
        let f = ColorScalarField::from_fn(grid, 3, |_, a| a as f64 + 0.5);
        assert!(spectral_derivative(&f, 2).unwrap().max_abs() < 1e-13);
        let mut bad = f.clone();
        bad.set(0, 0, f64::NAN);
        assert!(spectral_derivative(&bad, 0).is_err());
    }

    #[test]
    fn mixed_derivatives_commute() {
        let grid = Grid::new(6, 2.0).unwrap();
        let f = ColorScalarField::from_vec(grid, 3, pseudo(7, grid.sites() * 3)).unwrap();
        let d12 = spectral_derivative(&spectral_derivative(&f, 0).unwrap(), 1).unwrap();
        let d21 = spectral_derivative(&spectral_derivative(&f, 1).unwrap(), 0).unwrap();
        assert!(d12.axpy(-1.0, &d21).max_abs() < 1e-12);
    }

    #[test]
    fn projector_kills_gradients() {
        let grid = Grid::new(6, 2.0).unwrap();
        let phi = ColorScalarField::from_vec(grid, 3, pseudo(3, grid.sites() * 3)).unwrap();
        let mut v = LatticeField::zeros(grid, 3, FieldKind::Potential);
        for i in 0..3 {
            let d = spectral_derivative(&phi, i).unwrap();
            for a in 0..3 {
                v.set_component(a, i, &d.component(a));
            }
        }
        assert!(transverse_project(&v).max_abs() < 1e-12);
    }

    #[test]
    fn projector_fixes_curls_and_is_idempotent() {
        let grid = Grid::new(6, 2.0).unwrap();
        let w = curl(&random_field(grid, 11));
        let tw = transverse_project(&w);
        assert!(tw.axpy(-1.0, &w).max_abs() < 1e-12);
        let v = random_field(grid, 12);
        let t1 = transverse_project(&v);
        let t2 = transverse_project(&t1);
        assert!(t2.axpy(-1.0, &t1).max_abs() < 1e-12);
        assert!(coulomb_residual(&t1) < 1e-10);
    }

    #[test]
    fn coulomb_residual_examples() {
        let grid = Grid::new(4, 2.0 * PI).unwrap();
        assert_eq!(coulomb_residual(&LatticeField::zeros(grid, 3, FieldKind::Potential)), 0.0);
        // A_1 = cos(x_1): divergence −sin(x_1), max 1 on the grid
        let a = LatticeField::from_fn(grid, 3, FieldKind::Potential, |s, _, i| {
            if i == 0 {
                grid.position(s)[0].cos()
            } else {
                0.0
            }
        });
        let r = coulomb_residual(&a);
        assert!(r > 0.1);
        assert!((r - 1.0).abs() < 1e-12);
    }

    #[test]
    fn l2_inner_examples() {
        let grid = Grid::new(4, 1.5).unwrap();
        let ones = LatticeField::from_fn(grid, 3, FieldKind::Potential, |_, _, _| 1.0);
        let v = l2_inner(&ones, &ones).unwrap();
        assert!((v - 9.0 * 1.5f64.powi(3)).abs() < 1e-12);
        let u = LatticeField::from_fn(grid, 3, FieldKind::Potential, |s, _, _| if s < 10 { 1.0 } else { 0.0 });
        let w = LatticeField::from_fn(grid, 3, FieldKind::Potential, |s, _, _| if s >= 10 { 2.0 } else { 0.0 });
        assert_eq!(l2_inner(&u, &w).unwrap(), 0.0);
        let a = random_field(grid, 1);
        let b = random_field(grid, 2);
        assert_eq!(l2_inner(&a, &b).unwrap(), l2_inner(&b, &a).unwrap());
        let other = LatticeField::zeros(Grid::new(6, 1.5).unwrap(), 3, FieldKind::Potential);
        assert!(l2_inner(&a, &other).is_err());
    }
}

//! Levi-Civita symbol, su(2)-type structure constants `C^c_{ab} = g ε^c_{ab}`,
//! the induced commutator on color vectors, and the spinor map
//! `SL(2,C) -> SO⁺(1,3)`.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;

use crate::error::{Result, YmError};

const MODULE: &str = "algebra";

/// Number of colors for the only algebra the workbench supports.
pub const SU2_COLORS: usize = 3;

/// Levi-Civita symbol with 1-based indices in `{1,2,3}`.
pub fn levi_civita(a: usize, b: usize, c: usize) -> Result<i8> {
    for idx in [a, b, c] {
        if !(1..=3).contains(&idx) {
            return Err(YmError::domain(
                MODULE,
                format!("levi_civita index {idx} outside 1..=3"),
            ));
        }
    }
    Ok(eps_sign(a - 1, b - 1, c - 1))
}

/// Zero-based sign of the permutation `(0,1,2) -> (a,b,c)`, or 0 on repetition.
#[inline]
pub(crate) fn eps_sign(a: usize, b: usize, c: usize) -> i8 {
    if a == b || b == c || a == c {
        return 0;
    }
    // (a,b,c) is a permutation of (0,1,2): even iff it is a cyclic shift.
    if (b + 3 - a) % 3 == 1 {
        1
    } else {
        -1
    }
}

/// Zero-based Levi-Civita symbol as a float, for contractions.
#[inline]
pub fn eps(a: usize, b: usize, c: usize) -> f64 {
    f64::from(eps_sign(a, b, c))
}

/// All index triples `(a, b, c)` with non-zero ε, paired with the sign.
pub(crate) const EPS_TRIPLES: [(usize, usize, usize, f64); 6] = [
    (0, 1, 2, 1.0),
    (1, 2, 0, 1.0),
    (2, 0, 1, 1.0),
    (0, 2, 1, -1.0),
    (2, 1, 0, -1.0),
    (1, 0, 2, -1.0),
];

/// Structure constants `C^c_{ab} = g ε^c_{ab}` of a K=3 simple Lie algebra basis.
///
/// Index placement is immaterial for ε, so `C^c_{ab}` is stored as
/// `tensor[c][a][b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StructureConstants {
    colors: usize,
    coupling: f64,
    tensor: [[[f64; 3]; 3]; 3],
}

impl StructureConstants {
    /// Build `C = g ε` for `colors` generators. Only `colors == 3` is supported.
    pub fn new(colors: usize, coupling: f64) -> Result<Self> {
        if colors != SU2_COLORS {
            return Err(YmError::domain(
                MODULE,
                format!("only K=3 structure constants are supported, got K={colors}"),
            ));
        }
        if !coupling.is_finite() || coupling < 0.0 {
            return Err(YmError::domain(
                MODULE,
                format!("coupling must be finite and non-negative, got {coupling}"),
            ));
        }
        let mut tensor = [[[0.0; 3]; 3]; 3];
        for (c, plane) in tensor.iter_mut().enumerate() {
            for (a, row) in plane.iter_mut().enumerate() {
                for (b, v) in row.iter_mut().enumerate() {
                    *v = coupling * eps(c, a, b);
                }
            }
        }
        Ok(Self {
            colors,
            coupling,
            tensor,
        })
    }

    /// Shorthand for the K=3 desk default.
    pub fn su2(coupling: f64) -> Result<Self> {
        Self::new(SU2_COLORS, coupling)
    }

    pub fn colors(&self) -> usize {
        self.colors
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    /// `C^c_{ab}`, zero-based.
    #[inline]
    pub fn get(&self, c: usize, a: usize, b: usize) -> f64 {
        self.tensor[c][a][b]
    }

    /// Same algebra with a different coupling.
    pub fn with_coupling(&self, coupling: f64) -> Result<Self> {
        Self::new(self.colors, coupling)
    }

    /// `w_c = Σ_{a,b} C^c_{ab} u_a v_b`.
    pub fn commutator(&self, u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.colors || v.len() != self.colors {
            return Err(YmError::domain(
                MODULE,
                format!(
                    "commutator expects color vectors of length {}, got {} and {}",
                    self.colors,
                    u.len(),
                    v.len()
                ),
            ));
        }
        let mut w = vec![0.0; self.colors];
        for (c, wc) in w.iter_mut().enumerate() {
            for (a, ua) in u.iter().enumerate() {
                for (b, vb) in v.iter().enumerate() {
                    *wc += self.tensor[c][a][b] * ua * vb;
                }
            }
        }
        Ok(w)
    }

    /// Largest absolute Jacobi-identity defect over all `(a, b, c, d)`.
    pub fn jacobi_defect(&self) -> f64 {
        let k = self.colors;
        let mut worst: f64 = 0.0;
        for a in 0..k {
            for b in 0..k {
                for c in 0..k {
                    for d in 0..k {
                        let mut s = 0.0;
                        for e in 0..k {
                            s += self.get(e, a, b) * self.get(d, e, c)
                                + self.get(e, b, c) * self.get(d, e, a)
                                + self.get(e, c, a) * self.get(d, e, b);
                        }
                        worst = worst.max(s.abs());
                    }
                }
            }
        }
        worst
    }
}

/// A 4×4 real matrix acting on Minkowski coordinates `(x⁰, x¹, x², x³)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzMatrix(pub Matrix4<f64>);

impl LorentzMatrix {
    pub fn identity() -> Self {
        LorentzMatrix(Matrix4::identity())
    }

    pub fn matrix(&self) -> &Matrix4<f64> {
        &self.0
    }

    /// `‖Λᵀ η Λ − η‖_max` for `η = diag(+1,−1,−1,−1)`.
    pub fn metric_defect(&self) -> f64 {
        let eta = minkowski_metric();
        (self.0.transpose() * eta * self.0 - eta).amax()
    }

    pub fn is_proper_orthochronous(&self, tol: f64) -> bool {
        self.metric_defect() < tol && (self.0.determinant() - 1.0).abs() < tol && self.0[(0, 0)] >= 1.0 - tol
    }
}

pub fn minkowski_metric() -> Matrix4<f64> {
    Matrix4::from_diagonal(&nalgebra::Vector4::new(1.0, -1.0, -1.0, -1.0))
}

/// `σ_0 = I` followed by the Pauli matrices, so that
/// `X(x) = Σ_μ x^μ σ_μ`.
pub fn pauli_basis() -> [Matrix2<Complex64>; 4] {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    [
        Matrix2::new(o, z, z, o),
        Matrix2::new(z, o, o, z),
        Matrix2::new(z, -i, i, z),
        Matrix2::new(o, z, z, -o),
    ]
}

/// Hermitian matrix `X(x)` of a Minkowski vector.
pub fn hermitian_of(x: &[f64; 4]) -> Matrix2<Complex64> {
    let basis = pauli_basis();
    let mut m = Matrix2::zeros();
    for (mu, s) in basis.iter().enumerate() {
        m += s * Complex64::new(x[mu], 0.0);
    }
    m
}

/// Inverse of [`hermitian_of`]: `x^μ = ½ Tr(σ_μ X)`.
pub fn vector_of(h: &Matrix2<Complex64>) -> [f64; 4] {
    let basis = pauli_basis();
    let mut x = [0.0; 4];
    for (mu, s) in basis.iter().enumerate() {
        x[mu] = 0.5 * (s * h).trace().re;
    }
    x
}

/// Spinor map `s(P) x = X⁻¹(P X(x) P*)`.
///
/// `tol` bounds `|det P − 1|`.
pub fn spinor_map(p: &Matrix2<Complex64>, tol: f64) -> Result<LorentzMatrix> {
    let det = p.determinant();
    if (det - Complex64::new(1.0, 0.0)).norm() > tol {
        return Err(YmError::domain(
            MODULE,
            format!("spinor_map requires det P = 1, got {det}"),
        ));
    }
    let basis = pauli_basis();
    let p_adj = p.adjoint();
    let mut lam = Matrix4::zeros();
    for (nu, s_nu) in basis.iter().enumerate() {
        let image = p * s_nu * p_adj;
        let col = vector_of(&image);
        for (mu, v) in col.iter().enumerate() {
            lam[(mu, nu)] = *v;
        }
    }
    Ok(LorentzMatrix(lam))
}

//! Truncated bosonic Fock space over `C^d`.
//!
//! Sector `n` is spanned by occupation states `(n₁, …, n_d)` with `Σnᵢ = n`,
//! listed in descending lexicographic order, so sector 1 is `e₁, …, e_d`.
//! Sectors `0..=n_max` are stacked in order. Inner products are
//! conjugate-linear in the first argument and `a(f) = Σ f̄ᵢ aᵢ`.
//!
//! Creation out of the top sector discards the overflow and sets a flag on
//! the result.

use std::collections::HashMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Result, YmError};
use crate::lattice::{transverse_project, FieldKind, Grid, LatticeField};
use crate::random::UniformStream;

const MODULE: &str = "fock";
/// Largest tensor size `dⁿ` handled by the dense (anti)symmetrizers.
pub const TENSOR_LIMIT: usize = 1296;
/// Largest total Fock dimension.
pub const FOCK_LIMIT: usize = 200_000;

type C = Complex64;

const ZERO: C = C::new(0.0, 0.0);
const I: C = C::new(0.0, 1.0);

fn binomial(n: usize, k: usize) -> usize {
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, j| acc * (n - j) / (j + 1))
}

fn sector_states(d: usize, n: usize) -> Vec<Vec<u32>> {
    fn rec(d: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == d - 1 {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in (0..=left).rev() {
            prefix.push(k);
            rec(d, left - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(d, n as u32, &mut Vec::with_capacity(d), &mut out);
    out
}

/// Occupation-number basis of `⊕_{n ≤ n_max} H^{(n)}_s`, `H = C^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct FockSpace {
    d: usize,
    n_max: usize,
    states: Vec<Vec<u32>>,
    sector_start: Vec<usize>,
    index: HashMap<Vec<u32>, usize>,
}

impl FockSpace {
    pub fn new(d: usize, n_max: usize) -> Result<Arc<Self>> {
        if d == 0 {
            return Err(YmError::domain(MODULE, "one-particle dimension must be ≥ 1"));
        }
        let total = binomial(n_max + d, d);
        if total > FOCK_LIMIT {
            return Err(YmError::capacity(MODULE, format!("Fock dimension {total} exceeds {FOCK_LIMIT}")));
        }
        let mut states = Vec::with_capacity(total);
        let mut sector_start = Vec::with_capacity(n_max + 2);
        for n in 0..=n_max {
            sector_start.push(states.len());
            states.extend(sector_states(d, n));
        }
        sector_start.push(states.len());
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(Arc::new(Self {
            d,
            n_max,
            states,
            sector_start,
            index,
        }))
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn sector_range(&self, n: usize) -> std::ops::Range<usize> {
        self.sector_start[n]..self.sector_start[n + 1]
    }

    pub fn sector_dim(&self, n: usize) -> usize {
        self.sector_range(n).len()
    }

    pub fn state(&self, i: usize) -> &[u32] {
        &self.states[i]
    }

    pub fn index_of(&self, occ: &[u32]) -> Option<usize> {
        self.index.get(occ).copied()
    }

    fn particle_number(&self, i: usize) -> usize {
        self.states[i].iter().sum::<u32>() as usize
    }
}

/// A state in a truncated Fock space.
#[derive(Debug, Clone, PartialEq)]
pub struct FockVector {
    space: Arc<FockSpace>,
    coeffs: Vec<C>,
    overflow: bool,
}

impl FockVector {
    pub fn zeros(space: &Arc<FockSpace>) -> Self {
        Self {
            space: space.clone(),
            coeffs: vec![ZERO; space.dim()],
            overflow: false,
        }
    }

    /// `Ω₀ = (1, 0, …)`.
    pub fn vacuum(space: &Arc<FockSpace>) -> Self {
        let mut v = Self::zeros(space);
        v.coeffs[0] = C::new(1.0, 0.0);
        v
    }

    pub fn from_coeffs(space: &Arc<FockSpace>, coeffs: Vec<C>) -> Result<Self> {
        if coeffs.len() != space.dim() {
            return Err(YmError::shape(MODULE, format!("expected {} coefficients, got {}", space.dim(), coeffs.len())));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(YmError::domain(MODULE, "non-finite Fock coefficients"));
        }
        Ok(Self {
            space: space.clone(),
            coeffs,
            overflow: false,
        })
    }

    /// The one-particle state `f` in sector 1.
    pub fn one_particle(space: &Arc<FockSpace>, f: &[C]) -> Result<Self> {
        check_vector(space, f)?;
        let mut v = Self::zeros(space);
        if space.n_max >= 1 {
            for (k, fk) in f.iter().enumerate() {
                v.coeffs[space.sector_start[1] + k] = *fk;
            }
        }
        Ok(v)
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    pub fn coeffs(&self) -> &[C] {
        &self.coeffs
    }

    /// Whether a creation step discarded amplitude above `n_max`.
    pub fn overflowed(&self) -> bool {
        self.overflow
    }

    pub fn inner(&self, other: &FockVector) -> C {
        self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn sector_norm(&self, n: usize) -> f64 {
        self.coeffs[self.space.sector_range(n)].iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Highest sector with non-zero amplitude.
    pub fn top_sector(&self) -> Option<usize> {
        (0..=self.space.n_max).rev().find(|&n| self.sector_norm(n) > 0.0)
    }

    pub fn scaled(&self, s: C) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().for_each(|c| *c *= s);
        out
    }

    pub fn axpy(&self, s: C, other: &FockVector) -> Self {
        let mut out = self.clone();
        out.coeffs.iter_mut().zip(&other.coeffs).for_each(|(a, b)| *a += s * b);
        out.overflow |= other.overflow;
        out
    }

    /// Keep only sectors `0..=n`.
    pub fn truncated_to(&self, n: usize) -> Self {
        let mut out = self.clone();
        let start = self.space.sector_start[(n + 1).min(self.space.n_max + 1)];
        out.coeffs[start..].iter_mut().for_each(|c| *c = ZERO);
        out
    }
}

fn check_vector(space: &FockSpace, f: &[C]) -> Result<()> {
    if f.len() != space.d {
        return Err(YmError::shape(MODULE, format!("one-particle vector must have length {}, got {}", space.d, f.len())));
    }
    if f.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(YmError::domain(MODULE, "non-finite one-particle vector"));
    }
    Ok(())
}

fn same_space(a: &FockSpace, b: &FockSpace) -> Result<()> {
    if a.d != b.d || a.n_max != b.n_max {
        return Err(YmError::shape(MODULE, "Fock spaces differ"));
    }
    Ok(())
}

/// `a(f) v = Σ f̄ᵢ aᵢ v`, `aᵢ|n⟩ = √nᵢ |n − eᵢ⟩`.
pub fn annihilate(f: &[C], v: &FockVector) -> Result<FockVector> {
    let sp = &v.space;
    check_vector(sp, f)?;
    let mut out = FockVector::zeros(sp);
    let mut occ = vec![0u32; sp.d];
    for (j, c) in v.coeffs.iter().enumerate() {
        if *c == ZERO {
            continue;
        }
        occ.copy_from_slice(&sp.states[j]);
        for i in 0..sp.d {
            if occ[i] == 0 || f[i] == ZERO {
                continue;
            }
            let amp = (occ[i] as f64).sqrt();
            occ[i] -= 1;
            let t = sp.index[&occ];
            out.coeffs[t] += f[i].conj() * amp * c;
            occ[i] += 1;
        }
    }
    Ok(out)
}

/// `a(f)* v = Σ fᵢ aᵢ† v`, `aᵢ†|n⟩ = √(nᵢ+1) |n + eᵢ⟩`; amplitude leaving
/// sector `n_max` is dropped and flagged.
pub fn create(f: &[C], v: &FockVector) -> Result<FockVector> {
    let sp = &v.space;
    check_vector(sp, f)?;
    let mut out = FockVector::zeros(sp);
    out.overflow = v.overflow;
    let mut occ = vec![0u32; sp.d];
    for (j, c) in v.coeffs.iter().enumerate() {
        if *c == ZERO {
            continue;
        }
        let top = sp.particle_number(j) == sp.n_max;
        occ.copy_from_slice(&sp.states[j]);
        for i in 0..sp.d {
            if f[i] == ZERO {
                continue;
            }
            if top {
                out.overflow = true;
                continue;
            }
            let amp = (occ[i] as f64 + 1.0).sqrt();
            occ[i] += 1;
            let t = sp.index[&occ];
            out.coeffs[t] += f[i] * amp * c;
            occ[i] -= 1;
        }
    }
    Ok(out)
}

/// `Φ_S(f) = (a(f) + a(f)*)/√2`.
pub fn segal_field(f: &[C], v: &FockVector) -> Result<FockVector> {
    let a = annihilate(f, v)?;
    let c = create(f, v)?;
    Ok(a.axpy(C::new(1.0, 0.0), &c).scaled(C::new(std::f64::consts::FRAC_1_SQRT_2, 0.0)))
}

#[derive(Debug, Clone, PartialEq)]
pub enum OperatorKind {
    DGamma(DMatrix<C>),
    Gamma(DMatrix<C>),
    Annihilate(Vec<C>),
    Create(Vec<C>),
    Segal(Vec<C>),
}

/// A one-particle operator or vector lifted to the truncated Fock space.
#[derive(Debug, Clone)]
pub struct SecondQuantizedOperator {
    kind: OperatorKind,
    space: Arc<FockSpace>,
    /// Sector blocks, present for `DGamma` and `Gamma`.
    sectors: Vec<DMatrix<C>>,
}

fn hermitian_defect(a: &DMatrix<C>) -> f64 {
    (a - a.adjoint()).iter().fold(0.0, |m, c| m.max(c.norm()))
}

fn unitary_defect(u: &DMatrix<C>) -> f64 {
    let n = u.nrows();
    (u.adjoint() * u - DMatrix::<C>::identity(n, n)).iter().fold(0.0, |m, c| m.max(c.norm()))
}

fn check_square(space: &FockSpace, a: &DMatrix<C>) -> Result<()> {
    if a.nrows() != space.d || a.ncols() != space.d {
        return Err(YmError::shape(MODULE, format!("one-particle operator must be {0}×{0}", space.d)));
    }
    Ok(())
}

fn basis_vector(space: &Arc<FockSpace>, i: usize) -> FockVector {
    let mut v = FockVector::zeros(space);
    v.coeffs[i] = C::new(1.0, 0.0);
    v
}

impl SecondQuantizedOperator {
    pub fn kind(&self) -> &OperatorKind {
        &self.kind
    }

    pub fn space(&self) -> &Arc<FockSpace> {
        &self.space
    }

    /// Block acting on sector `n` (for `DGamma` and `Gamma`).
    pub fn sector_matrix(&self, n: usize) -> Option<&DMatrix<C>> {
        self.sectors.get(n)
    }

    pub fn apply(&self, v: &FockVector) -> Result<FockVector> {
        same_space(&self.space, &v.space)?;
        match &self.kind {
            OperatorKind::Annihilate(f) => annihilate(f, v),
            OperatorKind::Create(f) => create(f, v),
            OperatorKind::Segal(f) => segal_field(f, v),
            OperatorKind::DGamma(_) | OperatorKind::Gamma(_) => {
                let mut out = FockVector::zeros(&self.space);
                out.overflow = v.overflow;
                for (n, block) in self.sectors.iter().enumerate() {
                    let r = self.space.sector_range(n);
                    let x = DVector::from_column_slice(&v.coeffs[r.clone()]);
                    let y = block * x;
                    out.coeffs[r].copy_from_slice(y.as_slice());
                }
                Ok(out)
            }
        }
    }

    /// Matrix over the whole truncated space.
    pub fn dense(&self) -> DMatrix<C> {
        let dim = self.space.dim();
        let mut m = DMatrix::from_element(dim, dim, ZERO);
        for j in 0..dim {
            let col = self.apply(&basis_vector(&self.space, j)).expect("same space");
            m.column_mut(j).copy_from_slice(&col.coeffs);
        }
        m
    }
}

pub fn annihilation_operator(space: &Arc<FockSpace>, f: &[C]) -> Result<SecondQuantizedOperator> {
    check_vector(space, f)?;
    Ok(SecondQuantizedOperator {
        kind: OperatorKind::Annihilate(f.to_vec()),
        space: space.clone(),
        sectors: vec![],
    })
}

pub fn creation_operator(space: &Arc<FockSpace>, f: &[C]) -> Result<SecondQuantizedOperator> {
    check_vector(space, f)?;
    Ok(SecondQuantizedOperator {
        kind: OperatorKind::Create(f.to_vec()),
        space: space.clone(),
        sectors: vec![],
    })
}

pub fn segal_operator(space: &Arc<FockSpace>, f: &[C]) -> Result<SecondQuantizedOperator> {
    check_vector(space, f)?;
    Ok(SecondQuantizedOperator {
        kind: OperatorKind::Segal(f.to_vec()),
        space: space.clone(),
        sectors: vec![],
    })
}

/// `dΓ(A) = Σ Aᵢⱼ aᵢ† aⱼ`, sector by sector.
pub fn dgamma(space: &Arc<FockSpace>, a: &DMatrix<C>) -> Result<SecondQuantizedOperator> {
    check_square(space, a)?;
    let defect = hermitian_defect(a);
    if defect > 1e-12 {
        return Err(YmError::domain(MODULE, format!("dGamma needs a self-adjoint operator, defect {defect:e}")));
    }
    let d = space.d;
    let mut sectors = Vec::with_capacity(space.n_max + 1);
    for n in 0..=space.n_max {
        let r = space.sector_range(n);
        let mut block = DMatrix::from_element(r.len(), r.len(), ZERO);
        for (col, j) in r.clone().enumerate() {
            let occ = &space.states[j];
            for q in 0..d {
                if occ[q] == 0 {
                    continue;
                }
                for p in 0..d {
                    if a[(p, q)] == ZERO {
                        continue;
                    }
                    let mut o = occ.clone();
                    let amp = (o[q] as f64).sqrt();
                    o[q] -= 1;
                    let amp = amp * (o[p] as f64 + 1.0).sqrt();
                    o[p] += 1;
                    let row = space.index[&o] - r.start;
                    block[(row, col)] += a[(p, q)] * amp;
                }
            }
        }
        sectors.push(block);
    }
    Ok(SecondQuantizedOperator {
        kind: OperatorKind::DGamma(a.clone()),
        space: space.clone(),
        sectors,
    })
}

/// `Γ(U)|_{H^{(n)}} = ⊗ⁿU` restricted to symmetric tensors, built as
/// `Π_j (a†(U e_j))^{n_j}/√(n_j!) Ω₀`.
pub fn gamma(space: &Arc<FockSpace>, u: &DMatrix<C>) -> Result<SecondQuantizedOperator> {
    check_square(space, u)?;
    let defect = unitary_defect(u);
    if defect > 1e-12 {
        return Err(YmError::domain(MODULE, format!("Gamma needs a unitary operator, defect {defect:e}")));
    }
    let d = space.d;
    let images: Vec<Vec<C>> = (0..d).map(|j| u.column(j).iter().copied().collect()).collect();
    let mut sectors = Vec::with_capacity(space.n_max + 1);
    for n in 0..=space.n_max {
        let r = space.sector_range(n);
        let mut block = DMatrix::from_element(r.len(), r.len(), ZERO);
        for (col, j) in r.clone().enumerate() {
            let mut v = FockVector::vacuum(space);
            for (k, &nk) in space.states[j].iter().enumerate() {
                let mut fact = 1.0;
                for m in 1..=nk {
                    v = create(&images[k], &v)?;
                    fact *= m as f64;
                }
                v = v.scaled(C::new(1.0 / fact.sqrt(), 0.0));
            }
            for (row, i) in r.clone().enumerate() {
                block[(row, col)] = v.coeffs[i];
            }
        }
        sectors.push(block);
    }
    Ok(SecondQuantizedOperator {
        kind: OperatorKind::Gamma(u.clone()),
        space: space.clone(),
        sectors,
    })
}

fn hermitian_eigenvalues(a: &DMatrix<C>) -> Vec<f64> {
    let h = (a + a.adjoint()) * C::new(0.5, 0.0);
    let mut v: Vec<f64> = SymmetricEigen::new(h).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

/// All `n`-fold multiset sums of the eigenvalues of `A`, sorted.
pub fn dgamma_spectrum(a: &DMatrix<C>, n: usize) -> Result<Vec<f64>> {
    if a.nrows() != a.ncols() {
        return Err(YmError::shape(MODULE, "dGamma_spectrum needs a square matrix"));
    }
    let defect = hermitian_defect(a);
    if defect > 1e-12 {
        return Err(YmError::domain(MODULE, format!("dGamma_spectrum needs a self-adjoint operator, defect {defect:e}")));
    }
    let lam = hermitian_eigenvalues(a);
    let mut out = Vec::new();
    for occ in sector_states(lam.len(), n) {
        out.push(occ.iter().zip(&lam).map(|(&k, l)| k as f64 * l).sum());
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

fn tensor_len(d: usize, n: usize) -> Result<usize> {
    let len = d.checked_pow(n as u32).filter(|&l| l <= TENSOR_LIMIT);
    len.ok_or_else(|| YmError::capacity(MODULE, format!("dense tensor d^n = {d}^{n} exceeds {TENSOR_LIMIT}")))
}

fn digits(mut idx: usize, d: usize, n: usize) -> Vec<usize> {
    let mut out = vec![0; n];
    for k in (0..n).rev() {
        out[k] = idx % d;
        idx /= d;
    }
    out
}

fn undigits(ds: &[usize], d: usize) -> usize {
    ds.iter().fold(0, |acc, &x| acc * d + x)
}

fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..used.len() {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                rec(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut perms = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut perms);
    perms
        .into_iter()
        .map(|p| {
            let mut inv = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if p[i] > p[j] {
                        inv += 1;
                    }
                }
            }
            let sign = if inv % 2 == 0 { 1.0 } else { -1.0 };
            (p, sign)
        })
        .collect()
}

fn permute_average(t: &[C], d: usize, n: usize, signed: bool) -> Result<Vec<C>> {
    let len = tensor_len(d, n)?;
    if t.len() != len {
        return Err(YmError::shape(MODULE, format!("tensor of rank {n} over C^{d} needs {len} entries")));
    }
    let perms = permutations(n);
    let scale = 1.0 / perms.len() as f64;
    let mut out = vec![ZERO; len];
    for (idx, o) in out.iter_mut().enumerate() {
        let ds = digits(idx, d, n);
        let mut acc = ZERO;
        for (p, sign) in &perms {
            let permuted: Vec<usize> = p.iter().map(|&k| ds[k]).collect();
            let s = if signed { *sign } else { 1.0 };
            acc += t[undigits(&permuted, d)] * s;
        }
        *o = acc * scale;
    }
    Ok(out)
}

/// `S_n = (1/n!) Σ_σ P_σ` on `(C^d)^{⊗n}`, index order `i₁…iₙ` row-major.
pub fn symmetrize(t: &[C], d: usize, n: usize) -> Result<Vec<C>> {
    permute_average(t, d, n, false)
}

/// `A_n = (1/n!) Σ_σ sgn(σ) P_σ`.
pub fn antisymmetrize(t: &[C], d: usize, n: usize) -> Result<Vec<C>> {
    permute_average(t, d, n, true)
}

/// Spectrum of `Σ_j I⊗…⊗A⊗…⊗I` compressed to the symmetric subspace of
/// `(C^d)^{⊗n}`, by dense tensor algebra. Reference for `dgamma_spectrum`.
pub fn kronecker_sum_spectrum(a: &DMatrix<C>, n: usize) -> Result<Vec<f64>> {
    let d = a.nrows();
    let len = tensor_len(d, n)?;
    let mut h = DMatrix::from_element(len, len, ZERO);
    for col in 0..len {
        let ds = digits(col, d, n);
        for slot in 0..n {
            for p in 0..d {
                let mut o = ds.clone();
                o[slot] = p;
                h[(undigits(&o, d), col)] += a[(p, ds[slot])];
            }
        }
    }
    // orthonormal basis of the symmetric subspace: normalized S_n e_{i₁…iₙ}
    let mut basis: Vec<DVector<C>> = Vec::new();
    for occ in sector_states(d, n) {
        let mut ds = Vec::with_capacity(n);
        for (k, &m) in occ.iter().enumerate() {
            ds.extend(std::iter::repeat_n(k, m as usize));
        }
        let mut e = vec![ZERO; len];
        e[undigits(&ds, d)] = C::new(1.0, 0.0);
        let s = DVector::from_vec(symmetrize(&e, d, n)?);
        basis.push(s.normalize());
    }
    let b = DMatrix::from_columns(&basis);
    Ok(hermitian_eigenvalues(&(b.adjoint() * h * b)))
}

/// Representing vector of the smeared field `∫φ A_μ^a` in the lattice
/// one-particle space `C^{4K·N³}`, slot order `(site, μ, color)`.
///
/// `φ` is placed in slot `(μ, a)`; spatial components are transversally
/// projected; entries carry `√(cell volume)` so the standard inner product
/// is the lattice `L²` pairing.
pub fn smeared_field_vector(grid: &Grid, colors: usize, phi: &[C], mu: usize, a: usize) -> Result<Vec<C>> {
    if phi.len() != grid.sites() {
        return Err(YmError::shape(MODULE, format!("test function needs {} samples", grid.sites())));
    }
    if mu > 3 || a >= colors {
        return Err(YmError::domain(MODULE, format!("index (μ={mu}, a={a}) out of range")));
    }
    let w = grid.cell_volume().sqrt();
    let slot = |s: usize, m: usize, c: usize| (s * 4 + m) * colors + c;
    let mut out = vec![ZERO; grid.sites() * 4 * colors];
    if mu == 0 {
        for (s, p) in phi.iter().enumerate() {
            out[slot(s, 0, a)] = p * w;
        }
        return Ok(out);
    }
    let part = |im: bool| {
        let field = LatticeField::from_fn(*grid, colors, FieldKind::Auxiliary, |s, c, i| {
            if c == a && i + 1 == mu {
                if im {
                    phi[s].im
                } else {
                    phi[s].re
                }
            } else {
                0.0
            }
        });
        transverse_project(&field)
    };
    let (re, im) = (part(false), part(true));
    for s in 0..grid.sites() {
        for c in 0..colors {
            for i in 0..3 {
                out[slot(s, i + 1, c)] = C::new(re.get(s, c, i), im.get(s, c, i)) * w;
            }
        }
    }
    Ok(out)
}

/// Coordinates of `vectors` in an orthonormal basis of their span
/// (Gram–Schmidt); the inner products among them are preserved.
pub fn reduce_to_span(vectors: &[Vec<C>]) -> Vec<Vec<C>> {
    let inner = |u: &[C], v: &[C]| -> C { u.iter().zip(v).map(|(a, b)| a.conj() * b).sum() };
    let mut basis: Vec<Vec<C>> = Vec::new();
    for v in vectors {
        let mut r = v.clone();
        for _pass in 0..2 {
            for b in &basis {
                let c = inner(b, &r);
                r.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
            }
        }
        let nr = inner(&r, &r).re.sqrt();
        let nv = inner(v, v).re.sqrt();
        if nr > 1e-12 * nv.max(f64::MIN_POSITIVE) {
            basis.push(r.into_iter().map(|x| x / nr).collect());
        }
    }
    if basis.is_empty() {
        return vectors.iter().map(|_| vec![ZERO]).collect();
    }
    vectors.iter().map(|v| basis.iter().map(|b| inner(b, v)).collect()).collect()
}

/// `exp(iH)` for Hermitian `H`.
pub fn exp_i_hermitian(h: &DMatrix<C>) -> DMatrix<C> {
    let hs = (h + h.adjoint()) * C::new(0.5, 0.0);
    let eig = SymmetricEigen::new(hs);
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| (I * l).exp()));
    &eig.eigenvectors * phases * eig.eigenvectors.adjoint()
}

// ---------------------------------------------------------------------------
// check suites

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FockCheckConfig {
    pub d: usize,
    pub n_max: usize,
    pub seed: u64,
}

impl Default for FockCheckConfig {
    fn default() -> Self {
        Self { d: 3, n_max: 4, seed: 7 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteResult {
    pub name: &'static str,
    pub max_deviation: f64,
    pub tolerance: f64,
    /// `true` when the deviation must stay below the tolerance; `false` for
    /// negative controls that must exceed it.
    pub upper_bound: bool,
}

impl SuiteResult {
    pub fn pass(&self) -> bool {
        if self.upper_bound {
            self.max_deviation < self.tolerance
        } else {
            self.max_deviation > self.tolerance
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FockCheckReport {
    pub config: FockCheckConfig,
    pub suites: Vec<SuiteResult>,
}

impl FockCheckReport {
    pub fn all_pass(&self) -> bool {
        self.suites.iter().all(SuiteResult::pass)
    }
}

fn random_complex(stream: &mut UniformStream, len: usize, norm: f64) -> Vec<C> {
    let v: Vec<C> = (0..len).map(|_| C::new(stream.next_unit(), stream.next_unit())).collect();
    let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|c| c * (norm / n)).collect()
}

/// Normalized random state supported on sectors `0..=top`.
fn random_state(space: &Arc<FockSpace>, stream: &mut UniformStream, top: usize) -> FockVector {
    let mut v = FockVector::zeros(space);
    let end = space.sector_range(top.min(space.n_max)).end;
    for c in &mut v.coeffs[..end] {
        *c = C::new(stream.next_unit(), stream.next_unit());
    }
    let n = v.norm();
    v.scaled(C::new(1.0 / n, 0.0))
}

fn inner_vec(f: &[C], g: &[C]) -> C {
    f.iter().zip(g).map(|(a, b)| a.conj() * b).sum()
}

fn diff_norm(a: &FockVector, b: &FockVector) -> f64 {
    a.axpy(C::new(-1.0, 0.0), b).norm()
}

fn random_hermitian(stream: &mut UniformStream, d: usize) -> DMatrix<C> {
    let m = DMatrix::from_fn(d, d, |_, _| C::new(stream.next_unit(), stream.next_unit()));
    (&m + m.adjoint()) * C::new(0.5, 0.0)
}

fn random_unitary(stream: &mut UniformStream, d: usize) -> DMatrix<C> {
    exp_i_hermitian(&random_hermitian(stream, d))
}

/// `⟨a(f)* u, v⟩ = ⟨u, a(f) v⟩` for `u` below the top sector.
fn suite_adjoint(space: &Arc<FockSpace>, s: &mut UniformStream, trials: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let f = random_complex(s, space.d, 1.0);
        let u = random_state(space, s, space.n_max.saturating_sub(1));
        let v = random_state(space, s, space.n_max);
        let lhs = create(&f, &u)?.inner(&v);
        let rhs = u.inner(&annihilate(&f, &v)?);
        worst = worst.max((lhs - rhs).norm());
    }
    Ok(worst)
}

/// `[a(f), a(g)*] v = (f, g) v` on sectors `≤ n_max − 1`.
fn suite_ccr(space: &Arc<FockSpace>, s: &mut UniformStream, trials: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let f = random_complex(s, space.d, 1.0);
        let g = random_complex(s, space.d, 1.0);
        let v = random_state(space, s, space.n_max.saturating_sub(1));
        let lhs = annihilate(&f, &create(&g, &v)?)?.axpy(C::new(-1.0, 0.0), &create(&g, &annihilate(&f, &v)?)?);
        worst = worst.max(diff_norm(&lhs, &v.scaled(inner_vec(&f, &g))));
    }
    Ok(worst)
}

fn segal_commutator(f: &[C], g: &[C], v: &FockVector) -> Result<FockVector> {
    let fg = segal_field(f, &segal_field(g, v)?)?;
    let gf = segal_field(g, &segal_field(f, v)?)?;
    Ok(fg.axpy(C::new(-1.0, 0.0), &gf))
}

/// `[Φ_S(f), Φ_S(g)] v = i Im(f,g) v` on sectors `≤ n_max − 2`; includes
/// real-proportional pairs.
fn suite_segal(space: &Arc<FockSpace>, s: &mut UniformStream, trials: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for t in 0..trials {
        let f = random_complex(s, space.d, 1.0);
        let g = if t % 3 == 0 {
            f.iter().map(|c| c * 1.7).collect()
        } else {
            random_complex(s, space.d, 1.0)
        };
        let v = random_state(space, s, space.n_max.saturating_sub(2));
        let lhs = segal_commutator(&f, &g, &v)?;
        let want = v.scaled(I * inner_vec(&f, &g).im);
        worst = worst.max(diff_norm(&lhs, &want));
    }
    Ok(worst)
}

/// `exp(iΦ_S(f+g)) = e^{(i/2)Im(f,g)} exp(iΦ_S(f)) exp(iΦ_S(g))` applied to
/// the vacuum, compared on sectors `≤ n_max − 2`. The phase sign is the one
/// fixed by `[Φ_S(f), Φ_S(g)] = i Im(f,g)`.
fn suite_weyl(space: &Arc<FockSpace>, s: &mut UniformStream, trials: usize, field_norm: f64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    let keep = space.n_max.saturating_sub(2);
    for _ in 0..trials {
        let f = random_complex(s, space.d, field_norm);
        let g = random_complex(s, space.d, field_norm);
        let fg: Vec<C> = f.iter().zip(&g).map(|(a, b)| a + b).collect();
        let ef = exp_i_hermitian(&segal_operator(space, &f)?.dense());
        let eg = exp_i_hermitian(&segal_operator(space, &g)?.dense());
        let efg = exp_i_hermitian(&segal_operator(space, &fg)?.dense());
        let omega = DVector::from_column_slice(FockVector::vacuum(space).coeffs());
        let lhs = &efg * &omega;
        let rhs = (&ef * (&eg * &omega)) * (I * 0.5 * inner_vec(&f, &g).im).exp();
        let end = space.sector_range(keep).end;
        let d = (lhs.rows(0, end) - rhs.rows(0, end)).norm();
        worst = worst.max(d);
    }
    Ok(worst)
}

/// `Γ(U)Φ_S(f)Γ(U)⁻¹ v = Φ_S(Uf) v` on sectors `≤ n_max − 1`.
fn suite_gamma(space: &Arc<FockSpace>, s: &mut UniformStream, trials: usize) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..trials {
        let u = random_unitary(s, space.d);
        let gu = gamma(space, &u)?;
        let gu_inv = gamma(space, &u.adjoint())?;
        let f = random_complex(s, space.d, 1.0);
        let uf: Vec<C> = (&u * DVector::from_column_slice(&f)).iter().copied().collect();
        let v = random_state(space, s, space.n_max.saturating_sub(1));
        let lhs = gu.apply(&segal_field(&f, &gu_inv.apply(&v)?)?)?;
        let rhs = segal_field(&uf, &v)?;
        worst = worst.max(diff_norm(&lhs, &rhs));
    }
    Ok(worst)
}

/// Sector spectra of `dΓ(A)` against multiset sums and the Kronecker-sum
/// reference.
fn suite_dgamma(space: &Arc<FockSpace>, s: &mut UniformStream) -> Result<f64> {
    let a = random_hermitian(s, space.d);
    let op = dgamma(space, &a)?;
    let mut worst: f64 = 0.0;
    for n in 0..=space.n_max {
        let sums = dgamma_spectrum(&a, n)?;
        let block = hermitian_eigenvalues(op.sector_matrix(n).expect("sector"));
        for (x, y) in sums.iter().zip(&block) {
            worst = worst.max((x - y).abs());
        }
        if space.d <= 4 && n <= 3 {
            let kron = kronecker_sum_spectrum(&a, n)?;
            for (x, y) in sums.iter().zip(&kron) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    // number operator
    let num = dgamma(space, &DMatrix::identity(space.d, space.d))?;
    for n in 0..=space.n_max {
        for l in hermitian_eigenvalues(num.sector_matrix(n).expect("sector")) {
            worst = worst.max((l - n as f64).abs());
        }
    }
    Ok(worst)
}

/// Rank of `{Φ_S(f_{i₁})…Φ_S(f_{i_k})Ω₀ : k ≤ n_max}` relative to the
/// truncated dimension; returns `dim − rank`.
fn suite_cyclic(space: &Arc<FockSpace>, s: &mut UniformStream) -> Result<f64> {
    let fs: Vec<Vec<C>> = (0..space.d + 1).map(|_| random_complex(s, space.d, 1.0)).collect();
    let mut basis = vec![FockVector::vacuum(space)];
    let mut frontier = basis.clone();
    for _ in 0..space.n_max {
        let mut fresh = Vec::new();
        for v in &frontier {
            for f in &fs {
                let mut w = segal_field(f, v)?;
                let scale = w.norm();
                for _ in 0..2 {
                    for b in &basis {
                        w = w.axpy(-b.inner(&w), b);
                    }
                }
                let n = w.norm();
                if n > 1e-10 * scale {
                    let w = w.scaled(C::new(1.0 / n, 0.0));
                    basis.push(w.clone());
                    fresh.push(w);
                }
            }
        }
        frontier = fresh;
    }
    Ok((space.dim() - basis.len().min(space.dim())) as f64)
}

/// Disjoint-support smeared fields: inner products and Segal commutators.
/// Returns `(max |(u,v)| for μ = 0, max commutator norm over μ, overlap control)`.
fn suite_w7(n_max: usize, s: &mut UniformStream) -> Result<(f64, f64, f64)> {
    let grid = Grid::new(4, 2.0 * std::f64::consts::PI)?;
    let k = 3;
    let left = |site: usize| grid.site_coords(site)[0] < 2;
    let sample = |s: &mut UniformStream, on_left: bool| -> Vec<C> {
        (0..grid.sites())
            .map(|site| {
                let (re, im) = (s.next_unit(), s.next_unit());
                if left(site) == on_left {
                    C::new(re, im)
                } else {
                    ZERO
                }
            })
            .collect()
    };
    let space = FockSpace::new(2, n_max)?;
    let mut ip: f64 = 0.0;
    let mut comm: f64 = 0.0;
    let mut control: f64 = f64::INFINITY;
    for mu in 0..4 {
        for a in 0..k {
            let phi = sample(s, true);
            let chi = sample(s, false);
            let u = smeared_field_vector(&grid, k, &phi, mu, a)?;
            let v = smeared_field_vector(&grid, k, &chi, mu, a)?;
            if mu == 0 {
                ip = ip.max(inner_vec(&u, &v).norm());
            }
            // complex test functions stay orthogonal only without the
            // transverse projection; real ones give real vectors for every μ
            let real = |x: &[C]| -> Vec<C> { x.iter().map(|p| C::new(p.re, 0.0)).collect() };
            let mut pairs = vec![reduce_to_span(&[
                smeared_field_vector(&grid, k, &real(&phi), mu, a)?,
                smeared_field_vector(&grid, k, &real(&chi), mu, a)?,
            ])];
            if mu == 0 {
                pairs.push(reduce_to_span(&[u, v]));
            }
            for red in pairs {
                let sp = if red[0].len() == 2 { space.clone() } else { FockSpace::new(red[0].len(), n_max)? };
                let w = random_state(&sp, s, n_max.saturating_sub(2));
                comm = comm.max(segal_commutator(&red[0], &red[1], &w)?.norm());
            }
            // overlapping supports, complex: must not commute
            let psi = sample(s, true);
            let z: Vec<C> = psi.iter().map(|p| p * I).collect();
            let pu = smeared_field_vector(&grid, k, &psi, mu, a)?;
            let pz = smeared_field_vector(&grid, k, &(0..grid.sites()).map(|j| psi[j] + z[j] * 0.5).collect::<Vec<_>>(), mu, a)?;
            let red_c = reduce_to_span(&[pu, pz]);
            let sp = FockSpace::new(red_c[0].len(), n_max)?;
            let w = FockVector::vacuum(&sp);
            control = control.min(segal_commutator(&red_c[0], &red_c[1], &w)?.norm());
        }
    }
    Ok((ip, comm, control))
}

/// Run every Fock-space identity check.
pub fn fock_check(cfg: &FockCheckConfig) -> Result<FockCheckReport> {
    if cfg.n_max < 2 {
        return Err(YmError::domain(MODULE, "fock_check needs n_max ≥ 2"));
    }
    let space = FockSpace::new(cfg.d, cfg.n_max)?;
    let mut s = UniformStream::new(cfg.seed);
    let trials = 8;
    let mut suites = vec![
        SuiteResult {
            name: "adjointness",
            max_deviation: suite_adjoint(&space, &mut s, trials)?,
            tolerance: 1e-12,
            upper_bound: true,
        },
        SuiteResult {
            name: "ccr",
            max_deviation: suite_ccr(&space, &mut s, trials)?,
            tolerance: 1e-12,
            upper_bound: true,
        },
        SuiteResult {
            name: "segal_commutator",
            max_deviation: suite_segal(&space, &mut s, trials)?,
            tolerance: 1e-12,
            upper_bound: true,
        },
    ];
    if cfg.d <= 3 && cfg.n_max <= 5 {
        suites.push(SuiteResult {
            name: "weyl",
            max_deviation: suite_weyl(&space, &mut s, trials, WEYL_FIELD_NORM)?,
            tolerance: 1e-8,
            upper_bound: true,
        });
    }
    suites.push(SuiteResult {
        name: "gamma_covariance",
        max_deviation: suite_gamma(&space, &mut s, trials)?,
        tolerance: 1e-12,
        upper_bound: true,
    });
    suites.push(SuiteResult {
        name: "dgamma_spectrum",
        max_deviation: suite_dgamma(&space, &mut s)?,
        tolerance: 1e-10,
        upper_bound: true,
    });
    suites.push(SuiteResult {
        name: "vacuum_cyclicity",
        max_deviation: suite_cyclic(&space, &mut s)?,
        tolerance: 0.5,
        upper_bound: true,
    });
    let (ip, comm, control) = suite_w7(cfg.n_max, &mut s)?;
    suites.push(SuiteResult {
        name: "w7_disjoint_inner_product",
        max_deviation: ip,
        tolerance: 1e-12,
        upper_bound: true,
    });
    suites.push(SuiteResult {
        name: "w7_disjoint_commutator",
        max_deviation: comm,
        tolerance: 1e-12,
        upper_bound: true,
    });
    suites.push(SuiteResult {
        name: "w7_overlap_control",
        max_deviation: control,
        tolerance: 1e-3,
        upper_bound: false,
    });
    Ok(FockCheckReport { config: *cfg, suites })
}

/// Norm of the smearing vectors in the Weyl check; small enough that the
/// exponential series is resolved before the truncation edge.
pub const WEYL_FIELD_NORM: f64 = 0.05;

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C {
        C::new(re, 0.0)
    }

    #[test]
    fn basis_order_and_dimension() {
        let sp = FockSpace::new(2, 2).unwrap();
        assert_eq!(sp.dim(), 6);
        assert_eq!(sp.state(1), &[1, 0]);
        assert_eq!(sp.state(2), &[0, 1]);
        assert_eq!(sp.state(3), &[2, 0]);
        assert_eq!(sp.state(5), &[0, 2]);
        assert!(FockSpace::new(0, 2).is_err());
    }

    #[test]
    fn ladder_examples() {
        let sp = FockSpace::new(3, 3).unwrap();
        let om = FockVector::vacuum(&sp);
        let e1 = [c(1.0), c(0.0), c(0.0)];
        assert_eq!(annihilate(&e1, &om).unwrap().norm(), 0.0);
        let one = create(&e1, &om).unwrap();
        assert_eq!(one, FockVector::one_particle(&sp, &e1).unwrap());
        assert_eq!(annihilate(&e1, &one).unwrap(), om);
        let f = [C::new(0.3, -0.2), c(0.5), C::new(0.0, 1.0)];
        let phi = segal_field(&f, &om).unwrap();
        let want = FockVector::one_particle(&sp, &f).unwrap().scaled(c(std::f64::consts::FRAC_1_SQRT_2));
        assert!(diff_norm(&phi, &want) < 1e-15);
    }

    #[test]
    fn overflow_is_flagged() {
        let sp = FockSpace::new(2, 1).unwrap();
        let e1 = [c(1.0), c(0.0)];
        let one = create(&e1, &FockVector::vacuum(&sp)).unwrap();
        assert!(!one.overflowed());
        let two = create(&e1, &one).unwrap();
        assert!(two.overflowed());
        assert_eq!(two.norm(), 0.0);
    }

    #[test]
    fn symmetrizer_examples() {
        let e1 = [c(1.0), c(0.0)];
        let e2 = [c(0.0), c(1.0)];
        let outer = |u: &[C], v: &[C]| -> Vec<C> { u.iter().flat_map(|a| v.iter().map(move |b| a * b)).collect() };
        let psi = [C::new(0.3, 0.1), c(-0.7)];
        let pp = outer(&psi, &psi);
        let s = symmetrize(&pp, 2, 2).unwrap();
        assert!(s.iter().zip(&pp).all(|(a, b)| (a - b).norm() < 1e-15));
        let s12 = symmetrize(&outer(&e1, &e2), 2, 2).unwrap();
        assert_eq!(s12, vec![c(0.0), c(0.5), c(0.5), c(0.0)]);
        let a12 = antisymmetrize(&outer(&e1, &e2), 2, 2).unwrap();
        assert_eq!(a12, vec![c(0.0), c(0.5), c(-0.5), c(0.0)]);
        assert!(matches!(symmetrize(&vec![c(0.0); 7usize.pow(4)], 7, 4), Err(YmError::Capacity { .. })));
    }

    #[test]
    fn dgamma_spectrum_examples() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![c(1.0), c(2.0)]));
        assert_eq!(dgamma_spectrum(&a, 2).unwrap(), vec![2.0, 3.0, 4.0]);
        let b = DMatrix::from_diagonal(&DVector::from_vec(vec![c(0.0), c(5.0)]));
        assert_eq!(dgamma_spectrum(&b, 3).unwrap(), vec![0.0, 5.0, 10.0, 15.0]);
        let k = kronecker_sum_spectrum(&a, 2).unwrap();
        assert!(k.iter().zip([2.0, 3.0, 4.0]).all(|(x, y)| (x - y).abs() < 1e-12));
        let bad = DMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]);
        assert!(dgamma_spectrum(&bad, 2).is_err());
    }

    #[test]
    fn gamma_trivial_cases() {
        let sp = FockSpace::new(3, 3).unwrap();
        let id = gamma(&sp, &DMatrix::identity(3, 3)).unwrap();
        let mut s = UniformStream::new(2);
        let v = random_state(&sp, &mut s, 3);
        assert!(diff_norm(&id.apply(&v).unwrap(), &v) < 1e-15);
        let u = random_unitary(&mut s, 3);
        let gu = gamma(&sp, &u).unwrap();
        let om = FockVector::vacuum(&sp);
        assert!(diff_norm(&gu.apply(&om).unwrap(), &om) < 1e-15);
        let m = gu.dense();
        let n = m.nrows();
        assert!((m.adjoint() * &m - DMatrix::<C>::identity(n, n)).norm() < 1e-12);
        assert!(gamma(&sp, &DMatrix::identity(3, 3).scale(2.0)).is_err());
    }

    #[test]
    fn smeared_vectors() {
        let grid = Grid::new(4, 1.0).unwrap();
        let zero = vec![ZERO; 64];
        assert!(smeared_field_vector(&grid, 3, &zero, 2, 1).unwrap().iter().all(|c| *c == ZERO));
        let phi: Vec<C> = (0..64).map(|s| if s < 32 { c(1.0) } else { ZERO }).collect();
        let chi: Vec<C> = (0..64).map(|s| if s >= 32 { C::new(0.5, 0.2) } else { ZERO }).collect();
        let u = smeared_field_vector(&grid, 3, &phi, 0, 1).unwrap();
        let v = smeared_field_vector(&grid, 3, &chi, 0, 1).unwrap();
        assert_eq!(inner_vec(&u, &v), ZERO);
        // quadrature weight: ‖u‖² = ∫|φ|²
        let n2: f64 = u.iter().map(|x| x.norm_sqr()).sum();
        assert!((n2 - 32.0 * grid.cell_volume()).abs() < 1e-14);
    }

    #[test]
    fn default_check_passes() {
        let rep = fock_check(&FockCheckConfig::default()).unwrap();
        for s in &rep.suites {
            assert!(s.pass(), "{s:?}");
        }
    }

    #[test]
    fn vacuum_is_cyclic_at_depth() {
        let sp = FockSpace::new(3, 5).unwrap();
        assert_eq!(suite_cyclic(&sp, &mut UniformStream::new(1)).unwrap(), 0.0);
        let sp = FockSpace::new(1, 4).unwrap();
        assert_eq!(suite_cyclic(&sp, &mut UniformStream::new(1)).unwrap(), 0.0);
    }

    #[test]
    fn reduce_preserves_inner_products() {
        let mut s = UniformStream::new(3);
        let u = random_complex(&mut s, 10, 1.3);
        let v = random_complex(&mut s, 10, 0.4);
        let r = reduce_to_span(&[u.clone(), v.clone()]);
        assert!((inner_vec(&r[0], &r[1]) - inner_vec(&u, &v)).norm() < 1e-14);
        assert!((inner_vec(&r[1], &r[1]) - inner_vec(&v, &v)).norm() < 1e-14);
    }
}

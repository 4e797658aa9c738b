//! Matrix-free symmetric linear algebra: MINRES, block shift-invert subspace
//! iteration, Lanczos extremal estimates, and dense materialization.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Result, YmError};
use crate::random::UniformStream;

const MODULE: &str = "linalg";

/// A real linear map on `R^dim` in plain Euclidean coordinates.
pub trait LinearOperator {
    fn dim(&self) -> usize;
    fn apply_to(&self, x: &[f64], y: &mut [f64]);

    fn apply_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.apply_to(x, &mut y);
        y
    }
}

/// Wrap a closure as an operator.
pub struct FnOperator<F: Fn(&[f64]) -> Vec<f64>> {
    dim: usize,
    f: F,
}

impl<F: Fn(&[f64]) -> Vec<f64>> FnOperator<F> {
    pub fn new(dim: usize, f: F) -> Self {
        Self { dim, f }
    }
}

impl<F: Fn(&[f64]) -> Vec<f64>> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply_to(&self, x: &[f64], y: &mut [f64]) {
        y.copy_from_slice(&(self.f)(x));
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(y: &mut [f64], s: f64, x: &[f64]) {
    y.iter_mut().zip(x).for_each(|(a, b)| *a += s * b);
}

/// Column-by-column materialization.
pub fn to_dense<O: LinearOperator + ?Sized>(op: &O) -> DMatrix<f64> {
    let n = op.dim();
    let mut m = DMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        op.apply_to(&e, &mut col);
        m.column_mut(j).copy_from_slice(&col);
        e[j] = 0.0;
    }
    m
}

#[derive(Debug, Clone, Copy)]
pub struct MinresOutcome {
    pub iterations: usize,
    pub relative_residual: f64,
    pub converged: bool,
}

/// MINRES for `(A − σI)x = b` with symmetric `A`.
pub fn minres<O: LinearOperator + ?Sized>(
    op: &O,
    b: &[f64],
    shift: f64,
    tol: f64,
    max_iter: usize,
) -> (Vec<f64>, MinresOutcome) {
    let n = op.dim();
    let mut x = vec![0.0; n];
    let beta1 = norm(b);
    if beta1 == 0.0 {
        return (
            x,
            MinresOutcome {
                iterations: 0,
                relative_residual: 0.0,
                converged: true,
            },
        );
    }
    let mut r1 = b.to_vec();
    let mut r2 = b.to_vec();
    let mut y = b.to_vec();
    let mut v = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut w1;
    let mut w2 = vec![0.0; n];
    let (mut oldb, mut beta) = (0.0, beta1);
    let (mut dbar, mut epsln, mut phibar) = (0.0, 0.0, beta1);
    let (mut cs, mut sn) = (-1.0f64, 0.0f64);
    let mut iterations = 0;
    for itn in 1..=max_iter {
        iterations = itn;
        let s = 1.0 / beta;
        v.iter_mut().zip(&y).for_each(|(vi, yi)| *vi = s * yi);
        op.apply_to(&v, &mut y);
        axpy(&mut y, -shift, &v);
        if itn >= 2 {
            axpy(&mut y, -beta / oldb, &r1);
        }
        let alfa = dot(&v, &y);
        axpy(&mut y, -alfa / beta, &r2);
        std::mem::swap(&mut r1, &mut r2);
        r2.copy_from_slice(&y);
        oldb = beta;
        beta = norm(&r2);
        let oldeps = epsln;
        let delta = cs * dbar + sn * alfa;
        let gbar = sn * dbar - cs * alfa;
        epsln = sn * beta;
        dbar = -cs * beta;
        let gamma = gbar.hypot(beta).max(f64::EPSILON);
        cs = gbar / gamma;
        sn = beta / gamma;
        let phi = cs * phibar;
        phibar *= sn;
        w1 = std::mem::replace(&mut w2, w.clone());
        for k in 0..n {
            w[k] = (v[k] - oldeps * w1[k] - delta * w2[k]) / gamma;
        }
        axpy(&mut x, phi, &w);
        if phibar.abs() / beta1 < tol || beta == 0.0 {
            break;
        }
    }
    let mut r = op.apply_vec(&x);
    axpy(&mut r, -shift, &x);
    for k in 0..n {
        r[k] = b[k] - r[k];
    }
    let rel = norm(&r) / beta1;
    (
        x,
        MinresOutcome {
            iterations,
            relative_residual: rel,
            converged: rel < tol.max(1e-15) * 10.0,
        },
    )
}

/// Modified Gram–Schmidt, applied twice; columns with negligible remainder
/// are replaced by fresh draws.
fn orthonormalize(block: &mut [Vec<f64>], stream: &mut UniformStream) {
    for j in 0..block.len() {
        for _attempt in 0..4 {
            let before = norm(&block[j]);
            for _pass in 0..2 {
                for i in 0..j {
                    let c = dot(&block[i], &block[j]);
                    let (head, tail) = block.split_at_mut(j);
                    axpy(&mut tail[0], -c, &head[i]);
                }
            }
            let nj = norm(&block[j]);
            if nj > 1e-10 * before.max(f64::MIN_POSITIVE) && nj > 0.0 {
                block[j].iter_mut().for_each(|v| *v /= nj);
                break;
            }
            let len = block[j].len();
            block[j] = stream.fill(len);
        }
    }
}

/// Eigenpairs of a symmetric operator, ascending by value.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
}

/// Dense symmetric eigendecomposition, ascending.
pub fn dense_symmetric_eigen(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vecs = DMatrix::from_columns(&order.iter().map(|&i| eig.eigenvectors.column(i).into_owned()).collect::<Vec<_>>());
    (vals, vecs)
}

#[derive(Debug, Clone, Copy)]
pub struct SubspaceOptions {
    pub shift: f64,
    pub tol: f64,
    pub guard: usize,
    pub max_outer: usize,
    pub inner_tol: f64,
    pub max_inner: usize,
    pub seed: u64,
}

impl Default for SubspaceOptions {
    fn default() -> Self {
        Self {
            shift: 1e-3,
            tol: 1e-9,
            guard: 24,
            max_outer: 200,
            inner_tol: 1e-13,
            max_inner: 5000,
            seed: 0x5eed,
        }
    }
}

/// The `m` eigenpairs nearest zero of a symmetric operator, by block
/// shift-invert subspace iteration with Rayleigh–Ritz extraction.
///
/// `tol` bounds `‖Aψ − λψ‖` for unit `ψ`.
pub fn eigs_nearest_zero<O: LinearOperator + ?Sized>(op: &O, m: usize, opts: &SubspaceOptions) -> Result<EigenPairs> {
    let n = op.dim();
    if m == 0 {
        return Ok(EigenPairs {
            values: vec![],
            vectors: vec![],
            residuals: vec![],
            iterations: 0,
        });
    }
    if m > n {
        return Err(YmError::domain(MODULE, format!("requested {m} eigenpairs of a {n}-dimensional operator")));
    }
    let mut bsize = (m + opts.guard.max(m)).min(n);
    let mut stream = UniformStream::new(opts.seed);
    let mut block: Vec<Vec<f64>> = (0..bsize).map(|_| stream.fill(n)).collect();
    orthonormalize(&mut block, &mut stream);
    let mut worst = f64::INFINITY;
    for outer in 1..=opts.max_outer {
        // tight clusters straddling the block edge stall; widen the block
        if outer % 30 == 0 && bsize < n {
            let grow = (bsize + m).min(n) - bsize;
            block.extend((0..grow).map(|_| stream.fill(n)));
            bsize += grow;
            orthonormalize(&mut block, &mut stream);
        }
        let mut next: Vec<Vec<f64>> = block
            .iter()
            .map(|q| minres(op, q, opts.shift, opts.inner_tol, opts.max_inner).0)
            .collect();
        orthonormalize(&mut next, &mut stream);
        let aq: Vec<Vec<f64>> = next.iter().map(|q| op.apply_vec(q)).collect();
        let h = DMatrix::from_fn(bsize, bsize, |i, j| 0.5 * (dot(&next[i], &aq[j]) + dot(&next[j], &aq[i])));
        let (theta, u) = dense_symmetric_eigen(&h);
        let rot = |cols: &[Vec<f64>], k: usize| -> Vec<f64> {
            let mut out = vec![0.0; n];
            for (j, c) in cols.iter().enumerate() {
                axpy(&mut out, u[(j, k)], c);
            }
            out
        };
        let ritz: Vec<Vec<f64>> = (0..bsize).map(|k| rot(&next, k)).collect();
        let aritz: Vec<Vec<f64>> = (0..bsize).map(|k| rot(&aq, k)).collect();
        let mut idx: Vec<usize> = (0..bsize).collect();
        idx.sort_by(|&a, &b| theta[a].abs().total_cmp(&theta[b].abs()));
        let chosen = &idx[..m];
        let residuals: Vec<f64> = chosen
            .iter()
            .map(|&k| {
                let mut r = aritz[k].clone();
                axpy(&mut r, -theta[k], &ritz[k]);
                norm(&r)
            })
            .collect();
        worst = residuals.iter().cloned().fold(0.0, f64::max);
        block = ritz;
        if worst < opts.tol {
            let mut pairs: Vec<(f64, Vec<f64>, f64)> = chosen
                .iter()
                .zip(&residuals)
                .map(|(&k, &r)| (theta[k], block[k].clone(), r))
                .collect();
            pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
            return Ok(EigenPairs {
                values: pairs.iter().map(|p| p.0).collect(),
                residuals: pairs.iter().map(|p| p.2).collect(),
                vectors: pairs.into_iter().map(|p| p.1).collect(),
                iterations: outer,
            });
        }
    }
    Err(YmError::numerical(
        MODULE,
        format!("shift-invert iteration did not converge: worst residual {worst:e} after {} sweeps", opts.max_outer),
    ))
}

/// Smallest and largest eigenvalue estimates of a symmetric operator from
/// `steps` Lanczos steps with full reorthogonalization.
pub fn lanczos_extremes<O: LinearOperator + ?Sized>(op: &O, steps: usize, seed: u64) -> (f64, f64) {
    let n = op.dim();
    let k = steps.min(n).max(1);
    let mut stream = UniformStream::new(seed);
    let mut q = stream.fill(n);
    let q0 = norm(&q);
    q.iter_mut().for_each(|v| *v /= q0);
    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alpha = Vec::with_capacity(k);
    let mut beta: Vec<f64> = Vec::with_capacity(k);
    for j in 0..k {
        let mut w = op.apply_vec(&basis[j]);
        let a = dot(&w, &basis[j]);
        alpha.push(a);
        for _pass in 0..2 {
            for b in &basis {
                let c = dot(&w, b);
                axpy(&mut w, -c, b);
            }
        }
        let bn = norm(&w);
        if j + 1 == k || bn < 1e-12 * a.abs().max(1.0) {
            break;
        }
        beta.push(bn);
        w.iter_mut().for_each(|v| *v /= bn);
        basis.push(w);
    }
    let m = alpha.len();
    let t = DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            alpha[i]
        } else if i + 1 == j {
            beta[i]
        } else if j + 1 == i {
            beta[j]
        } else {
            0.0
        }
    });
    let (vals, _) = dense_symmetric_eigen(&t);
    (vals[0], vals[m - 1])
}

/// Largest singular value estimate of `op` given its adjoint, by power
/// iteration on `AᵀA`.
pub fn operator_norm_estimate<O, T>(op: &O, adjoint: &T, iterations: usize, seed: u64) -> f64
where
    O: LinearOperator + ?Sized,
    T: LinearOperator + ?Sized,
{
    let n = op.dim();
    let mut x = UniformStream::new(seed).fill(n);
    let mut est = 0.0;
    for _ in 0..iterations.max(1) {
        let nx = norm(&x);
        if nx == 0.0 {
            return 0.0;
        }
        x.iter_mut().for_each(|v| *v /= nx);
        let ax = op.apply_vec(&x);
        est = norm(&ax);
        x = adjoint.apply_vec(&ax);
    }
    est
}

pub fn dvector(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Diag(Vec<f64>);

    impl LinearOperator for Diag {
        fn dim(&self) -> usize {
            self.0.len()
        }
        fn apply_to(&self, x: &[f64], y: &mut [f64]) {
            for k in 0..x.len() {
                y[k] = self.0[k] * x[k];
            }
        }
    }

    fn test_matrix(n: usize) -> DMatrix<f64> {
        let mut s = UniformStream::new(11);
        let a = DMatrix::from_fn(n, n, |_, _| s.next_unit());
        let q = a.qr().q();
        let d = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| -(i as f64) * 0.5 + 1.2));
        &q * d * q.transpose()
    }

    struct Dense(DMatrix<f64>);

    impl LinearOperator for Dense {
        fn dim(&self) -> usize {
            self.0.nrows()
        }
        fn apply_to(&self, x: &[f64], y: &mut [f64]) {
            y.copy_from_slice((&self.0 * dvector(x)).as_slice());
        }
    }

    #[test]
    fn minres_solves_indefinite_system() {
        let m = test_matrix(30);
        let op = Dense(m.clone());
        let b: Vec<f64> = (0..30).map(|i| (i as f64).cos()).collect();
        let (x, out) = minres(&op, &b, 0.1, 1e-13, 500);
        assert!(out.converged, "{out:?}");
        let r = (&m - DMatrix::identity(30, 30) * 0.1) * dvector(&x) - dvector(&b);
        assert!(r.norm() < 1e-11);
    }

    #[test]
    fn subspace_matches_dense_nearest_zero() {
        let m = test_matrix(40);
        let op = Dense(m.clone());
        let got = eigs_nearest_zero(&op, 4, &SubspaceOptions::default()).unwrap();
        let (vals, _) = dense_symmetric_eigen(&m);
        let mut near: Vec<f64> = vals.clone();
        near.sort_by(|a, b| a.abs().total_cmp(&b.abs()));
        let mut want = near[..4].to_vec();
        want.sort_by(f64::total_cmp);
        for (g, w) in got.values.iter().zip(&want) {
            assert!((g - w).abs() < 1e-10, "{g} vs {w}");
        }
    }

    #[test]
    fn degenerate_cluster_converges() {
        let d: Vec<f64> = (0..50).map(|i| -((i / 5) as f64)).collect();
        let got = eigs_nearest_zero(&Diag(d), 5, &SubspaceOptions::default()).unwrap();
        assert!(got.values.iter().all(|v| v.abs() < 1e-10));
        assert!(got.residuals.iter().all(|r| *r < 1e-9));
    }

    #[test]
    fn lanczos_and_power_bounds() {
        let d: Vec<f64> = (0..60).map(|i| i as f64 * 0.1 - 2.0).collect();
        let (lo, hi) = lanczos_extremes(&Diag(d.clone()), 60, 3);
        assert!((lo + 2.0).abs() < 1e-9 && (hi - 3.9).abs() < 1e-9);
        let est = operator_norm_estimate(&Diag(d.clone()), &Diag(d), 300, 1);
        assert!((est - 3.9).abs() < 1e-3);
    }
}

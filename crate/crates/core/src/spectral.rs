//! Three-dimensional FFT plumbing on an `N³` periodic grid.
//!
//! Convention (fixed, see `docs/format.md`): forward transform
//! `F(m) = Σ_x f(x) e^{-2πi m·x/N}`, inverse carries the `1/N³` factor.
//! Sites are flattened as `(x₁·N + x₂)·N + x₃`, the same order is used for
//! Fourier modes.

use std::cell::RefCell;
use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

thread_local! {
    static PLANS: RefCell<PlanCache> = RefCell::new(PlanCache::default());
}

struct PlanCache {
    planner: FftPlanner<f64>,
    forward: HashMap<usize, Arc<dyn Fft<f64>>>,
    inverse: HashMap<usize, Arc<dyn Fft<f64>>>,
}

impl Default for PlanCache {
    fn default() -> Self {
        Self {
            planner: FftPlanner::new(),
            forward: HashMap::new(),
            inverse: HashMap::new(),
        }
    }
}

fn plan(n: usize, inverse: bool) -> Arc<dyn Fft<f64>> {
    PLANS.with(|cell| {
        let mut cache = cell.borrow_mut();
        let PlanCache {
            planner,
            forward,
            inverse: inv,
        } = &mut *cache;
        let map = if inverse { inv } else { forward };
        map.entry(n)
            .or_insert_with(|| {
                if inverse {
                    planner.plan_fft_inverse(n)
                } else {
                    planner.plan_fft_forward(n)
                }
            })
            .clone()
    })
}

/// Unnormalized in-place 3D transform along all three axes.
pub(crate) fn fft3_inplace(data: &mut [Complex64], n: usize, inverse: bool) {
    debug_assert_eq!(data.len(), n * n * n);
    let fft = plan(n, inverse);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    // axis 3 is contiguous
    for line in data.chunks_exact_mut(n) {
        fft.process_with_scratch(line, &mut scratch);
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    // axis 2
    for x1 in 0..n {
        for x3 in 0..n {
            for x2 in 0..n {
                buf[x2] = data[(x1 * n + x2) * n + x3];
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for x2 in 0..n {
                data[(x1 * n + x2) * n + x3] = buf[x2];
            }
        }
    }
    // axis 1
    for x2 in 0..n {
        for x3 in 0..n {
            for x1 in 0..n {
                buf[x1] = data[(x1 * n + x2) * n + x3];
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for x1 in 0..n {
                data[(x1 * n + x2) * n + x3] = buf[x1];
            }
        }
    }
}

pub(crate) fn forward(values: &[f64], n: usize) -> Vec<Complex64> {
    let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft3_inplace(&mut data, n, false);
    data
}

/// Inverse transform returning the real part, normalized by `1/N³`.
pub(crate) fn inverse_real(mut spectrum: Vec<Complex64>, n: usize) -> Vec<f64> {
    fft3_inplace(&mut spectrum, n, true);
    let scale = 1.0 / (n * n * n) as f64;
    spectrum.into_iter().map(|c| c.re * scale).collect()
}

/// Signed integer wave index of FFT bin `k` on an `n`-point axis; the
/// Nyquist bin maps to `+n/2`.
#[inline]
pub(crate) fn signed_mode(k: usize, n: usize) -> i64 {
    if k <= n / 2 {
        k as i64
    } else {
        k as i64 - n as i64
    }
}

#[inline]
pub(crate) fn is_nyquist(k: usize, n: usize) -> bool {
    n % 2 == 0 && k == n / 2
}

/// Mode triple of a flattened index.
#[inline]
pub(crate) fn mode_triple(idx: usize, n: usize) -> [usize; 3] {
    [idx / (n * n), (idx / n) % n, idx % n]
}

/// Zero-padding interpolation between an `N³` grid and a `(2N)³` grid.
///
/// Nyquist bins of the coarse grid are dropped in both directions, so
/// `truncate` is exactly `pad`ᵀ / 8 and products formed on the fine grid
/// carry no aliasing back onto retained modes.
#[derive(Debug)]
pub(crate) struct Dealiaser {
    n: usize,
    map: Vec<(usize, usize)>,
}

impl Dealiaser {
    pub(crate) fn new(n: usize) -> Self {
        let m = 2 * n;
        let mut map = Vec::new();
        for idx in 0..n * n * n {
            let t = mode_triple(idx, n);
            if t.iter().any(|&k| is_nyquist(k, n)) {
                continue;
            }
            let fine: Vec<usize> = t
                .iter()
                .map(|&k| {
                    let s = signed_mode(k, n);
                    if s >= 0 {
                        s as usize
                    } else {
                        (s + m as i64) as usize
                    }
                })
                .collect();
            map.push((idx, (fine[0] * m + fine[1]) * m + fine[2]));
        }
        Self { n, map }
    }

    /// Fine-grid samples of the band-limited interpolant of a coarse spectrum.
    pub(crate) fn pad(&self, coarse: &[Complex64]) -> Vec<f64> {
        let m = 2 * self.n;
        let mut fine = vec![Complex64::new(0.0, 0.0); m * m * m];
        for &(c, f) in &self.map {
            fine[f] = coarse[c] * 8.0;
        }
        inverse_real(fine, m)
    }

    /// Coarse spectrum of the low-pass truncation of a fine-grid field.
    pub(crate) fn truncate(&self, fine: &[f64]) -> Vec<Complex64> {
        let m = 2 * self.n;
        let spec = forward(fine, m);
        let mut coarse = vec![Complex64::new(0.0, 0.0); self.n * self.n * self.n];
        for &(c, f) in &self.map {
            coarse[c] = spec[f] / 8.0;
        }
        coarse
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip_is_identity() {
        let n = 4;
        let vals: Vec<f64> = (0..64).map(|i| ((i * 37 % 11) as f64).sin()).collect();
        let back = inverse_real(forward(&vals, n), n);
        for (a, b) in vals.iter().zip(&back) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn truncate_is_scaled_adjoint_of_pad() {
        let n = 4;
        let d = Dealiaser::new(n);
        let u: Vec<f64> = (0..64).map(|i| ((i * 13 % 7) as f64 - 3.0) * 0.3).collect();
        let w: Vec<f64> = (0..512).map(|i| ((i * 29 % 17) as f64 - 8.0) * 0.1).collect();
        let tw = inverse_real(d.truncate(&w), n);
        let pu = d.pad(&forward(&u, n));
        let lhs: f64 = u.iter().zip(&tw).map(|(a, b)| a * b).sum();
        let rhs: f64 = pu.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / 8.0;
        assert!((lhs - rhs).abs() < 1e-12);
    }
}

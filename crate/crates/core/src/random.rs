//! Seeded, platform-independent random fields.
//!
//! The generator is ChaCha20 (RFC 8439 block function, 20 rounds) keyed with
//! the 64-bit seed in little-endian order in the first eight key bytes, the
//! remaining key bytes zero, stream 0, counter starting at 0. Each draw takes
//! one `u64` and maps it to `[-1, 1)` via `2·(u >> 11)·2⁻⁵³ − 1`. Slots are
//! filled in storage order (site-major, color, direction).

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::lattice::{transverse_project, ColorScalarField, FieldKind, Grid, LatticeField};
use crate::spectral;

/// Shape of the Fourier spectrum of a random field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpectrumShape {
    White,
    /// Keep only modes with `max_j |m_j| ≤ p_max` (integer wave indices).
    BandLimited { p_max: u32 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomFieldSpec {
    pub seed: u64,
    pub shape: SpectrumShape,
    /// Root-mean-square value per slot of the generated field.
    pub amplitude: f64,
    pub transverse: bool,
}

impl RandomFieldSpec {
    pub fn white(seed: u64, amplitude: f64, transverse: bool) -> Self {
        Self {
            seed,
            shape: SpectrumShape::White,
            amplitude,
            transverse,
        }
    }

    pub fn band_limited(seed: u64, p_max: u32, amplitude: f64, transverse: bool) -> Self {
        Self {
            seed,
            shape: SpectrumShape::BandLimited { p_max },
            amplitude,
            transverse,
        }
    }
}

/// The documented stream of uniform draws in `[-1, 1)`.
pub struct UniformStream {
    rng: ChaCha20Rng,
}

impl UniformStream {
    pub fn new(seed: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        Self {
            rng: ChaCha20Rng::from_seed(key),
        }
    }

    pub fn next_unit(&mut self) -> f64 {
        let u = self.rng.next_u64() >> 11;
        2.0 * (u as f64) * (1.0 / (1u64 << 53) as f64) - 1.0
    }

    pub fn fill(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.next_unit()).collect()
    }

    /// Standard normal draw (Box-Muller on two uniform draws).
    pub fn next_normal(&mut self) -> f64 {
        let u1 = 0.5 * (self.next_unit() + 1.0);
        let u2 = 0.5 * (self.next_unit() + 1.0);
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        r * (2.0 * std::f64::consts::PI * u2).cos()
    }
}

fn band_limit(grid: &Grid, values: &[f64], p_max: u32) -> Vec<f64> {
    let n = grid.n();
    let mut spec = spectral::forward(values, n);
    for (m, c) in spec.iter_mut().enumerate() {
        if grid.mode_numbers(m).iter().any(|k| k.unsigned_abs() > u64::from(p_max)) {
            *c = 0.0.into();
        }
    }
    spectral::inverse_real(spec, n)
}

fn normalize_rms(data: &mut [f64], amplitude: f64) {
    let rms = (data.iter().map(|v| v * v).sum::<f64>() / data.len() as f64).sqrt();
    let s = if rms > 0.0 { amplitude / rms } else { 0.0 };
    data.iter_mut().for_each(|v| *v *= s);
}

/// Deterministic random vector field on `grid` with `colors` colors.
pub fn generate_field(grid: Grid, colors: usize, kind: FieldKind, spec: &RandomFieldSpec) -> LatticeField {
    let mut stream = UniformStream::new(spec.seed);
    let raw = stream.fill(grid.sites() * colors * 3);
    let mut field = LatticeField::from_vec(grid, colors, kind, raw).expect("finite draws");
    if let SpectrumShape::BandLimited { p_max } = spec.shape {
        for a in 0..colors {
            for i in 0..3 {
                let v = band_limit(&grid, &field.component(a, i), p_max);
                field.set_component(a, i, &v);
            }
        }
    }
    if spec.transverse {
        field = transverse_project(&field);
    }
    normalize_rms(field.data_mut(), spec.amplitude);
    field
}

/// Deterministic random color-scalar field (used for probes).
pub fn generate_scalar(grid: Grid, colors: usize, seed: u64, shape: SpectrumShape, amplitude: f64) -> ColorScalarField {
    let mut stream = UniformStream::new(seed);
    let raw = stream.fill(grid.sites() * colors);
    let mut f = ColorScalarField::from_vec(grid, colors, raw).expect("shape");
    if let SpectrumShape::BandLimited { p_max } = shape {
        for a in 0..colors {
            let v = band_limit(&grid, &f.component(a), p_max);
            f.set_component(a, &v);
        }
    }
    normalize_rms(f.data_mut(), amplitude);
    f
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::coulomb_residual;

    #[test]
    fn same_seed_same_bytes() {
        let grid = Grid::new(4, 1.0).unwrap();
        let spec = RandomFieldSpec::white(42, 1.0, true);
        let a = generate_field(grid, 3, FieldKind::Potential, &spec);
        let b = generate_field(grid, 3, FieldKind::Potential, &spec);
        let bytes = |f: &LatticeField| f.data().iter().flat_map(|v| v.to_le_bytes()).collect::<Vec<u8>>();
        assert_eq!(bytes(&a), bytes(&b));
        let c = generate_field(grid, 3, FieldKind::Potential, &RandomFieldSpec::white(43, 1.0, true));
        assert_ne!(bytes(&a), bytes(&c));
    }

    #[test]
    fn transverse_and_zero_amplitude() {
        let grid = Grid::new(6, 2.0).unwrap();
        let a = generate_field(grid, 3, FieldKind::Potential, &RandomFieldSpec::band_limited(5, 1, 1.0, true));
        assert!(coulomb_residual(&a) < 1e-10);
        let rms = (a.data().iter().map(|v| v * v).sum::<f64>() / a.data().len() as f64).sqrt();
        assert!((rms - 1.0).abs() < 1e-12);
        let z = generate_field(grid, 3, FieldKind::Potential, &RandomFieldSpec::white(5, 0.0, true));
        assert_eq!(z.max_abs(), 0.0);
    }

    #[test]
    fn uniform_stream_range_and_first_values_stable() {
        let mut s = UniformStream::new(0);
        let v = s.fill(1000);
        assert!(v.iter().all(|x| (-1.0..1.0).contains(x)));
        let mean = v.iter().sum::<f64>() / 1000.0;
        assert!(mean.abs() < 0.1);
    }
}

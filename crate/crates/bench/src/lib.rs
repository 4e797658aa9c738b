//! Shared fixtures for the benchmarks.

use ymc_core::random::{generate_field, generate_scalar, RandomFieldSpec, SpectrumShape};
use ymc_core::{ColorScalarField, FieldKind, Grid, LatticeField};

/// Periodic box of side `2π` with `n³` sites.
pub fn grid(n: usize) -> Grid {
    Grid::new(n, 2.0 * std::f64::consts::PI).expect("valid grid")
}

/// Seeded transverse `(A, E)` pair with three colors.
pub fn fields(n: usize, amplitude: f64) -> (LatticeField, LatticeField) {
    let g = grid(n);
    let a = generate_field(g, 3, FieldKind::Potential, &RandomFieldSpec::white(1, amplitude, true));
    let e = generate_field(g, 3, FieldKind::Momentum, &RandomFieldSpec::white(2, amplitude, true));
    (a, e)
}

/// Seeded color scalar source.
pub fn source(n: usize) -> ColorScalarField {
    generate_scalar(grid(n), 3, 3, SpectrumShape::White, 1.0)
}

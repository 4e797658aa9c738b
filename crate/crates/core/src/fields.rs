//! Curvature components, chromomagnetic field, charge density and energy
//! densities built from lattice gauge potentials.
//!
//! Products of fields are taken pointwise on the grid. Derivatives are
//! spectral. The chromomagnetic field keeps the `1/4` prefactor
//! `B_i^a = ¼ ε_ijk (∂_j A_k^a − ∂_k A_j^a + C^a_{bc} A_j^b A_k^c)`,
//! see `docs/conventions.md`.

use crate::algebra::{StructureConstants, EPS_TRIPLES};
use crate::error::{Result, YmError};
use crate::lattice::{curl, derivative_values, ColorScalarField, FieldKind, Grid, LatticeField};

const MODULE: &str = "fields";

fn check_colors(sc: &StructureConstants, a: &LatticeField) -> Result<()> {
    if a.colors() != sc.colors() {
        return Err(YmError::shape(
            MODULE,
            format!("field has {} colors, algebra has {}", a.colors(), sc.colors()),
        ));
    }
    Ok(())
}

/// Quadratic part `¼ ε_ijk C^a_{bc} A_j^b A_k^c` of the chromomagnetic field.
pub fn chromomagnetic_quadratic(sc: &StructureConstants, a: &LatticeField) -> LatticeField {
    let grid = *a.grid();
    let k = a.colors();
    let mut out = LatticeField::zeros(grid, k, FieldKind::Auxiliary);
    for s in 0..grid.sites() {
        for col in 0..k {
            for (i, j, l, e_ijl) in EPS_TRIPLES {
                let mut acc = 0.0;
                for b in 0..k {
                    for c in 0..k {
                        acc += sc.get(col, b, c) * a.get(s, b, j) * a.get(s, c, l);
                    }
                }
                let v = out.get(s, col, i) + 0.25 * e_ijl * acc;
                out.set(s, col, i, v);
            }
        }
    }
    out
}

/// `B_i^a = ½ (∇×A^a)_i + ¼ ε_ijk C^a_{bc} A_j^b A_k^c`.
pub fn chromomagnetic(sc: &StructureConstants, a: &LatticeField) -> Result<LatticeField> {
    check_colors(sc, a)?;
    if !a.is_finite() {
        return Err(YmError::domain(MODULE, "chromomagnetic: non-finite potential"));
    }
    let linear = curl(a).scaled(0.5);
    let quad = chromomagnetic_quadratic(sc, a);
    Ok(linear.axpy(1.0, &quad).with_kind(FieldKind::Auxiliary))
}

/// `ρ^a = C^a_{bc} E_i^b A_i^c`.
pub fn charge_density(sc: &StructureConstants, a: &LatticeField, e: &LatticeField) -> Result<ColorScalarField> {
    check_colors(sc, a)?;
    a.check_shape(e)?;
    let grid = *a.grid();
    let k = a.colors();
    let mut rho = ColorScalarField::zeros(grid, k);
    for s in 0..grid.sites() {
        for (col, b, c, _) in EPS_TRIPLES {
            let mut dot = 0.0;
            for i in 0..3 {
                dot += e.get(s, b, i) * a.get(s, c, i);
            }
            let v = rho.get(s, col) + sc.get(col, b, c) * dot;
            rho.set(s, col, v);
        }
    }
    Ok(rho)
}

/// Pointwise `½ Σ_{a,i} (E_i^a² + B_i^a²)`, one value per site.
pub fn energy_density(e: &LatticeField, b: &LatticeField) -> Result<Vec<f64>> {
    e.check_shape(b)?;
    let grid = e.grid();
    let k = e.colors();
    Ok((0..grid.sites())
        .map(|s| {
            let mut acc = 0.0;
            for a in 0..k {
                for i in 0..3 {
                    acc += e.get(s, a, i).powi(2) + b.get(s, a, i).powi(2);
                }
            }
            0.5 * acc
        })
        .collect())
}

/// Spacetime potential on one time slice.
#[derive(Debug, Clone)]
pub struct SpacetimePotential {
    /// `A_0^a`; `None` means zero.
    pub temporal: Option<ColorScalarField>,
    /// `A_i^a`.
    pub spatial: LatticeField,
    /// `∂_0 A_i^a`, needed for `F_{0i}`.
    pub time_derivative: Option<LatticeField>,
}

/// Index of the unordered pair `μ < ν` in storage order
/// `(01, 02, 03, 12, 13, 23)`.
fn pair_index(mu: usize, nu: usize) -> usize {
    match (mu, nu) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        (2, 3) => 5,
        _ => unreachable!("pair_index expects mu < nu <= 3"),
    }
}

/// The six independent components `F^k_{μν}`, `μ < ν`, per site and color.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureField {
    grid: Grid,
    colors: usize,
    has_temporal: bool,
    data: Vec<f64>,
}

impl CurvatureField {
    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn has_temporal(&self) -> bool {
        self.has_temporal
    }

    /// `F^k_{μν}(site)` for any `μ, ν ∈ 0..4`; antisymmetric by storage.
    pub fn get(&self, site: usize, color: usize, mu: usize, nu: usize) -> f64 {
        use std::cmp::Ordering;
        match mu.cmp(&nu) {
            Ordering::Equal => 0.0,
            Ordering::Less => self.data[(site * self.colors + color) * 6 + pair_index(mu, nu)],
            Ordering::Greater => -self.get(site, color, nu, mu),
        }
    }

    fn set(&mut self, site: usize, color: usize, mu: usize, nu: usize, v: f64) {
        let k = (site * self.colors + color) * 6 + pair_index(mu, nu);
        self.data[k] = v;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `F^k_{μν} = ½(∂_ν A^k_μ − ∂_μ A^k_ν − C^k_{ab} A^a_μ A^b_ν)`.
///
/// With `include_temporal` the `F_{0i}` components are computed and
/// `time_derivative` must be supplied.
pub fn curvature(sc: &StructureConstants, pot: &SpacetimePotential, include_temporal: bool) -> Result<CurvatureField> {
    let a = &pot.spatial;
    check_colors(sc, a)?;
    let grid = *a.grid();
    let k = a.colors();
    let mut out = CurvatureField {
        grid,
        colors: k,
        has_temporal: include_temporal,
        data: vec![0.0; grid.sites() * k * 6],
    };
    // spatial block: μ, ν ∈ {1,2,3} ↔ directions 0..3
    for col in 0..k {
        let comps: Vec<Vec<f64>> = (0..3).map(|i| a.component(col, i)).collect();
        for i in 0..3 {
            for j in (i + 1)..3 {
                let dj_ai = derivative_values(&grid, &comps[i], j);
                let di_aj = derivative_values(&grid, &comps[j], i);
                for s in 0..grid.sites() {
                    let mut quad = 0.0;
                    for (c, x, y, _) in EPS_TRIPLES {
                        if c == col {
                            quad += sc.get(col, x, y) * a.get(s, x, i) * a.get(s, y, j);
                        }
                    }
                    out.set(s, col, i + 1, j + 1, 0.5 * (dj_ai[s] - di_aj[s] - quad));
                }
            }
        }
    }
    if include_temporal {
        let dt = pot.time_derivative.as_ref().ok_or_else(|| {
            YmError::domain(MODULE, "curvature: temporal components need ∂_0 A_i")
        })?;
        a.check_shape(dt)?;
        let a0 = pot
            .temporal
            .clone()
            .unwrap_or_else(|| ColorScalarField::zeros(grid, k));
        if a0.grid() != &grid || a0.colors() != k {
            return Err(YmError::shape(MODULE, "curvature: A_0 shape mismatch"));
        }
        for col in 0..k {
            let a0c = a0.component(col);
            for i in 0..3 {
                let di_a0 = derivative_values(&grid, &a0c, i);
                for s in 0..grid.sites() {
                    // F_{0i} = ½(∂_i A_0 − ∂_0 A_i − C A_0 A_i)
                    let mut quad = 0.0;
                    for (c, x, y, _) in EPS_TRIPLES {
                        if c == col {
                            quad += sc.get(col, x, y) * a0.get(s, x) * a.get(s, y, i);
                        }
                    }
                    out.set(s, col, 0, i + 1, 0.5 * (di_a0[s] - dt.get(s, col, i) - quad));
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{generate_field, RandomFieldSpec};
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(4, 2.0 * PI).unwrap()
    }

    #[test]
    fn zero_potential_gives_zero_b() {
        let sc = StructureConstants::su2(0.7).unwrap();
        let a = LatticeField::zeros(grid(), 3, FieldKind::Potential);
        assert_eq!(chromomagnetic(&sc, &a).unwrap().max_abs(), 0.0);
    }

    #[test]
    fn single_mode_b_matches_closed_form() {
        // A_2^1 = sin(x_1): curl has (∇×A)_3 = cos(x_1), so B_3^1 = ½ cos(x_1)
        let g = grid();
        let sc = StructureConstants::su2(0.0).unwrap();
        let a = LatticeField::from_fn(g, 3, FieldKind::Potential, |s, col, i| {
            if col == 0 && i == 1 {
                g.position(s)[0].sin()
            } else {
                0.0
            }
        });
        let b = chromomagnetic(&sc, &a).unwrap();
        for s in 0..g.sites() {
            let want = 0.5 * g.position(s)[0].cos();
            assert!((b.get(s, 0, 2) - want).abs() < 1e-13);
            assert!(b.get(s, 0, 0).abs() < 1e-13 && b.get(s, 0, 1).abs() < 1e-13);
        }
    }

    #[test]
    fn single_color_potential_is_abelian() {
        let g = grid();
        let sc = StructureConstants::su2(0.9).unwrap();
        let mut a = generate_field(g, 3, FieldKind::Potential, &RandomFieldSpec::white(4, 1.0, true));
        for s in 0..g.sites() {
            for col in 1..3 {
                for i in 0..3 {
                    a.set(s, col, i, 0.0);
                }
            }
        }
        assert!(chromomagnetic_quadratic(&sc, &a).max_abs() < 1e-15);
        // B linear in A: B(2A) = 2 B(A)
        let b1 = chromomagnetic(&sc, &a).unwrap();
        let b2 = chromomagnetic(&sc, &a.scaled(2.0)).unwrap();
        assert!(b2.axpy(-2.0, &b1).max_abs() < 1e-12);
    }

    #[test]
    fn b_homogeneity_split() {
        let g = grid();
        let sc = StructureConstants::su2(0.4).unwrap();
        let a = generate_field(g, 3, FieldKind::Potential, &RandomFieldSpec::white(9, 1.0, true));
        let lam = 1.7;
        // polarization: B(λA) − λ B_lin(A) = λ² Q(A)
        let lin = curl(&a).scaled(0.5);
        let q = chromomagnetic_quadratic(&sc, &a);
        let bl = chromomagnetic(&sc, &a.scaled(lam)).unwrap();
        let resid = bl.axpy(-lam, &lin).axpy(-lam * lam, &q);
        assert!(resid.max_abs() < 1e-12);
    }

    #[test]
    fn charge_density_examples() {
        let g = grid();
        let sc = StructureConstants::su2(0.3).unwrap();
        let a = generate_field(g, 3, FieldKind::Potential, &RandomFieldSpec::white(1, 1.0, false));
        assert!(charge_density(&sc, &a, &a).unwrap().max_abs() < 1e-15);
        let zero = StructureConstants::su2(0.0).unwrap();
        let e = generate_field(g, 3, FieldKind::Momentum, &RandomFieldSpec::white(2, 1.0, false));
        assert_eq!(charge_density(&zero, &a, &e).unwrap().max_abs(), 0.0);

        // single site: E = e_b ⊗ e_i, A = e_c ⊗ e_i
        let site = 5;
        let (b, c, i) = (0, 2, 1);
        let mut e1 = LatticeField::zeros(g, 3, FieldKind::Momentum);
        let mut a1 = LatticeField::zeros(g, 3, FieldKind::Potential);
        e1.set(site, b, i, 1.0);
        a1.set(site, c, i, 1.0);
        let rho = charge_density(&sc, &a1, &e1).unwrap();
        for col in 0..3 {
            let want = 0.3 * crate::algebra::eps(col, b, c);
            assert!((rho.get(site, col) - want).abs() < 1e-15);
        }
        assert!(charge_density(&sc, &a1, &LatticeField::zeros(Grid::new(6, 1.0).unwrap(), 3, FieldKind::Momentum)).is_err());
    }

    #[test]
    fn charge_density_bilinear() {
        let g = grid();
        let sc = StructureConstants::su2(0.5).unwrap();
        let a = generate_field(g, 3, FieldKind::Potential, &RandomFieldSpec::white(1, 1.0, false));
        let e1 = generate_field(g, 3, FieldKind::Momentum, &RandomFieldSpec::white(2, 1.0, false));
        let e2 = generate_field(g, 3, FieldKind::Momentum, &RandomFieldSpec::white(3, 1.0, false));
        let lhs = charge_density(&sc, &a, &e1.axpy(2.5, &e2)).unwrap();
        let rhs = charge_density(&sc, &a, &e1)
            .unwrap()
            .axpy(2.5, &charge_density(&sc, &a, &e2).unwrap());
        assert!(lhs.axpy(-1.0, &rhs).max_abs() < 1e-13);
    }

    #[test]
    fn energy_density_nonnegative() {
        let g = grid();
        let sc = StructureConstants::su2(0.5).unwrap();
        let a = generate_field(g, 3, FieldKind::Potential, &RandomFieldSpec::white(1, 1.0, true));
        let e = generate_field(g, 3, FieldKind::Momentum, &RandomFieldSpec::white(2, 1.0, true));
        let b = chromomagnetic(&sc, &a).unwrap();
        assert!(energy_density(&e, &b).unwrap().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn curvature_examples() {
        let g = grid();
        let sc = StructureConstants::su2(0.0).unwrap();
        let zero = SpacetimePotential {
            temporal: None,
            spatial: LatticeField::zeros(g, 3, FieldKind::Potential),
            time_derivative: Some(LatticeField::zeros(g, 3, FieldKind::Auxiliary)),
        };
        assert_eq!(curvature(&sc, &zero, true).unwrap().max_abs(), 0.0);

        // A_1^2 = cos(x_2), g = 0: F_12 = ½(∂_2 A_1 − ∂_1 A_2) = −½ sin(x_2)
        let a = LatticeField::from_fn(g, 3, FieldKind::Potential, |s, col, i| {
            if col == 1 && i == 0 {
                g.position(s)[1].cos()
            } else {
                0.0
            }
        });
        let pot = SpacetimePotential {
            temporal: None,
            spatial: a,
            time_derivative: None,
        };
        let f = curvature(&sc, &pot, false).unwrap();
        for s in 0..g.sites() {
            let want = -0.5 * g.position(s)[1].sin();
            assert!((f.get(s, 1, 1, 2) - want).abs() < 1e-13);
            assert_eq!(f.get(s, 1, 2, 1), -f.get(s, 1, 1, 2));
            assert_eq!(f.get(s, 1, 3, 3), 0.0);
        }
        assert!(curvature(&sc, &pot, true).is_err());
    }

    #[test]
    fn curvature_spatial_block_matches_b() {
        // ½ ε_ijk F_jk relates to B via F_jk = −½(∂_j A_k − ∂_k A_j + C A_j A_k)
        let g = grid();
        let sc = StructureConstants::su2(0.35).unwrap();
        let a = generate_field(g, 3, FieldKind::Potential, &RandomFieldSpec::white(8, 0.8, true));
        let f = curvature(
            &sc,
            &SpacetimePotential {
                temporal: None,
                spatial: a.clone(),
                time_derivative: None,
            },
            false,
        )
        .unwrap();
        let b = chromomagnetic(&sc, &a).unwrap();
        for s in 0..g.sites() {
            for col in 0..3 {
                for i in 0..3 {
                    let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                    // B_i = ¼ ε_ijk(...)_jk = ½ (...)_{jk} with j,k cyclic = −F_{jk}
                    let want = -f.get(s, col, j + 1, k + 1);
                    assert!((b.get(s, col, i) - want).abs() < 1e-12);
                }
            }
        }
    }
}

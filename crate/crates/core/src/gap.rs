//! Generalized-eigenvalue gap estimates from the Coulomb term.
//!
//! For a coupling `g`, a site pair `(x₀, y₀)`, a derivative direction `i`
//! and a color `a`, the denominator
//!
//! ```text
//! I = ∫_{−R}^{R} dα / h(α),   h(α) = Σ_b ∂ᵢG^{ab}(A(α); x₀, y₀) s_b(α),
//! s_b(α) = Σ_d ε^{bcd} A(α)_j^d(y₀)
//! ```
//!
//! is integrated along a one-parameter family of transverse backgrounds
//! `A(α)`, with `G` rebuilt by the Born method at every node. The
//! generalized eigenvalues are `λ_k = 2π²g²k²/I²` and `η(g)` is the smallest
//! positive one over the scan.

use std::f64::consts::PI;
use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use gauss_quad::legendre::GaussLegendre;

use crate::algebra::{eps, StructureConstants};
use crate::error::{Result, YmError};
use crate::fields::chromomagnetic;
use crate::greens::{born_radius, ls_slope, GreensMethod, GreensOperator, KernelChoice};
use crate::lattice::{spectral_derivative, transverse_project, ColorScalarField, FieldKind, Grid, LatticeField};
use crate::random::{generate_field, RandomFieldSpec};

const MODULE: &str = "gap";

/// `(1/16)∫[ε_ijk(∂_jA_k − ∂_kA_j + gε A_j A_k)]²`, which equals `∫|B|²`.
pub fn h2_density(sc: &StructureConstants, a: &LatticeField) -> Result<f64> {
    let b = chromomagnetic(sc, a)?;
    Ok(b.data().iter().map(|x| x * x).sum::<f64>() * a.grid().cell_volume())
}

/// Which background family the denominator integrates over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PathFamily {
    /// `A(α) = Â + α·w/w_j^c(y₀)` with `w = T(δ_{y₀} e_j ⊗ e_c)`: the
    /// integration variable is the component `A_j^c(y₀)` itself.
    SingleComponent,
    /// `A(α) = αÂ`.
    Scaled,
}

impl PathFamily {
    pub fn name(self) -> &'static str {
        match self {
            PathFamily::SingleComponent => "single_component",
            PathFamily::Scaled => "scaled",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "single_component" => Some(PathFamily::SingleComponent),
            "scaled" => Some(PathFamily::Scaled),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Gauss–Legendre points per panel.
    pub order: usize,
    /// Initial panel count; doubled until converged.
    pub panels: usize,
    pub max_doublings: usize,
    pub rel_tol: f64,
    /// Subtract the simple pole at each zero of `h` instead of excluding a
    /// window around it.
    pub principal_value: bool,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            order: 8,
            panels: 2,
            max_doublings: 4,
            rel_tol: 1e-6,
            principal_value: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct QuadFlags {
    pub singular_excluded: bool,
    pub principal_value: bool,
    pub unconverged: bool,
    pub degenerate: bool,
}

impl QuadFlags {
    pub fn any(&self) -> bool {
        self.singular_excluded || self.principal_value || self.unconverged || self.degenerate
    }

    fn merge(&mut self, o: QuadFlags) {
        self.singular_excluded |= o.singular_excluded;
        self.principal_value |= o.principal_value;
        self.unconverged |= o.unconverged;
        self.degenerate |= o.degenerate;
    }

    /// `ok` or the raised flags joined by `|`.
    pub fn label(&self) -> String {
        let mut v = Vec::new();
        if self.singular_excluded {
            v.push("singular_excluded");
        }
        if self.principal_value {
            v.push("principal_value");
        }
        if self.unconverged {
            v.push("unconverged");
        }
        if self.degenerate {
            v.push("degenerate");
        }
        if v.is_empty() {
            "ok".to_string()
        } else {
            v.join("|")
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReciprocalIntegral {
    pub value: f64,
    /// Nodes used at the final level.
    pub nodes: usize,
    /// Relative change between the last two levels.
    pub rel_change: f64,
    /// `max |h|⁻¹` over the nodes kept.
    pub max_reciprocal: f64,
    pub flags: QuadFlags,
}

fn composite_nodes(rule: &GaussLegendre, r: f64, panels: usize) -> Vec<(f64, f64)> {
    let width = 2.0 * r / panels as f64;
    let mut out = Vec::with_capacity(panels * rule.as_node_weight_pairs().len());
    for p in 0..panels {
        let lo = -r + p as f64 * width;
        for &(x, w) in rule.as_node_weight_pairs() {
            out.push((lo + 0.5 * width * (x + 1.0), 0.5 * width * w));
        }
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out
}

/// One level of `∫ dα/h` from node values.
fn reciprocal_level(nodes: &[(f64, f64)], h: &[f64], r: f64, pv: bool) -> std::result::Result<ReciprocalIntegral, ()> {
    let scale = h.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 || !scale.is_finite() {
        return Err(());
    }
    let tiny = 1e-14 * scale;
    // zeros of h: sign changes between neighbours, located by linear
    // interpolation, with the local slope
    let mut zeros: Vec<(f64, f64)> = Vec::new();
    for k in 0..nodes.len() - 1 {
        let (a0, a1) = (nodes[k].0, nodes[k + 1].0);
        let (h0, h1) = (h[k], h[k + 1]);
        if h0.abs() <= tiny {
            continue;
        }
        if h0.signum() != h1.signum() || h1.abs() <= tiny {
            let slope = (h1 - h0) / (a1 - a0);
            zeros.push((a0 - h0 / slope, slope));
        }
    }
    let spacing = 2.0 * r / nodes.len() as f64;
    let mut flags = QuadFlags::default();
    let mut value = 0.0;
    let mut max_reciprocal: f64 = 0.0;
    if pv && !zeros.is_empty() {
        flags.principal_value = true;
        for (&(x, w), &hx) in nodes.iter().zip(h) {
            if hx.abs() <= tiny || zeros.iter().any(|(z, _)| (x - z).abs() < 1e-12 * r) {
                continue;
            }
            let pole: f64 = zeros.iter().map(|(z, s)| 1.0 / (s * (x - z))).sum();
            value += w * (1.0 / hx - pole);
            max_reciprocal = max_reciprocal.max(1.0 / hx.abs());
        }
        for (z, s) in &zeros {
            value += ((r - z) / (r + z)).abs().ln() / s;
        }
    } else {
        for (&(x, w), &hx) in nodes.iter().zip(h) {
            let near = zeros.iter().any(|(z, _)| (x - z).abs() < spacing);
            if near || hx.abs() <= tiny {
                flags.singular_excluded = true;
                continue;
            }
            value += w / hx;
            max_reciprocal = max_reciprocal.max(1.0 / hx.abs());
        }
        flags.singular_excluded |= !zeros.is_empty();
    }
    Ok(ReciprocalIntegral {
        value,
        nodes: nodes.len(),
        rel_change: f64::NAN,
        max_reciprocal,
        flags,
    })
}

/// `∫_{−r}^{r} dα/h_m(α)` for every component `m` of a vector-valued `h`,
/// refining all components together until each is converged or the
/// doubling budget is spent.
pub fn integrate_reciprocals<F>(mut h: F, r: f64, components: usize, opts: &QuadratureOptions) -> Result<Vec<ReciprocalIntegral>>
where
    F: FnMut(f64) -> Result<Vec<f64>>,
{
    if !(r > 0.0) || opts.order == 0 || opts.panels == 0 {
        return Err(YmError::domain(MODULE, "quadrature needs r > 0, order ≥ 1 and panels ≥ 1"));
    }
    let rule = GaussLegendre::new(NonZeroUsize::new(opts.order).expect("order ≥ 1"));
    let mut prev: Option<Vec<ReciprocalIntegral>> = None;
    let mut panels = opts.panels;
    for level in 0..=opts.max_doublings {
        let nodes = composite_nodes(&rule, r, panels);
        let mut vals = vec![Vec::with_capacity(nodes.len()); components];
        for &(x, _) in &nodes {
            let hv = h(x)?;
            if hv.len() != components {
                return Err(YmError::shape(MODULE, "integrand returned the wrong number of components"));
            }
            for (m, v) in hv.into_iter().enumerate() {
                vals[m].push(v);
            }
        }
        let mut cur = Vec::with_capacity(components);
        for v in &vals {
            match reciprocal_level(&nodes, v, r, opts.principal_value) {
                Ok(q) => cur.push(q),
                Err(()) => {
                    return Err(YmError::numerical(MODULE, "integrand vanishes on every quadrature node (degenerate family)"));
                }
            }
        }
        if let Some(p) = &prev {
            for (c, q) in cur.iter_mut().zip(p) {
                c.rel_change = (c.value - q.value).abs() / c.value.abs().max(f64::MIN_POSITIVE);
                c.flags.merge(QuadFlags {
                    singular_excluded: q.flags.singular_excluded,
                    principal_value: q.flags.principal_value,
                    ..QuadFlags::default()
                });
            }
            if cur.iter().all(|c| c.rel_change < opts.rel_tol) {
                return Ok(cur);
            }
        }
        if level == opts.max_doublings {
            for c in &mut cur {
                c.flags.unconverged = !(c.rel_change < opts.rel_tol);
            }
            return Ok(cur);
        }
        prev = Some(cur);
        panels *= 2;
    }
    unreachable!("loop returns at the last level")
}

/// Scalar convenience wrapper around [`integrate_reciprocals`].
pub fn integrate_reciprocal(h: impl Fn(f64) -> f64, r: f64, opts: &QuadratureOptions) -> Result<ReciprocalIntegral> {
    Ok(integrate_reciprocals(|x| Ok(vec![h(x)]), r, 1, opts)?.remove(0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SitePair {
    pub x0: [usize; 3],
    pub y0: [usize; 3],
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapScanConfig {
    pub grid: Grid,
    pub colors: usize,
    pub g_list: Vec<f64>,
    /// Half-range of the amplitude integral.
    pub r_amp: f64,
    pub profile_seed: u64,
    pub sites: Vec<SitePair>,
    /// Derivative directions `i`.
    pub directions: Vec<usize>,
    /// Colors `a` of the Green's function row.
    pub color_indices: Vec<usize>,
    /// Integrated component `A_j^c(y₀)`.
    pub j: usize,
    pub c: usize,
    pub k_max: usize,
    pub n_terms: usize,
    pub path: PathFamily,
    pub quadrature: QuadratureOptions,
}

impl GapScanConfig {
    /// Four couplings, four site pairs with odd separations, every direction,
    /// and the colors `a ≠ c`.
    pub fn new(grid: Grid, colors: usize) -> Self {
        let n = grid.n();
        let m = |v: usize| v % n;
        let sites = vec![
            SitePair { x0: [m(1), m(1), m(1)], y0: [0, 0, 0] },
            SitePair { x0: [m(3), m(1), m(2)], y0: [m(2), 0, m(1)] },
            SitePair { x0: [m(3), m(1), m(1)], y0: [0, m(2), m(2)] },
            SitePair { x0: [m(2), m(2), m(3)], y0: [m(1), m(3), 0] },
        ];
        Self {
            grid,
            colors,
            g_list: vec![0.05, 0.1, 0.2, 0.4],
            r_amp: 0.5,
            profile_seed: 11,
            sites,
            directions: vec![0, 1, 2],
            color_indices: (1..colors).collect(),
            j: 0,
            c: 0,
            k_max: 2,
            n_terms: 6,
            path: PathFamily::SingleComponent,
            quadrature: QuadratureOptions::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.grid.n();
        let bad = |m: String| Err(YmError::domain(MODULE, m));
        if self.g_list.is_empty() || self.g_list.iter().any(|g| !(*g > 0.0 && *g < 1.0)) {
            return bad("every g must lie in (0, 1)".into());
        }
        if !(self.r_amp > 0.0) || !self.r_amp.is_finite() {
            return bad(format!("R_amp must be positive, got {}", self.r_amp));
        }
        if self.k_max == 0 {
            return bad("k_max must be ≥ 1".into());
        }
        if self.sites.is_empty() || self.directions.is_empty() || self.color_indices.is_empty() {
            return bad("site, direction and color lists must be non-empty".into());
        }
        if self.j >= 3 || self.c >= self.colors {
            return bad(format!("integrated component (j={}, c={}) out of range", self.j, self.c));
        }
        for &i in &self.directions {
            if i >= 3 {
                return bad(format!("direction {i} outside 0..3"));
            }
        }
        for &a in &self.color_indices {
            if a >= self.colors || a == self.c {
                return bad(format!("color index {a} must differ from c = {} and be < K", self.c));
            }
        }
        for p in &self.sites {
            if p.x0.iter().chain(&p.y0).any(|&v| v >= n) {
                return bad(format!("site pair {p:?} outside the grid"));
            }
            for &i in &self.directions {
                let r = (p.x0[i] + n - p.y0[i]) % n;
                if r % 2 == 0 {
                    return bad(format!(
                        "site pair {p:?}: separation along direction {i} must be odd, otherwise ∂ᵢG₀ vanishes by symmetry"
                    ));
                }
            }
        }
        if self.quadrature.order == 0 || self.quadrature.panels == 0 {
            return bad("quadrature order and panel count must be ≥ 1".into());
        }
        Ok(())
    }
}

/// Transverse profile with unit `L²` norm.
pub fn gap_profile(cfg: &GapScanConfig) -> LatticeField {
    let spec = RandomFieldSpec::band_limited(cfg.profile_seed, 1, 1.0, true);
    let f = generate_field(cfg.grid, cfg.colors, FieldKind::Potential, &spec);
    let nrm = f.norm();
    f.scaled(1.0 / nrm)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapEntry {
    pub g: f64,
    pub x0: usize,
    pub y0: usize,
    pub i: usize,
    pub a: usize,
    pub k: usize,
    pub integral: f64,
    pub lambda: f64,
    pub flags: QuadFlags,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapScanResult {
    pub path: PathFamily,
    pub entries: Vec<GapEntry>,
    /// `(g, η(g))`; `η` is `NaN` when no positive finite `λ` exists.
    pub eta: Vec<(f64, f64)>,
    /// Least-squares slope of `ln η` against `ln g`.
    pub fitted_slope: Option<f64>,
    /// Index summation factor `6K` of the `η` prefactor.
    pub index_factor: f64,
    /// Per `g`: `max |h|⁻¹ / spacing²` over every kept node.
    pub uniform_bound: Vec<(f64, f64)>,
}

impl GapScanResult {
    pub fn all_eta_positive(&self) -> bool {
        self.eta.iter().all(|(_, e)| *e > 0.0 && e.is_finite())
    }
}

struct PairContext<'a> {
    cfg: &'a GapScanConfig,
    profile: &'a LatticeField,
    direction: Option<LatticeField>,
    x0: usize,
    y0: usize,
}

impl PairContext<'_> {
    fn background(&self, alpha: f64) -> LatticeField {
        match &self.direction {
            Some(w) => self.profile.axpy(alpha, w),
            None => self.profile.scaled(alpha),
        }
    }

    /// `h` for every `(i, a)` in configuration order.
    fn h(&self, sc: &StructureConstants, alpha: f64) -> Result<Vec<f64>> {
        let cfg = self.cfg;
        let a_bg = self.background(alpha);
        let k = cfg.colors;
        let mut src = ColorScalarField::zeros(cfg.grid, k);
        let w = cfg.grid.cell_volume();
        for b in 0..k {
            let s: f64 = (0..k).map(|d| eps(b, cfg.c, d) * a_bg.get(self.y0, d, cfg.j)).sum();
            src.set(self.y0, b, s / w);
        }
        let g = GreensOperator::new(sc, &a_bg, GreensMethod::Born { n_terms: cfg.n_terms }, KernelChoice::Constants)?;
        let u = g.apply(&src)?;
        let mut out = Vec::with_capacity(cfg.directions.len() * cfg.color_indices.len());
        for &i in &cfg.directions {
            let du = spectral_derivative(&u, i)?;
            for &a in &cfg.color_indices {
                out.push(du.get(self.x0, a));
            }
        }
        Ok(out)
    }
}

struct TaskOutput {
    entries: Vec<GapEntry>,
    bound: f64,
}

fn run_task(cfg: &GapScanConfig, profile: &LatticeField, g: f64, pair: &SitePair) -> Result<TaskOutput> {
    let grid = cfg.grid;
    let x0 = grid.site_index(pair.x0);
    let y0 = grid.site_index(pair.y0);
    let direction = match cfg.path {
        PathFamily::SingleComponent => {
            let mut d = LatticeField::zeros(grid, cfg.colors, FieldKind::Potential);
            d.set(y0, cfg.c, cfg.j, 1.0 / grid.cell_volume());
            let w = transverse_project(&d);
            let pivot = w.get(y0, cfg.c, cfg.j);
            Some(w.scaled(1.0 / pivot))
        }
        PathFamily::Scaled => None,
    };
    let ctx = PairContext {
        cfg,
        profile,
        direction,
        x0,
        y0,
    };
    let sc = StructureConstants::new(cfg.colors, g)?;
    for alpha in [-cfg.r_amp, cfg.r_amp] {
        let rho = born_radius(&sc, &ctx.background(alpha))?;
        if rho >= 1.0 {
            return Err(YmError::domain(
                MODULE,
                format!("Born series diverges along the path at g = {g}, α = {alpha}: ρ(G₀V) = {rho}"),
            ));
        }
    }
    let m = cfg.directions.len() * cfg.color_indices.len();
    let ints = integrate_reciprocals(|alpha| ctx.h(&sc, alpha), cfg.r_amp, m, &cfg.quadrature)?;
    let mut entries = Vec::with_capacity(m * cfg.k_max);
    let mut bound: f64 = 0.0;
    let mut idx = 0;
    for &i in &cfg.directions {
        for &a in &cfg.color_indices {
            let q = ints[idx];
            idx += 1;
            bound = bound.max(q.max_reciprocal / (grid.spacing() * grid.spacing()));
            for k in 1..=cfg.k_max {
                let mut flags = q.flags;
                let lambda = 2.0 * PI * PI * g * g * (k * k) as f64 / (q.value * q.value);
                if !lambda.is_finite() {
                    flags.degenerate = true;
                }
                entries.push(GapEntry {
                    g,
                    x0,
                    y0,
                    i,
                    a,
                    k,
                    integral: q.value,
                    lambda,
                    flags,
                });
            }
        }
    }
    Ok(TaskOutput { entries, bound })
}

/// Full `λ` table, `η(g)` and the log–log slope. Independent `(g, pair)`
/// tasks run on worker threads; results are collected in configuration
/// order.
pub fn gap_scan(cfg: &GapScanConfig) -> Result<GapScanResult> {
    cfg.validate()?;
    let profile = gap_profile(cfg);
    let tasks: Vec<(f64, SitePair)> = cfg.g_list.iter().flat_map(|&g| cfg.sites.iter().map(move |p| (g, *p))).collect();
    let results: Mutex<Vec<Option<Result<TaskOutput>>>> = Mutex::new((0..tasks.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(tasks.len());
    std::thread::scope(|s| {
        for _ in 0..workers {
            s.spawn(|| loop {
                let t = next.fetch_add(1, Ordering::Relaxed);
                if t >= tasks.len() {
                    break;
                }
                let (g, pair) = &tasks[t];
                let out = run_task(cfg, &profile, *g, pair);
                results.lock().expect("no poisoned workers")[t] = Some(out);
            });
        }
    });
    let mut entries = Vec::new();
    let mut bounds = vec![0.0f64; cfg.g_list.len()];
    for (t, r) in results.into_inner().expect("no poisoned workers").into_iter().enumerate() {
        let out = r.expect("every task ran")?;
        let gi = t / cfg.sites.len();
        bounds[gi] = bounds[gi].max(out.bound);
        entries.extend(out.entries);
    }
    let eta: Vec<(f64, f64)> = cfg
        .g_list
        .iter()
        .map(|&g| {
            let m = entries
                .iter()
                .filter(|e| e.g == g && e.lambda > 0.0 && e.lambda.is_finite())
                .map(|e| e.lambda)
                .fold(f64::INFINITY, f64::min);
            (g, if m.is_finite() { m } else { f64::NAN })
        })
        .collect();
    let fitted_slope = if eta.len() >= 2 && eta.iter().all(|(_, e)| *e > 0.0) {
        let xs: Vec<f64> = eta.iter().map(|(g, _)| g.ln()).collect();
        let ys: Vec<f64> = eta.iter().map(|(_, e)| e.ln()).collect();
        Some(ls_slope(&xs, &ys))
    } else {
        None
    };
    Ok(GapScanResult {
        path: cfg.path,
        entries,
        eta,
        fitted_slope,
        index_factor: 6.0 * cfg.colors as f64,
        uniform_bound: cfg.g_list.iter().copied().zip(bounds).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h2_trivial_and_single_mode() {
        let grid = Grid::new(4, 2.0 * PI).unwrap();
        let sc = StructureConstants::su2(0.3).unwrap();
        let zero = LatticeField::zeros(grid, 3, FieldKind::Potential);
        assert_eq!(h2_density(&sc, &zero).unwrap(), 0.0);
        // A_x^0 = α sin(y): B_z^0 = −½α cos(y), ∫|B|² = ¼α²·V/2
        let alpha = 0.7;
        let a = LatticeField::from_fn(grid, 3, FieldKind::Potential, |s, c, i| {
            if c == 0 && i == 0 {
                alpha * grid.position(s)[1].sin()
            } else {
                0.0
            }
        });
        let sc0 = StructureConstants::su2(0.0).unwrap();
        let want = 0.25 * alpha * alpha * grid.volume() / 2.0;
        assert!((h2_density(&sc0, &a).unwrap() - want).abs() < 1e-12 * want);
    }

    #[test]
    fn reciprocal_smooth_and_pole() {
        let opts = QuadratureOptions::default();
        // ∫_{−1}^{1} dα/(2+α) = ln 3
        let q = integrate_reciprocal(|x| 2.0 + x, 1.0, &opts).unwrap();
        assert!((q.value - 3f64.ln()).abs() < 1e-12, "{q:?}");
        assert!(!q.flags.any());
        // PV ∫_{−1}^{1} dα/(α+0.5) = ln 3
        let pv = QuadratureOptions {
            principal_value: true,
            ..opts
        };
        let q = integrate_reciprocal(|x| x + 0.5, 1.0, &pv).unwrap();
        assert!((q.value - 3f64.ln()).abs() < 1e-10, "{q:?}");
        assert!(q.flags.principal_value);
    }

    #[test]
    fn odd_integrand_flagged() {
        let pv = QuadratureOptions {
            principal_value: true,
            ..QuadratureOptions::default()
        };
        let q = integrate_reciprocal(|x| x * (1.0 + x * x), 1.0, &pv).unwrap();
        assert!(q.value.abs() < 1e-10);
        assert!(q.flags.principal_value);
        let q = integrate_reciprocal(|x| x * (1.0 + x * x), 1.0, &QuadratureOptions::default()).unwrap();
        assert!(q.value.abs() < 1e-10);
        assert!(q.flags.singular_excluded);
        assert!(integrate_reciprocal(|_| 0.0, 1.0, &QuadratureOptions::default()).is_err());
    }

    #[test]
    fn config_validation() {
        let grid = Grid::new(4, 2.0 * PI).unwrap();
        let base = GapScanConfig::new(grid, 3);
        base.validate().unwrap();
        let mut c = base.clone();
        c.g_list = vec![0.1, 1.0];
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.r_amp = 0.0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.k_max = 0;
        assert!(c.validate().is_err());
        let mut c = base.clone();
        c.color_indices = vec![0];
        assert!(c.validate().is_err());
        let mut c = base;
        c.sites = vec![SitePair { x0: [2, 1, 1], y0: [0, 0, 0] }];
        assert!(c.validate().is_err());
    }

    #[test]
    fn small_scan_structure() {
        let grid = Grid::new(4, 2.0 * PI).unwrap();
        let mut cfg = GapScanConfig::new(grid, 3);
        cfg.g_list = vec![0.1, 0.2];
        cfg.sites.truncate(1);
        cfg.k_max = 3;
        let res = gap_scan(&cfg).unwrap();
        assert!(res.all_eta_positive());
        assert!(res.entries.iter().all(|e| e.lambda >= 0.0));
        for e in res.entries.iter().filter(|e| e.k > 1) {
            let base = res
                .entries
                .iter()
                .find(|b| b.k == 1 && b.g == e.g && b.i == e.i && b.a == e.a && b.x0 == e.x0)
                .unwrap();
            assert!((e.lambda - (e.k * e.k) as f64 * base.lambda).abs() <= 1e-12 * e.lambda);
        }
        assert_eq!(res.index_factor, 18.0);
        assert!(res.uniform_bound.iter().all(|(_, b)| b.is_finite() && *b > 0.0));
    }
}

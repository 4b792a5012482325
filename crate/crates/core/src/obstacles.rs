//! Obstacle presets, mollification, the boundary blend, and their verification.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::field::{constant_fn, scalar_fn, Field, ScalarFn};
use crate::geometry::{Domain, Grid, Point};

/// Obstacles ψ⁻ ≤ ψ⁺ and exterior data φ, all defined on R^n.
#[derive(Clone)]
pub struct ObstacleSet {
    pub name: String,
    pub domain: Domain,
    pub psi_plus: ScalarFn,
    pub psi_minus: ScalarFn,
    pub phi: ScalarFn,
    /// Lipschitz constant C1.
    pub c1: f64,
    /// Known semiconcavity constants as (margin ε, C(ε)).
    pub semiconcavity: Vec<(f64, f64)>,
    /// Width of the C² smoothing collar near ∂U, when the preset has one.
    pub smoothing_width: Option<f64>,
}

impl fmt::Debug for ObstacleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObstacleSet").field("name", &self.name).field("c1", &self.c1).finish()
    }
}

impl ObstacleSet {
    pub fn new(name: &str, domain: Domain, psi_plus: ScalarFn, psi_minus: ScalarFn, phi: ScalarFn, c1: f64) -> Self {
        ObstacleSet {
            name: name.to_string(),
            domain,
            psi_plus,
            psi_minus,
            phi,
            c1,
            semiconcavity: Vec::new(),
            smoothing_width: None,
        }
    }
}

/// ψ± = ±ρ with ρ = max(d, 0), φ = 0.
pub fn preset_distance_obstacles(domain: Domain) -> ObstacleSet {
    let rho = move |x: Point| domain.distance(x).max(0.0);
    let mut set = ObstacleSet::new(
        "distance",
        domain,
        scalar_fn(rho),
        scalar_fn(move |x| -rho(x)),
        constant_fn(0.0),
        1.0,
    );
    // ρ is concave on U for convex U, so δρ ≤ 0 whenever the segment stays inside.
    set.semiconcavity = vec![(0.05, 0.0), (0.1, 0.0), (0.2, 0.0)];
    set
}

/// The distance profile with a cubic collar of width w:
/// d³/(3w²) on [0, w), d − 2w/3 beyond, 0 outside. C² across ∂U.
pub fn smoothed_rho(d: f64, w: f64) -> f64 {
    if d <= 0.0 {
        0.0
    } else if d < w {
        d * d * d / (3.0 * w * w)
    } else {
        d - 2.0 * w / 3.0
    }
}

/// ψ± = ±ρ̃ with ρ̃ the distance smoothed across a collar of width `w`.
pub fn preset_smoothed_distance_obstacles(domain: Domain, w: f64) -> Result<ObstacleSet> {
    if !(w > 0.0 && w < domain.inradius()) {
        return invalid(format!("smoothing width must lie in (0, inradius), got {w}"));
    }
    let rho = move |x: Point| smoothed_rho(domain.distance(x), w);
    let mut set = ObstacleSet::new(
        "smoothed_distance",
        domain,
        scalar_fn(rho),
        scalar_fn(move |x| -rho(x)),
        constant_fn(0.0),
        1.0,
    );
    set.semiconcavity = vec![(0.05, 2.0 / w), (0.1, 2.0 / w), (0.2, 2.0 / w)];
    set.smoothing_width = Some(w);
    Ok(set)
}

/// ψ± = ±c everywhere with φ = 0; a fixture for the unconstrained regime.
pub fn preset_constant_obstacles(domain: Domain, c: f64) -> ObstacleSet {
    let mut set = ObstacleSet::new("constant", domain, constant_fn(c), constant_fn(-c), constant_fn(0.0), 0.0);
    set.semiconcavity = vec![(0.05, 0.0), (0.1, 0.0), (0.2, 0.0)];
    set
}

/// Discrete mollifier: lattice offsets |y| < ε with weights ∝ exp(−1/(1−|y/ε|²)) summing to 1.
pub fn mollifier_weights(dim: usize, h: f64, eps: f64) -> Result<Vec<(Point, f64)>> {
    if !(eps > 2.0 * h) {
        return Err(Error::UnderResolved { eps, two_h: 2.0 * h });
    }
    let m = (eps / h).ceil() as i64;
    let jr = if dim == 2 { m } else { 0 };
    let mut out = Vec::new();
    for j in -jr..=jr {
        for i in -m..=m {
            let y = [i as f64 * h, j as f64 * h];
            let r = y[0].hypot(y[1]) / eps;
            let w = if r < 1.0 { (-1.0 / (1.0 - r * r)).exp() } else { 0.0 };
            // Offsets just inside the rim underflow to zero and are dropped.
            if w > 0.0 {
                out.push((y, w));
            }
        }
    }
    let total: f64 = out.iter().map(|p| p.1).sum();
    for p in &mut out {
        p.1 /= total;
    }
    Ok(out)
}

/// ψ_ε(x) = Σ_j η_j ψ(x − y_j) as a callable.
pub fn mollify_fn(psi: &ScalarFn, weights: Arc<Vec<(Point, f64)>>) -> ScalarFn {
    let psi = psi.clone();
    scalar_fn(move |x| weights.iter().map(|(y, w)| w * psi([x[0] - y[0], x[1] - y[1]])).sum())
}

/// Mollifies ψ on the grid lattice, returning the sampled field and the callable.
pub fn mollify(psi: &ScalarFn, eps: f64, grid: &Arc<Grid>) -> Result<(Field, ScalarFn)> {
    let w = Arc::new(mollifier_weights(grid.dim(), grid.h(), eps)?);
    let f = mollify_fn(psi, w);
    Ok((Field::from_fn(grid.clone(), f.clone()), f))
}

/// ψ_ε±, φ_ε on the dilated domain U_ε.
#[derive(Clone)]
pub struct MollifiedObstacles {
    pub eps: f64,
    pub domain: Domain,
    pub psi_plus: ScalarFn,
    pub psi_minus: ScalarFn,
    pub phi: ScalarFn,
    pub weights: Arc<Vec<(Point, f64)>>,
}

impl fmt::Debug for MollifiedObstacles {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("MollifiedObstacles").field("eps", &self.eps).field("weights", &self.weights.len()).finish()
    }
}

impl MollifiedObstacles {
    pub fn new(set: &ObstacleSet, eps: f64, grid: &Grid) -> Result<Self> {
        let weights = Arc::new(mollifier_weights(grid.dim(), grid.h(), eps)?);
        Ok(MollifiedObstacles {
            eps,
            domain: set.domain.dilate(eps)?,
            psi_plus: mollify_fn(&set.psi_plus, weights.clone()),
            psi_minus: mollify_fn(&set.psi_minus, weights.clone()),
            phi: mollify_fn(&set.phi, weights.clone()),
            weights,
        })
    }
}

/// Outcome of checking a mollified pair against its source.
#[derive(Debug, Clone, Serialize)]
pub struct MollifiedReport {
    pub eps: f64,
    pub sup_gap: f64,
    pub uniform_ok: bool,
    pub max_quotient: f64,
    pub lipschitz_ok: bool,
    pub min_gap_inside: f64,
    pub order_ok: bool,
    pub exterior_mismatch: f64,
    pub exterior_ok: bool,
    pub pass: bool,
}

/// Checks |ψ_ε± − ψ±| ≤ C1ε, difference quotients ≤ C1, ψ_ε⁻ < ψ_ε⁺ on U_ε, ψ_ε± = φ_ε outside.
///
/// The strict order is checked on nodes at least 2h√n inside U_ε: closer to ∂U_ε
/// the lattice window may miss U entirely.
pub fn verify_mollified(m: &MollifiedObstacles, set: &ObstacleSet, grid: &Grid) -> MollifiedReport {
    let h = grid.h();
    let rn = (grid.dim() as f64).sqrt();
    let (mut sup_gap, mut max_q, mut min_gap, mut ext) = (0.0f64, 0.0f64, f64::INFINITY, 0.0f64);
    let pp: Vec<f64> = (0..grid.len()).map(|i| (m.psi_plus)(grid.point(i))).collect();
    let pm: Vec<f64> = (0..grid.len()).map(|i| (m.psi_minus)(grid.point(i))).collect();
    for i in 0..grid.len() {
        let x = grid.point(i);
        sup_gap = sup_gap.max((pp[i] - (set.psi_plus)(x)).abs()).max((pm[i] - (set.psi_minus)(x)).abs());
        let l = grid.lattice(i);
        for dir in 0..grid.dim() {
            let nb = if dir == 0 { [l[0] + 1, l[1]] } else { [l[0], l[1] + 1] };
            if let Some(j) = grid.index_of(nb) {
                max_q = max_q.max((pp[j] - pp[i]).abs() / h).max((pm[j] - pm[i]).abs() / h);
            }
        }
        let dd = m.domain.distance(x);
        if dd > 2.0 * h * rn {
            min_gap = min_gap.min(pp[i] - pm[i]);
        }
        if dd <= 0.0 {
            let f = (m.phi)(x);
            ext = ext.max((pp[i] - f).abs()).max((pm[i] - f).abs());
        }
    }
    let uniform_ok = sup_gap <= set.c1 * m.eps + 1e-12;
    let lipschitz_ok = max_q <= set.c1 * (1.0 + 1e-6) + 1e-12;
    let order_ok = min_gap > 0.0;
    let exterior_ok = ext <= 1e-12;
    MollifiedReport {
        eps: m.eps,
        sup_gap,
        uniform_ok,
        max_quotient: max_q,
        lipschitz_ok,
        min_gap_inside: min_gap,
        order_ok,
        exterior_mismatch: ext,
        exterior_ok,
        pass: uniform_ok && lipschitz_ok && order_ok && exterior_ok,
    }
}

/// Per-margin semiconcavity measurement.
#[derive(Debug, Clone, Serialize)]
pub struct SemiconcavityEntry {
    pub margin: f64,
    /// Smallest C with ±δψ±(x,y) ≤ C|y|² over admissible pairs.
    pub constant: f64,
    pub pairs: usize,
}

/// Outcome of checking Assumption 1 on a grid.
#[derive(Debug, Clone, Serialize)]
pub struct Assumption1Report {
    pub lipschitz_max: f64,
    pub lipschitz_ok: bool,
    pub gap_min: f64,
    pub gap_ratio_max: f64,
    pub gap_ok: bool,
    pub exterior_mismatch: f64,
    pub exterior_ok: bool,
    pub semiconcavity: Vec<SemiconcavityEntry>,
    pub pass: bool,
}

/// Samples the Lipschitz bound, the gap bound 0 < ψ⁺ − ψ⁻ ≤ 2C1d, ψ± = φ outside U,
/// and measures semiconcavity constants for each margin.
pub fn verify_assumption1(set: &ObstacleSet, grid: &Grid, margins: &[f64]) -> Assumption1Report {
    let n = grid.len();
    let pp: Vec<f64> = (0..n).map(|i| (set.psi_plus)(grid.point(i))).collect();
    let pm: Vec<f64> = (0..n).map(|i| (set.psi_minus)(grid.point(i))).collect();
    let ph: Vec<f64> = (0..n).map(|i| (set.phi)(grid.point(i))).collect();
    let dist = |a: Point, b: Point| (a[0] - b[0]).hypot(a[1] - b[1]);
    let mut lip = 0.0f64;
    let mut check_pair = |i: usize, j: usize| {
        let r = dist(grid.point(i), grid.point(j));
        if r > 0.0 {
            for v in [&pp, &pm, &ph] {
                lip = lip.max((v[i] - v[j]).abs() / r);
            }
        }
    };
    for i in 0..n {
        let l = grid.lattice(i);
        for nb in [[l[0] + 1, l[1]], [l[0], l[1] + 1]] {
            if let Some(j) = grid.index_of(nb) {
                check_pair(i, j);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    for _ in 0..4000 {
        check_pair(rng.gen_range(0..n), rng.gen_range(0..n));
    }
    let lipschitz_ok = lip <= set.c1 * (1.0 + 1e-12) + 1e-12;

    let (mut gap_min, mut ratio) = (f64::INFINITY, 0.0f64);
    for &i in grid.interior() {
        let g = pp[i] - pm[i];
        gap_min = gap_min.min(g);
        ratio = ratio.max(g / (2.0 * set.c1 * grid.distance(i)));
    }
    let gap_ok = gap_min > 0.0 && ratio <= 1.0 + 1e-12;

    let mut ext = 0.0f64;
    for i in 0..n {
        if grid.distance(i) <= 0.0 {
            ext = ext.max((pp[i] - ph[i]).abs()).max((pm[i] - ph[i]).abs());
        }
    }
    let exterior_ok = ext <= 1e-12;

    let h = grid.h();
    let semiconcavity = margins
        .iter()
        .map(|&eps| {
            let mut c = 0.0f64;
            let mut pairs = 0usize;
            for &i in grid.interior() {
                let d = grid.distance(i);
                if d <= eps {
                    continue;
                }
                let rmax = d - eps;
                let m = (rmax / h).floor() as i64;
                let jr = if grid.dim() == 2 { m } else { 0 };
                let l = grid.lattice(i);
                for j in 0..=jr {
                    for k in -m..=m {
                        if (j == 0 && k <= 0) || ((k * k + j * j) as f64) * h * h > rmax * rmax {
                            continue;
                        }
                        let (a, b) = (grid.index_of([l[0] + k, l[1] + j]), grid.index_of([l[0] - k, l[1] - j]));
                        if let (Some(a), Some(b)) = (a, b) {
                            let y2 = ((k * k + j * j) as f64) * h * h;
                            let dp = pp[a] + pp[b] - 2.0 * pp[i];
                            let dm = pm[a] + pm[b] - 2.0 * pm[i];
                            c = c.max(dp / y2).max(-dm / y2);
                            pairs += 1;
                        }
                    }
                }
            }
            SemiconcavityEntry { margin: eps, constant: c, pairs }
        })
        .collect();

    Assumption1Report {
        lipschitz_max: lip,
        lipschitz_ok,
        gap_min,
        gap_ratio_max: ratio,
        gap_ok,
        exterior_mismatch: ext,
        exterior_ok,
        semiconcavity,
        pass: lipschitz_ok && gap_ok && exterior_ok,
    }
}

/// Smooth step: 1 on [0, a], 0 on [b, ∞), C^∞ in between.
pub fn smooth_cutoff(r: f64, a: f64, b: f64) -> f64 {
    if r <= a {
        return 1.0;
    }
    if r >= b {
        return 0.0;
    }
    let t = (r - a) / (b - a);
    let g = |s: f64| if s > 0.0 { (-1.0 / s).exp() } else { 0.0 };
    g(1.0 - t) / (g(1.0 - t) + g(t))
}

/// Nested boundary collars W = {|d| < w} ⊃ W₁ = {|d| < w1} ⊃ W₂ = {|d| < w2}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Collars {
    pub w: f64,
    pub w1: f64,
    pub w2: f64,
}

impl Collars {
    pub fn new(w: f64, w1: f64, w2: f64) -> Result<Self> {
        if !(w > w1 && w1 > w2 && w2 > 0.0) {
            return invalid(format!("collars must satisfy w > w1 > w2 > 0, got {w}, {w1}, {w2}"));
        }
        Ok(Collars { w, w1, w2 })
    }
}

/// ψ̂_ε± = ζψ± + (1−ζ)ψ_ε±.
#[derive(Clone)]
pub struct BlendedObstacles {
    pub collars: Collars,
    pub zeta: ScalarFn,
    pub psi_plus: ScalarFn,
    pub psi_minus: ScalarFn,
    pub phi: ScalarFn,
    pub domain: Domain,
    /// min over U − W₂ of ψ⁺ − ψ⁻ on the grid.
    pub gap_floor: f64,
    /// min over U − W₁ of ψ̂⁺ − ψ̂⁻ on the grid.
    pub gap_off_w1: f64,
    pub gap_ok: bool,
}

impl fmt::Debug for BlendedObstacles {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlendedObstacles")
            .field("collars", &self.collars)
            .field("gap_floor", &self.gap_floor)
            .field("gap_off_w1", &self.gap_off_w1)
            .finish()
    }
}

fn blend_with(set: &ObstacleSet, m: &MollifiedObstacles, collars: Collars, zeta: ScalarFn, grid: &Grid) -> Result<BlendedObstacles> {
    let blend = |a: &ScalarFn, b: &ScalarFn| -> ScalarFn {
        let (a, b, z) = (a.clone(), b.clone(), zeta.clone());
        scalar_fn(move |x| {
            let t = z(x);
            if t >= 1.0 {
                a(x)
            } else if t <= 0.0 {
                b(x)
            } else {
                t * a(x) + (1.0 - t) * b(x)
            }
        })
    };
    let psi_plus = blend(&set.psi_plus, &m.psi_plus);
    let psi_minus = blend(&set.psi_minus, &m.psi_minus);
    let (mut floor, mut off) = (f64::INFINITY, f64::INFINITY);
    for &i in grid.interior() {
        let x = grid.point(i);
        let d = grid.distance(i);
        if d >= collars.w2 {
            floor = floor.min((set.psi_plus)(x) - (set.psi_minus)(x));
        }
        if d >= collars.w1 {
            off = off.min(psi_plus(x) - psi_minus(x));
        }
    }
    if !(floor > 0.0) {
        return invalid(format!("gap floor c = {floor} must be positive"));
    }
    Ok(BlendedObstacles {
        collars,
        zeta,
        psi_plus,
        psi_minus,
        phi: set.phi.clone(),
        domain: set.domain,
        gap_floor: floor,
        gap_ok: off >= floor * (1.0 - 1e-12),
        gap_off_w1: off,
    })
}

/// Blends the raw obstacles near ∂U with the mollified ones inside.
pub fn blend(set: &ObstacleSet, m: &MollifiedObstacles, collars: Collars, grid: &Grid) -> Result<BlendedObstacles> {
    let dom = set.domain;
    let zeta = scalar_fn(move |x| smooth_cutoff(dom.distance(x).abs(), collars.w1, collars.w));
    blend_with(set, m, collars, zeta, grid)
}

/// Blend with a caller-supplied cutoff ζ (used to exercise the identities ζ ≡ 0, 1).
pub fn blend_with_cutoff(set: &ObstacleSet, m: &MollifiedObstacles, collars: Collars, zeta: ScalarFn, grid: &Grid) -> Result<BlendedObstacles> {
    blend_with(set, m, collars, zeta, grid)
}

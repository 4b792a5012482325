//! Measurements on computed solutions.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::field::{Field, ScalarFn};
use crate::geometry::{Domain, Grid, Point};
use crate::kernel::EllipticityParams;
use crate::nonlocal_op::{DiscreteOperator, OperatorSpec};
use crate::obstacles::{MollifiedObstacles, ObstacleSet};
use crate::solver::{DeltaTrace, Problem};

/// Least-squares slope of log y against log x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = x.iter().zip(y).filter(|(a, b)| **a > 0.0 && **b > 0.0).map(|(a, b)| (a.ln(), b.ln())).collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DecayStatus {
    Active,
    InactiveObstacles,
}

/// Overshoot past the obstacles along a δ schedule.
#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub deltas: Vec<f64>,
    pub overshoot: Vec<f64>,
    pub overshoot_upper: Vec<f64>,
    pub overshoot_lower: Vec<f64>,
    pub c0: Vec<f64>,
    /// overshoot_j ≤ δ_j(C̃₀_j + 1) per schedule point.
    pub bound_ok: Vec<bool>,
    pub all_bounds_ok: bool,
    pub slope: Option<f64>,
    pub status: DecayStatus,
}

pub fn penal_decay(trace: &DeltaTrace) -> Result<DecayReport> {
    if trace.deltas.len() < 3 {
        return invalid("decay fit needs at least 3 schedule points");
    }
    let overshoot: Vec<f64> = trace.overshoot_upper.iter().zip(&trace.overshoot_lower).map(|(a, b)| a.max(*b).max(0.0)).collect();
    let bound_ok: Vec<bool> = (0..overshoot.len()).map(|j| overshoot[j] <= trace.deltas[j] * (trace.c0[j] + 1.0)).collect();
    let active = overshoot.iter().any(|&o| o > 0.0);
    Ok(DecayReport {
        slope: if active { loglog_slope(&trace.deltas, &overshoot) } else { None },
        status: if active { DecayStatus::Active } else { DecayStatus::InactiveObstacles },
        all_bounds_ok: bound_ok.iter().all(|b| *b),
        deltas: trace.deltas.clone(),
        overshoot,
        overshoot_upper: trace.overshoot_upper.clone(),
        overshoot_lower: trace.overshoot_lower.clone(),
        c0: trace.c0.clone(),
        bound_ok,
    })
}

/// Operator bounds on mollified obstacles over V.
#[derive(Debug, Clone, Serialize)]
pub struct Lemma1Report {
    pub margin: f64,
    pub eps: Vec<f64>,
    /// sup_V I ψ_ε⁺.
    pub sup_plus: Vec<f64>,
    /// sup_V (−I ψ_ε⁻).
    pub sup_minus: Vec<f64>,
    /// sup_V |I ψ_ε±|.
    pub sup_abs: Vec<f64>,
    /// One-sided constant C_V = max(sup_plus, sup_minus, 0).
    pub c_v: Vec<f64>,
    /// C_V / ε₀^{2−2s} with ε₀ = d(V, ∂U)/3.
    pub ratio: Vec<f64>,
    pub uniform_abs_ok: bool,
    pub uniform_one_sided_ok: bool,
    pub pass: bool,
}

/// Measures ±Iψ_ε± over V = {d ≥ margin} for each ε.
pub fn lemma1_bound(set: &ObstacleSet, op: &DiscreteOperator, margin: f64, eps: &[f64]) -> Result<Lemma1Report> {
    let grid = op.grid().clone();
    let v = grid.nodes_with_margin(margin);
    if v.is_empty() {
        return Err(Error::EmptyRegion(format!("no nodes with d >= {margin}")));
    }
    let emax = eps.iter().cloned().fold(0.0, f64::max);
    if margin < 3.0 * emax {
        return invalid(format!("V must satisfy d >= 3·eps_max = {}", 3.0 * emax));
    }
    let s = op.spec().order();
    let e0 = margin / 3.0;
    let mut rep = Lemma1Report {
        margin,
        eps: eps.to_vec(),
        sup_plus: vec![],
        sup_minus: vec![],
        sup_abs: vec![],
        c_v: vec![],
        ratio: vec![],
        uniform_abs_ok: true,
        uniform_one_sided_ok: true,
        pass: true,
    };
    for &e in eps {
        let m = MollifiedObstacles::new(set, e, &grid)?;
        let pp = Field::from_fn(grid.clone(), m.psi_plus.clone());
        let pm = Field::from_fn(grid.clone(), m.psi_minus.clone());
        let ip = op.apply(&pp, &v, Execution::default())?;
        let im = op.apply(&pm, &v, Execution::default())?;
        let sp = ip.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let sm = im.iter().map(|x| -x).fold(f64::NEG_INFINITY, f64::max);
        let sa = ip.iter().chain(&im).fold(0.0f64, |a, x| a.max(x.abs()));
        let cv = sp.max(sm).max(0.0);
        rep.sup_plus.push(sp);
        rep.sup_minus.push(sm);
        rep.sup_abs.push(sa);
        rep.c_v.push(cv);
        rep.ratio.push(cv / e0.powf(2.0 - 2.0 * s));
    }
    let (a0, c0) = (rep.sup_abs[0], rep.c_v[0]);
    rep.uniform_abs_ok = rep.sup_abs.iter().all(|&a| a <= 2.0 * a0 + 1e-12);
    rep.uniform_one_sided_ok = rep.c_v.iter().all(|&c| c <= 2.0 * c0 + 1e-9 * (1.0 + a0));
    rep.pass = rep.uniform_abs_ok && rep.uniform_one_sided_ok;
    Ok(rep)
}

/// A Hölder seminorm estimate with the pair attaining it.
#[derive(Debug, Clone, Serialize)]
pub struct HolderEstimate {
    pub alpha: f64,
    pub value: f64,
    /// (lower, upper, max) per dyadic distance band [2^{−k−1}L, 2^{−k}L].
    pub bands: Vec<(f64, f64, f64)>,
    pub argmax: Option<(usize, usize)>,
    pub distance: f64,
}

const FULL_PAIRS_LIMIT: usize = 4000;

/// max over pairs of |u(x) − u(y)| / |x − y|^α, organised by dyadic bands of |x − y|.
///
/// Pairs are enumerated exhaustively up to 4000 points; larger sets sample 10⁴
/// pairs per band with a fixed seed.
pub fn holder_seminorm(points: &[Point], values: &[f64], alpha: f64) -> Result<HolderEstimate> {
    let n = points.len();
    if n < 2 {
        return Err(Error::EmptyRegion("Hölder seminorm needs at least 2 points".into()));
    }
    let dist = |i: usize, j: usize| (points[i][0] - points[j][0]).hypot(points[i][1] - points[j][1]);
    let mut l = 0.0f64;
    let mut hmin = f64::INFINITY;
    for i in 0..n {
        for j in [0, n - 1, n / 2] {
            l = l.max(dist(i, j));
        }
    }
    l *= 2.0;
    for i in 1..n.min(64) {
        hmin = hmin.min(dist(0, i));
    }
    let nb = ((l / hmin.max(1e-300)).log2().ceil() as usize + 2).min(60);
    let mut bands: Vec<(f64, f64, f64)> = (0..nb).map(|k| (l * 0.5f64.powi(k as i32 + 1), l * 0.5f64.powi(k as i32), 0.0)).collect();
    let mut best = (0.0f64, None, 0.0f64);
    let mut visit = |i: usize, j: usize, bands: &mut Vec<(f64, f64, f64)>| {
        let r = dist(i, j);
        if r <= 0.0 {
            return;
        }
        let q = (values[i] - values[j]).abs() / r.powf(alpha);
        let k = ((l / r).log2().floor() as usize).min(nb - 1);
        if q > bands[k].2 {
            bands[k].2 = q;
        }
        if q > best.0 {
            best = (q, Some((i, j)), r);
        }
    };
    if n <= FULL_PAIRS_LIMIT {
        for i in 0..n {
            for j in i + 1..n {
                visit(i, j, &mut bands);
            }
        }
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(0x4011de5);
        for _ in 0..10_000 * nb {
            let (i, j) = (rng.gen_range(0..n), rng.gen_range(0..n));
            visit(i, j, &mut bands);
        }
    }
    Ok(HolderEstimate { alpha, value: best.0, bands, argmax: best.1, distance: best.2 })
}

/// Central difference quotients of `u` along each axis at `nodes`.
pub fn difference_quotients(u: &Field, nodes: &[usize]) -> Vec<Vec<f64>> {
    let g = u.grid();
    let h = g.h();
    (0..g.dim())
        .map(|ax| {
            nodes
                .iter()
                .map(|&i| {
                    let l = g.lattice(i);
                    let e = if ax == 0 { [1, 0] } else { [0, 1] };
                    let a = u.at_lattice([l[0] + e[0], l[1] + e[1]]).unwrap_or(u.get(i));
                    let b = u.at_lattice([l[0] - e[0], l[1] - e[1]]).unwrap_or(u.get(i));
                    (a - b) / (2.0 * h)
                })
                .collect()
        })
        .collect()
}

/// Interior regularity over V = {d ≥ margin}.
#[derive(Debug, Clone, Serialize)]
pub struct RegularityReport {
    pub margin: f64,
    pub alphas: Vec<f64>,
    pub seminorm_u: Vec<f64>,
    /// Max over axes of the seminorm of the difference quotient (C^{1,α} surrogate).
    pub seminorm_dq: Vec<f64>,
}

pub fn regularity(u: &Field, margin: f64, alphas: &[f64]) -> Result<RegularityReport> {
    let g = u.grid();
    let nodes = g.nodes_with_margin(margin);
    let pts: Vec<Point> = nodes.iter().map(|&i| g.point(i)).collect();
    let vals: Vec<f64> = nodes.iter().map(|&i| u.get(i)).collect();
    let dq = difference_quotients(u, &nodes);
    let mut rep = RegularityReport { margin, alphas: alphas.to_vec(), seminorm_u: vec![], seminorm_dq: vec![] };
    for &a in alphas {
        rep.seminorm_u.push(holder_seminorm(&pts, &vals, a)?.value);
        let mut m = 0.0f64;
        for d in &dq {
            m = m.max(holder_seminorm(&pts, d, a)?.value);
        }
        rep.seminorm_dq.push(m);
    }
    Ok(rep)
}

/// Default exponent grid {0.1, …, 0.9}.
pub fn alpha_grid() -> Vec<f64> {
    (1..=9).map(|k| k as f64 / 10.0).collect()
}

/// The quotient (u − φ)/d^s near a boundary point.
#[derive(Debug, Clone, Serialize)]
pub struct BoundaryReport {
    pub x0: Point,
    pub r: f64,
    pub nodes: usize,
    pub q_sup: f64,
    pub q_inf: f64,
    /// q at the node nearest ∂U: the one-sided boundary value.
    pub q_boundary: f64,
    /// sup / inf, finite when inf > 0.
    pub sup_inf_ratio: Option<f64>,
    pub alphas: Vec<f64>,
    pub seminorms: Vec<f64>,
}

/// q = (u − φ)/d^s on B_r(x₀) ∩ U.
pub fn boundary_quotient(u: &Field, phi: &ScalarFn, domain: &Domain, s: f64, r: f64, x0: Point, alphas: &[f64]) -> Result<BoundaryReport> {
    let g = u.grid();
    let nodes: Vec<usize> = g
        .interior()
        .iter()
        .copied()
        .filter(|&i| {
            let x = g.point(i);
            (x[0] - x0[0]).hypot(x[1] - x0[1]) < r && domain.distance(x) > 0.0
        })
        .collect();
    if nodes.len() < 2 {
        return Err(Error::EmptyRegion(format!("boundary collar of radius {r} has fewer than 2 nodes")));
    }
    let pts: Vec<Point> = nodes.iter().map(|&i| g.point(i)).collect();
    let q: Vec<f64> = nodes.iter().zip(&pts).map(|(&i, &x)| (u.get(i) - phi(x)) / domain.distance(x).powf(s)).collect();
    let nearest = (0..nodes.len()).min_by(|&a, &b| domain.distance(pts[a]).total_cmp(&domain.distance(pts[b]))).expect("nonempty");
    let q_sup = q.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let q_inf = q.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut seminorms = Vec::new();
    for &a in alphas {
        seminorms.push(holder_seminorm(&pts, &q, a)?.value);
    }
    Ok(BoundaryReport {
        x0,
        r,
        nodes: nodes.len(),
        q_sup,
        q_inf,
        q_boundary: q[nearest],
        sup_inf_ratio: (q_inf > 0.0).then(|| q_sup / q_inf),
        alphas: alphas.to_vec(),
        seminorms,
    })
}

/// Contact classification and sign checks.
#[derive(Debug, Clone, Serialize)]
pub struct ComplementarityReport {
    pub tol: f64,
    pub lower_contact: usize,
    pub upper_contact: usize,
    pub pinched: usize,
    pub free: usize,
    /// max (ψ⁻ − u, u − ψ⁺, 0).
    pub sandwich_violation: f64,
    /// max of −(−Iu − f) on lower contact.
    pub lower_violation: f64,
    /// max of (−Iu − f) on upper contact.
    pub upper_violation: f64,
    /// max |−Iu − f| on free nodes.
    pub free_violation: f64,
    pub signs_ok: bool,
    /// −C_V − ‖f‖ ≤ Iu ≤ ‖f‖ + C_V on V, when C_V is supplied.
    pub operator_bound_ok: Option<bool>,
    pub operator_bound_excess: Option<f64>,
    pub pass: bool,
}

/// Contact flag per active node: "lower", "upper", "both" or "none".
pub fn contact_flags(p: &Problem, u: &Field, tol: f64) -> Vec<&'static str> {
    p.active()
        .iter()
        .enumerate()
        .map(|(k, &i)| {
            let v = u.get(i);
            match (v - p.lower()[k] <= tol, p.upper()[k] - v <= tol) {
                (true, true) => "both",
                (true, false) => "lower",
                (false, true) => "upper",
                _ => "none",
            }
        })
        .collect()
}

/// Checks the sign conditions of the max–min equation at contact and free nodes;
/// with `c_v = Some((C_V, margin))` also the operator bound on V = {d ≥ margin}.
pub fn complementarity_check(p: &Problem, u: &Field, tol: f64, c_v: Option<(f64, f64)>) -> Result<ComplementarityReport> {
    let iu = p.apply(u, Execution::default())?;
    let flags = contact_flags(p, u, tol);
    let (mut lc, mut uc, mut pc, mut fc) = (0, 0, 0, 0);
    let (mut sw, mut lv, mut uv, mut fv) = (0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for (k, &i) in p.active().iter().enumerate() {
        let v = u.get(i);
        let r = -iu[k] - p.rhs()[k];
        sw = sw.max(p.lower()[k] - v).max(v - p.upper()[k]);
        match flags[k] {
            "lower" => {
                lc += 1;
                lv = lv.max(-r);
            }
            "upper" => {
                uc += 1;
                uv = uv.max(r);
            }
            "both" => pc += 1,
            _ => {
                fc += 1;
                fv = fv.max(r.abs());
            }
        }
    }
    let signs_ok = lv <= tol && uv <= tol && fv <= tol;
    let (mut ob_ok, mut ob_ex) = (None, None);
    if let Some((cv, margin)) = c_v {
        let g = p.grid();
        let fnorm = p.rhs().iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let mut ex = f64::NEG_INFINITY;
        for (k, &i) in p.active().iter().enumerate() {
            if g.distance(i) >= margin {
                ex = ex.max(iu[k].abs() - fnorm - cv);
            }
        }
        ob_ok = Some(ex <= tol);
        ob_ex = Some(ex);
    }
    Ok(ComplementarityReport {
        tol,
        lower_contact: lc,
        upper_contact: uc,
        pinched: pc,
        free: fc,
        sandwich_violation: sw.max(0.0),
        lower_violation: lv,
        upper_violation: uv,
        free_violation: fv,
        signs_ok,
        operator_bound_ok: ob_ok,
        operator_bound_excess: ob_ex,
        pass: signs_ok && ob_ok.unwrap_or(true),
    })
}

/// Classical double obstacle problem −u'' = f on (a, b) with u(a), u(b) given,
/// solved by projected SOR on `n` interior nodes. Returns (x, u) at the nodes.
#[allow(clippy::too_many_arguments)]
pub fn classical_double_obstacle_1d(
    a: f64,
    b: f64,
    n: usize,
    f: &ScalarFn,
    lower: &ScalarFn,
    upper: &ScalarFn,
    ua: f64,
    ub: f64,
) -> Vec<(f64, f64)> {
    let h = (b - a) / (n + 1) as f64;
    let x: Vec<f64> = (1..=n).map(|i| a + i as f64 * h).collect();
    let fv: Vec<f64> = x.iter().map(|&t| f([t, 0.0])).collect();
    let lo: Vec<f64> = x.iter().map(|&t| lower([t, 0.0])).collect();
    let hi: Vec<f64> = x.iter().map(|&t| upper([t, 0.0])).collect();
    let mut u: Vec<f64> = (0..n).map(|i| 0.0f64.max(lo[i]).min(hi[i])).collect();
    let omega = 2.0 / (1.0 + (std::f64::consts::PI * h / (b - a)).sin());
    for _ in 0..200_000 {
        let mut change = 0.0f64;
        for i in 0..n {
            let l = if i == 0 { ua } else { u[i - 1] };
            let r = if i + 1 == n { ub } else { u[i + 1] };
            let gs = 0.5 * (l + r + h * h * fv[i]);
            let z = (u[i] + omega * (gs - u[i])).max(lo[i]).min(hi[i]);
            change = change.max((z - u[i]).abs());
            u[i] = z;
        }
        if change < 1e-14 {
            break;
        }
    }
    x.into_iter().zip(u).collect()
}

/// Errors against the classical limit across a family in s.
#[derive(Debug, Clone, Serialize)]
pub struct LocalLimitReport {
    pub s: Vec<f64>,
    pub errors: Vec<f64>,
    /// Errors nonincreasing over s ≥ 0.9.
    pub tail_nonincreasing: bool,
    /// α = 0.5 seminorms of difference quotients on V.
    pub seminorms: Vec<f64>,
    /// Seminorms bounded by 2× the s = 0.5 (first) value.
    pub uniform_ok: bool,
    pub pass: bool,
}

/// Compares solutions for several s against oracle values at the same stored nodes.
pub fn local_limit_error(family: &[(f64, Field)], oracle: &[(usize, f64)], margin: f64) -> Result<LocalLimitReport> {
    if family.is_empty() {
        return invalid("empty s family");
    }
    let mut s = Vec::new();
    let mut errors = Vec::new();
    let mut seminorms = Vec::new();
    for (si, u) in family {
        s.push(*si);
        errors.push(oracle.iter().fold(0.0f64, |m, &(i, v)| m.max((u.get(i) - v).abs())));
        seminorms.push(regularity(u, margin, &[0.5])?.seminorm_dq[0]);
    }
    let tail: Vec<f64> = s.iter().zip(&errors).filter(|(a, _)| **a >= 0.9).map(|(_, e)| *e).collect();
    let tail_nonincreasing = tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-15);
    let uniform_ok = seminorms.iter().all(|&v| v <= 2.0 * seminorms[0] + 1e-12);
    Ok(LocalLimitReport { s, errors, tail_nonincreasing, seminorms, uniform_ok, pass: tail_nonincreasing && uniform_ok })
}

/// Extremal inequalities for v = u − φ near the boundary.
#[derive(Debug, Clone, Serialize)]
pub struct PucciStarReport {
    pub nodes: usize,
    pub f_norm: f64,
    pub c0: f64,
    /// min of M∗⁺v + ‖f‖ + C₀ (must be ≥ 0).
    pub plus_margin: f64,
    /// max of M∗⁻v − ‖f‖ − C₀ (must be ≤ 0).
    pub minus_excess: f64,
    pub pass: bool,
}

/// Measures C₀ = C_U + sup(M⁺φ, −M⁻φ) where C_U bounds Iψ̂⁺ and −Iψ̂⁻ on U.
pub fn boundary_constant(op: &DiscreteOperator, psi_plus: &ScalarFn, psi_minus: &ScalarFn, phi: &ScalarFn, p: &EllipticityParams) -> Result<f64> {
    let g = op.grid().clone();
    let nodes = g.interior();
    let exec = Execution::default();
    let ip = op.apply(&Field::from_fn(g.clone(), psi_plus.clone()), nodes, exec)?;
    let im = op.apply(&Field::from_fn(g.clone(), psi_minus.clone()), nodes, exec)?;
    let cu = ip.iter().cloned().chain(im.iter().map(|x| -x)).fold(0.0f64, f64::max);
    let ph = Field::from_fn(g.clone(), phi.clone());
    let mp = DiscreteOperator::new(&OperatorSpec::PucciPlus { p: *p }, g.clone())?.apply(&ph, nodes, exec)?;
    let mm = DiscreteOperator::new(&OperatorSpec::PucciMinus { p: *p }, g.clone())?.apply(&ph, nodes, exec)?;
    let cphi = mp.iter().cloned().chain(mm.iter().map(|x| -x)).fold(0.0f64, f64::max);
    Ok(cu + cphi)
}

/// Checks M∗⁺v ≥ −‖f‖ − C₀ and M∗⁻v ≤ ‖f‖ + C₀ at `nodes`.
pub fn pucci_star_bound_check(v: &Field, p: &EllipticityParams, sectors: usize, f_norm: f64, c0: f64, nodes: &[usize], tol: f64) -> Result<PucciStarReport> {
    let g = v.grid().clone();
    let exec = Execution::default();
    let plus = DiscreteOperator::new(&OperatorSpec::PucciStarPlus { p: *p, sectors }, g.clone())?.apply(v, nodes, exec)?;
    let minus = DiscreteOperator::new(&OperatorSpec::PucciStarMinus { p: *p, sectors }, g)?.apply(v, nodes, exec)?;
    let plus_margin = plus.iter().map(|x| x + f_norm + c0).fold(f64::INFINITY, f64::min);
    let minus_excess = minus.iter().map(|x| x - f_norm - c0).fold(f64::NEG_INFINITY, f64::max);
    Ok(PucciStarReport { nodes: nodes.len(), f_norm, c0, plus_margin, minus_excess, pass: plus_margin >= -tol && minus_excess <= tol })
}

/// Interior nodes within distance `r` of `x0`.
pub fn collar_nodes(grid: &Grid, x0: Point, r: f64) -> Vec<usize> {
    grid.interior().iter().copied().filter(|&i| {
        let x = grid.point(i);
        (x[0] - x0[0]).hypot(x[1] - x0[1]) < r
    }).collect()
}

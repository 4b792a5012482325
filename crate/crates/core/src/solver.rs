//! Penalized, continued and direct solvers for the double obstacle problem.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::exec::Execution;
use crate::field::{Field, ScalarFn};
use crate::geometry::{Domain, Grid};
use crate::nonlocal_op::{DiscreteOperator, Scratch};
use crate::obstacles::{BlendedObstacles, MollifiedObstacles, ObstacleSet};
use crate::penalty::PenaltyFn;

/// Data of one discrete problem: operator, right-hand side, obstacles and
/// exterior data, with the active node set of `domain`.
#[derive(Clone)]
pub struct Problem {
    grid: Arc<Grid>,
    domain: Domain,
    op: Arc<DiscreteOperator>,
    exterior: ScalarFn,
    active: Vec<usize>,
    pos: Vec<usize>,
    f: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem").field("domain", &self.domain).field("active", &self.active.len()).finish()
    }
}

const NONE: usize = usize::MAX;

impl Problem {
    /// Active nodes are the stored nodes inside `domain`.
    pub fn new(
        op: Arc<DiscreteOperator>,
        domain: Domain,
        rhs: &ScalarFn,
        lower: &ScalarFn,
        upper: &ScalarFn,
        exterior: ScalarFn,
    ) -> Result<Self> {
        let grid = op.grid().clone();
        if domain.dim() != grid.dim() {
            return invalid("problem domain dimension differs from the grid");
        }
        let active = grid.nodes_in(&domain);
        if active.is_empty() {
            return Err(Error::EmptyRegion("no grid nodes inside the domain".into()));
        }
        let mut pos = vec![NONE; grid.len()];
        for (k, &i) in active.iter().enumerate() {
            pos[i] = k;
        }
        let pt = |i: usize| grid.point(i);
        let f: Vec<f64> = active.iter().map(|&i| rhs(pt(i))).collect();
        let lo: Vec<f64> = active.iter().map(|&i| lower(pt(i))).collect();
        let hi: Vec<f64> = active.iter().map(|&i| upper(pt(i))).collect();
        if f.iter().chain(&lo).chain(&hi).any(|v| !v.is_finite()) {
            return invalid("right-hand side or obstacles not finite on the grid");
        }
        if let Some(k) = (0..lo.len()).find(|&k| lo[k] > hi[k]) {
            return invalid(format!("lower obstacle exceeds upper obstacle at {:?}", pt(active[k])));
        }
        Ok(Problem { grid, domain, op, exterior, active, pos, f, lo, hi })
    }

    /// Raw obstacles on U with exterior data φ.
    pub fn from_obstacles(op: Arc<DiscreteOperator>, rhs: &ScalarFn, set: &ObstacleSet) -> Result<Self> {
        Self::new(op, set.domain, rhs, &set.psi_minus, &set.psi_plus, set.phi.clone())
    }

    /// Mollified obstacles on U_ε with exterior data φ_ε.
    pub fn from_mollified(op: Arc<DiscreteOperator>, rhs: &ScalarFn, m: &MollifiedObstacles) -> Result<Self> {
        Self::new(op, m.domain, rhs, &m.psi_minus, &m.psi_plus, m.phi.clone())
    }

    /// Blended obstacles on U with exterior data φ.
    pub fn from_blended(op: Arc<DiscreteOperator>, rhs: &ScalarFn, b: &BlendedObstacles) -> Result<Self> {
        Self::new(op, b.domain, rhs, &b.psi_minus, &b.psi_plus, b.phi.clone())
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }
    pub fn domain(&self) -> &Domain {
        &self.domain
    }
    pub fn operator(&self) -> &Arc<DiscreteOperator> {
        &self.op
    }
    pub fn exterior(&self) -> &ScalarFn {
        &self.exterior
    }
    /// Stored indices of the unknowns.
    pub fn active(&self) -> &[usize] {
        &self.active
    }
    pub fn rhs(&self) -> &[f64] {
        &self.f
    }
    pub fn lower(&self) -> &[f64] {
        &self.lo
    }
    pub fn upper(&self) -> &[f64] {
        &self.hi
    }
    /// Position of stored node `i` among the unknowns.
    pub fn position(&self, i: usize) -> Option<usize> {
        let p = self.pos[i];
        (p != NONE).then_some(p)
    }

    /// A field equal to the exterior data off the active set and `vals` on it.
    pub fn field_from(&self, vals: &[f64]) -> Field {
        let mut values: Vec<f64> = (0..self.grid.len()).map(|i| (self.exterior)(self.grid.point(i))).collect();
        for (k, &i) in self.active.iter().enumerate() {
            values[i] = vals[k];
        }
        Field::from_values(self.grid.clone(), values, Some(self.exterior.clone()))
    }

    /// Values of `u` on the active set.
    pub fn restrict(&self, u: &Field) -> Vec<f64> {
        self.active.iter().map(|&i| u.get(i)).collect()
    }

    /// I u on the active set.
    pub fn apply(&self, u: &Field, exec: Execution) -> Result<Vec<f64>> {
        self.op.apply(u, &self.active, exec)
    }

    /// max{min{−Iu − f, u − ψ⁻}, u − ψ⁺} on the active set.
    pub fn residual_maxmin(&self, u: &Field, exec: Execution) -> Result<Vec<f64>> {
        let iu = self.apply(u, exec)?;
        Ok((0..self.active.len())
            .map(|k| {
                let v = u.get(self.active[k]);
                (-iu[k] - self.f[k]).min(v - self.lo[k]).max(v - self.hi[k])
            })
            .collect())
    }

    fn clamp_start(&self, warm: Option<&Field>) -> Vec<f64> {
        (0..self.active.len())
            .map(|k| {
                let v = warm.map_or(0.0, |w| w.get(self.active[k]));
                v.max(self.lo[k]).min(self.hi[k])
            })
            .collect()
    }
}

/// Iteration for the penalized equation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PenalizedMethod {
    DampedFixedPoint,
    #[default]
    SemismoothNewton,
}

/// Algorithm for the complementarity problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DirectMethod {
    /// Howard-type policy iteration on the scaled max–min system.
    #[default]
    PolicyIteration,
    /// Lexicographic projected Gauss–Seidel.
    ProjectedGaussSeidel,
    /// Red–black colored projected sweeps, colors updated concurrently.
    RedBlack,
}

/// Solver settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveConfig {
    pub method: PenalizedMethod,
    pub direct_method: DirectMethod,
    /// Pseudo-time step for the damped iteration; derived when absent.
    pub tau: Option<f64>,
    pub tol_residual: f64,
    /// Newton and policy iterations.
    pub max_iter: usize,
    /// Sweeps for the damped and projected iterations.
    pub max_sweeps: usize,
    pub delta_schedule: Vec<f64>,
    pub epsilon_schedule: Vec<f64>,
    /// Margin defining V = {d ≥ margin} for level comparisons.
    pub interior_margin: f64,
    pub exec: Execution,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            method: PenalizedMethod::SemismoothNewton,
            direct_method: DirectMethod::PolicyIteration,
            tau: None,
            tol_residual: 1e-8,
            max_iter: 500,
            max_sweeps: 200_000,
            delta_schedule: (0..7).map(|j| 0.1 * 0.5f64.powi(j)).collect(),
            epsilon_schedule: (0..4).map(|k| 0.16 * 0.5f64.powi(k)).collect(),
            interior_margin: 0.3,
            exec: Execution::default(),
        }
    }
}

impl SolveConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_residual > 0.0) {
            return invalid("tol_residual must be positive");
        }
        for (name, s) in [("delta_schedule", &self.delta_schedule), ("epsilon_schedule", &self.epsilon_schedule)] {
            if s.is_empty() || s.iter().any(|&v| !(v > 0.0)) || s.windows(2).any(|w| w[1] >= w[0]) {
                return invalid(format!("{name} must be nonempty, positive and strictly decreasing"));
            }
        }
        if let Some(t) = self.tau {
            if !(t > 0.0) {
                return invalid("tau must be positive");
            }
        }
        Ok(())
    }
}

/// Where a solution came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Penalized { delta: f64, eps: Option<f64> },
    ContinuedEps { eps: f64 },
    Continued,
    Direct,
}

/// A computed solution with its solver statistics.
#[derive(Debug, Clone)]
pub struct SolutionField {
    pub u: Field,
    pub provenance: Provenance,
    pub iterations: usize,
    pub residual: f64,
    /// sup |β(±(u − ψ±))| for penalized solutions.
    pub c0: Option<f64>,
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// One row of the frozen operator: (−I u)_r = diag·u_r + Σ cols − rhs.
struct Row {
    diag: f64,
    rhs: f64,
    cols: Vec<(usize, f64)>,
}

fn frozen_rows(p: &Problem, u: &Field, exec: Execution) -> Result<Vec<Row>> {
    let op = &p.op;
    let m = op.stencil().len();
    exec.map_with(p.active.len(), Scratch::default, |s, r| {
        let node = p.active[r];
        let tp = op.pair_sums(u, node, &mut s.pairs)?;
        let pairs = std::mem::take(&mut s.pairs);
        let et = op.linearize(&pairs, tp, u.get(node), &mut s.eff, &mut s.sec);
        s.pairs = pairs;
        let l = p.grid.lattice(node);
        let mut row = Row { diag: 2.0 * et, rhs: et * tp, cols: Vec::with_capacity(2 * m) };
        for k in 0..m {
            let e = s.eff[k];
            row.diag += 2.0 * e;
            for plus in [true, false] {
                match op.neighbor(node, k, plus) {
                    Some(j) if p.pos[j] != NONE => row.cols.push((p.pos[j], -e)),
                    Some(j) => row.rhs += e * u.get(j),
                    None => {
                        let o = op.stencil().offsets()[k];
                        let t = if plus { [l[0] + o[0], l[1] + o[1]] } else { [l[0] - o[0], l[1] - o[1]] };
                        row.rhs += e * u.at_lattice(t).unwrap_or(0.0);
                    }
                }
            }
        }
        Ok(row)
    })
    .into_iter()
    .collect()
}

/// Solves the rows in `free` with the other unknowns fixed at `u`.
fn solve_subsystem(rows: &[Row], free: &[usize], u: &mut [f64], extra_diag: Option<&[f64]>, rhs: &[f64]) -> Result<()> {
    let nf = free.len();
    if nf == 0 {
        return Ok(());
    }
    let mut fpos = vec![NONE; u.len()];
    for (a, &r) in free.iter().enumerate() {
        fpos[r] = a;
    }
    let mut a = DMatrix::<f64>::zeros(nf, nf);
    let mut b = DVector::<f64>::zeros(nf);
    for (i, &r) in free.iter().enumerate() {
        let row = &rows[r];
        a[(i, i)] += row.diag + extra_diag.map_or(0.0, |d| d[r]);
        let mut bi = rhs[r] + row.rhs;
        for &(c, v) in &row.cols {
            if fpos[c] != NONE {
                a[(i, fpos[c])] += v;
            } else {
                bi -= v * u[c];
            }
        }
        b[i] = bi;
    }
    let x = a.lu().solve(&b).ok_or_else(|| Error::Degenerate("singular linearized system".into()))?;
    for (i, &r) in free.iter().enumerate() {
        u[r] = x[i];
    }
    Ok(())
}

fn write_active(p: &Problem, field: &mut Field, vals: &[f64]) {
    let v = field.values_mut();
    for (k, &i) in p.active.iter().enumerate() {
        v[i] = vals[k];
    }
}

/// Solves the complementarity problem directly.
pub fn solve_direct(p: &Problem, cfg: &SolveConfig, warm: Option<&Field>) -> Result<SolutionField> {
    cfg.validate()?;
    match cfg.direct_method {
        DirectMethod::PolicyIteration => match policy_iteration(p, cfg, warm) {
            Ok(s) => Ok(s),
            Err(Error::NotConverged { .. }) if !p.op.is_linear() => {
                let mut c = cfg.clone();
                c.direct_method = DirectMethod::ProjectedGaussSeidel;
                projected_sweeps(p, &c, warm)
            }
            Err(e) => Err(e),
        },
        _ => projected_sweeps(p, cfg, warm),
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Policy {
    Equation,
    Lower,
    Upper,
}

fn policy_iteration(p: &Problem, cfg: &SolveConfig, warm: Option<&Field>) -> Result<SolutionField> {
    let n = p.active.len();
    let exec = cfg.exec;
    let mut field = p.field_from(&p.clamp_start(warm));
    let mut u = p.restrict(&field);
    let mut rows = frozen_rows(p, &field, exec)?;
    if warm.is_none() && p.op.is_linear() {
        // Unconstrained solve, clipped, as the first iterate.
        let all: Vec<usize> = (0..n).collect();
        solve_subsystem(&rows, &all, &mut u, None, &p.f)?;
        for k in 0..n {
            u[k] = u[k].max(p.lo[k]).min(p.hi[k]);
        }
        write_active(p, &mut field, &u);
    }
    let mut policy = vec![Policy::Equation; n];
    let mut best = f64::INFINITY;
    for it in 1..=cfg.max_iter {
        if !p.op.is_linear() {
            rows = frozen_rows(p, &field, exec)?;
        }
        let mut changed = false;
        for k in 0..n {
            let row = &rows[k];
            let mut au = row.diag * u[k] - row.rhs;
            for &(c, v) in &row.cols {
                au += v * u[c];
            }
            let r = (au - p.f[k]) / row.diag;
            let (dl, du) = (u[k] - p.lo[k], u[k] - p.hi[k]);
            let pol = if du >= r.min(dl) {
                Policy::Upper
            } else if r <= dl {
                Policy::Equation
            } else {
                Policy::Lower
            };
            changed |= pol != policy[k];
            policy[k] = pol;
        }
        let old = u.clone();
        let free: Vec<usize> = (0..n).filter(|&k| policy[k] == Policy::Equation).collect();
        for k in 0..n {
            match policy[k] {
                Policy::Lower => u[k] = p.lo[k],
                Policy::Upper => u[k] = p.hi[k],
                Policy::Equation => {}
            }
        }
        solve_subsystem(&rows, &free, &mut u, None, &p.f)?;
        write_active(p, &mut field, &u);
        let scale = 1.0 + sup(&u);
        let step = old.iter().zip(&u).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        if !changed && step <= 1e-13 * scale {
            let res = sup(&p.residual_maxmin(&field, exec)?);
            if res <= cfg.tol_residual {
                return Ok(SolutionField { u: field, provenance: Provenance::Direct, iterations: it, residual: res, c0: None });
            }
            best = best.min(res);
            if p.op.is_linear() {
                return Err(Error::NotConverged { iterations: it, residual: res });
            }
        }
    }
    let res = sup(&p.residual_maxmin(&field, exec)?);
    Err(Error::NotConverged { iterations: cfg.max_iter, residual: best.min(res) })
}

fn projected_sweeps(p: &Problem, cfg: &SolveConfig, warm: Option<&Field>) -> Result<SolutionField> {
    let n = p.active.len();
    let mut field = p.field_from(&p.clamp_start(warm));
    let op = &p.op;
    let red_black = cfg.direct_method == DirectMethod::RedBlack;
    let colors: Vec<Vec<usize>> = if red_black {
        let c = |k: usize| {
            let l = p.grid.lattice(p.active[k]);
            ((l[0] + l[1]).rem_euclid(2)) as usize
        };
        vec![(0..n).filter(|&k| c(k) == 0).collect(), (0..n).filter(|&k| c(k) == 1).collect()]
    } else {
        Vec::new()
    };
    let mut scratch = Scratch::default();
    let mut best = f64::INFINITY;
    let check_every = 10;
    for sweep in 1..=cfg.max_sweeps {
        if red_black {
            for color in &colors {
                let f = &field;
                let new = cfg.exec.map_with(color.len(), Scratch::default, |s, i| {
                    let k = color[i];
                    let node = p.active[k];
                    op.solve_node(f, node, p.f[k], f.get(node), s).map(|z| z.max(p.lo[k]).min(p.hi[k]))
                });
                let new: Vec<f64> = new.into_iter().collect::<Result<_>>()?;
                let v = field.values_mut();
                for (i, &k) in color.iter().enumerate() {
                    v[p.active[k]] = new[i];
                }
            }
        } else {
            for k in 0..n {
                let node = p.active[k];
                let z = op.solve_node(&field, node, p.f[k], field.get(node), &mut scratch)?;
                field.values_mut()[node] = z.max(p.lo[k]).min(p.hi[k]);
            }
        }
        if sweep % check_every == 0 || sweep == cfg.max_sweeps {
            let res = sup(&p.residual_maxmin(&field, cfg.exec)?);
            best = best.min(res);
            if res <= cfg.tol_residual {
                return Ok(SolutionField { u: field, provenance: Provenance::Direct, iterations: sweep, residual: res, c0: None });
            }
        }
    }
    Err(Error::NotConverged { iterations: cfg.max_sweeps, residual: best })
}

/// F(u) = −Iu − f − β(ψ⁻ − u) + β(u − ψ⁺) on the active set.
pub fn penalized_residual(p: &Problem, pen: &PenaltyFn, u: &Field, exec: Execution) -> Result<Vec<f64>> {
    let iu = p.apply(u, exec)?;
    let uu = p.restrict(u);
    Ok(crate::penalty::penal_residual(&uu, &iu, &p.f, &p.lo, &p.hi, pen))
}

/// sup |β(±(u − ψ±))| over the active set.
pub fn measured_c0(p: &Problem, pen: &PenaltyFn, u: &Field) -> f64 {
    p.active
        .iter()
        .enumerate()
        .fold(0.0f64, |m, (k, &i)| m.max(pen.eval(p.lo[k] - u.get(i))).max(pen.eval(u.get(i) - p.hi[k])))
}

/// Solves the penalized equation for one δ.
pub fn solve_penalized(p: &Problem, pen: &PenaltyFn, cfg: &SolveConfig, warm: Option<&Field>) -> Result<SolutionField> {
    cfg.validate()?;
    let exec = cfg.exec;
    let mut u: Vec<f64> = match warm {
        Some(w) => p.restrict(w),
        None => vec![0.0; p.active.len()],
    };
    let mut field = p.field_from(&u);
    let mut f = penalized_residual(p, pen, &field, exec)?;
    let mut res = sup(&f);
    let provenance = Provenance::Penalized { delta: pen.delta(), eps: None };
    let finish = |field: Field, it: usize, res: f64| {
        let c0 = measured_c0(p, pen, &field);
        SolutionField { u: field, provenance, iterations: it, residual: res, c0: Some(c0) }
    };
    if res <= cfg.tol_residual {
        return Ok(finish(field, 0, res));
    }
    match cfg.method {
        PenalizedMethod::SemismoothNewton => {
            for it in 1..=cfg.max_iter {
                let rows = frozen_rows(p, &field, exec)?;
                let slope: Vec<f64> = (0..u.len()).map(|k| pen.penalty_slope(u[k], p.lo[k], p.hi[k])).collect();
                // J du = −F, solved as a full system with zero right-hand side offsets.
                let mut du = vec![0.0; u.len()];
                let neg_f: Vec<f64> = f.iter().map(|v| -v).collect();
                let zero_rows: Vec<Row> = rows
                    .into_iter()
                    .map(|r| Row { diag: r.diag, rhs: 0.0, cols: r.cols })
                    .collect();
                let all: Vec<usize> = (0..u.len()).collect();
                solve_subsystem(&zero_rows, &all, &mut du, Some(&slope), &neg_f)?;
                let mut alpha = 1.0;
                loop {
                    let trial: Vec<f64> = u.iter().zip(&du).map(|(a, b)| a + alpha * b).collect();
                    let tf = p.field_from(&trial);
                    let tr = penalized_residual(p, pen, &tf, exec)?;
                    let tres = sup(&tr);
                    if tres <= (1.0 - 1e-4 * alpha) * res || alpha < 1e-6 {
                        u = trial;
                        field = tf;
                        f = tr;
                        res = tres;
                        break;
                    }
                    alpha *= 0.5;
                }
                if res <= cfg.tol_residual {
                    return Ok(finish(field, it, res));
                }
            }
            Err(Error::NotConverged { iterations: cfg.max_iter, residual: res })
        }
        PenalizedMethod::DampedFixedPoint => {
            let (_, dmax) = p.op.diag_bounds();
            let tau = match cfg.tau {
                Some(t) => t,
                None => {
                    let t = 0.9 / (dmax + 2.0 * pen.max_slope());
                    if !(t.is_finite() && t > 0.0) {
                        return Err(Error::Degenerate("cannot derive a pseudo-time step".into()));
                    }
                    t
                }
            };
            let mut best = res;
            for it in 1..=cfg.max_sweeps {
                for k in 0..u.len() {
                    u[k] -= tau * f[k];
                }
                write_active(p, &mut field, &u);
                f = penalized_residual(p, pen, &field, exec)?;
                res = sup(&f);
                best = best.min(res);
                if res <= cfg.tol_residual {
                    return Ok(finish(field, it, res));
                }
            }
            Err(Error::NotConverged { iterations: cfg.max_sweeps, residual: best })
        }
    }
}

/// Per-δ record of a continuation run.
#[derive(Debug, Clone, Default, Serialize)]
pub struct DeltaTrace {
    pub deltas: Vec<f64>,
    /// sup (ũ_δ − ψ⁺)⁺.
    pub overshoot_upper: Vec<f64>,
    /// sup (ψ⁻ − ũ_δ)⁺.
    pub overshoot_lower: Vec<f64>,
    pub c0: Vec<f64>,
    pub iterations: Vec<usize>,
}

/// Overshoots (upper, lower) of `u` past the obstacles on the active set.
pub fn overshoots(p: &Problem, u: &Field) -> (f64, f64) {
    p.active.iter().enumerate().fold((0.0f64, 0.0f64), |(a, b), (k, &i)| {
        (a.max(u.get(i) - p.hi[k]), b.max(p.lo[k] - u.get(i)))
    })
}

/// Runs the penalized solve along the δ schedule with warm starts.
pub fn continuation_delta(p: &Problem, cfg: &SolveConfig, warm: Option<&Field>) -> Result<(SolutionField, DeltaTrace)> {
    cfg.validate()?;
    let mut trace = DeltaTrace::default();
    let mut current: Option<Field> = warm.cloned();
    let mut last = None;
    for &delta in &cfg.delta_schedule {
        let pen = PenaltyFn::new(delta)?;
        let sol = solve_penalized(p, &pen, cfg, current.as_ref())?;
        let (up, lo) = overshoots(p, &sol.u);
        trace.deltas.push(delta);
        trace.overshoot_upper.push(up);
        trace.overshoot_lower.push(lo);
        trace.c0.push(sol.c0.unwrap_or(0.0));
        trace.iterations.push(sol.iterations);
        current = Some(sol.u.clone());
        last = Some(sol);
    }
    Ok((last.expect("schedule is nonempty"), trace))
}

/// Per-ε record of the outer continuation.
#[derive(Debug, Clone, Default, Serialize)]
pub struct EpsilonLevel {
    pub eps: f64,
    /// Margin m_k with V_k = {d ≥ m_k}; chosen so that ε_k < d(V_k, ∂U)/3.
    pub v_margin: f64,
    pub active_nodes: usize,
    pub delta_trace: DeltaTrace,
    /// sup over V of |u_k − u_{k−1}| (absent at the first level).
    pub diff_on_v: Option<f64>,
    /// 2C1·margin + C1(ε_k + ε_{k−1}) + δ_last(C̃₀ + 1) for both levels.
    pub diff_bound: Option<f64>,
}

/// Runs the δ-continuation along the ε schedule on mollified obstacles.
pub fn continuation_epsilon(
    op: Arc<DiscreteOperator>,
    rhs: &ScalarFn,
    set: &ObstacleSet,
    cfg: &SolveConfig,
) -> Result<(SolutionField, Vec<EpsilonLevel>)> {
    cfg.validate()?;
    let grid = op.grid().clone();
    let h = grid.h();
    let v_nodes = grid.nodes_with_margin(cfg.interior_margin);
    let mut levels: Vec<EpsilonLevel> = Vec::new();
    let mut prev: Option<(Field, f64, f64)> = None;
    let mut last = None;
    for &eps in &cfg.epsilon_schedule {
        let m = MollifiedObstacles::new(set, eps, &grid)?;
        let p = Problem::from_mollified(op.clone(), rhs, &m)?;
        let warm = prev.as_ref().map(|(f, _, _)| p.field_from(&p.restrict(f)));
        let (sol, trace) = continuation_delta(&p, cfg, warm.as_ref())?;
        let dl = *cfg.delta_schedule.last().expect("nonempty");
        let c0 = *trace.c0.last().unwrap_or(&0.0);
        let (diff_on_v, diff_bound) = match &prev {
            Some((pf, peps, pc0)) => {
                let d = v_nodes.iter().fold(0.0f64, |a, &i| a.max((sol.u.get(i) - pf.get(i)).abs()));
                let b = 2.0 * set.c1 * cfg.interior_margin + set.c1 * (eps + peps) + dl * (c0 + 1.0) + dl * (pc0 + 1.0);
                (Some(d), Some(b))
            }
            None => (None, None),
        };
        levels.push(EpsilonLevel {
            eps,
            v_margin: 3.0 * eps + h,
            active_nodes: p.active().len(),
            delta_trace: trace,
            diff_on_v,
            diff_bound,
        });
        prev = Some((sol.u.clone(), eps, c0));
        last = Some(sol);
    }
    let mut sol = last.expect("schedule is nonempty");
    sol.provenance = Provenance::Continued;
    Ok((sol, levels))
}

/// sup |a − b| over stored nodes where either lies in `domain`.
pub fn sup_difference(a: &Field, b: &Field, domain: &Domain) -> f64 {
    let g = a.grid();
    (0..g.len())
        .filter(|&i| domain.contains(g.point(i)))
        .fold(0.0f64, |m, i| m.max((a.get(i) - b.get(i)).abs()))
}

//! The three subcommands.

use std::path::{Path, PathBuf};

use nonlocal_obstacle::analysis::{
    boundary_quotient, classical_double_obstacle_1d, complementarity_check, contact_flags, penal_decay, regularity, DecayReport,
};
use nonlocal_obstacle::field::Field;
use nonlocal_obstacle::geometry::Domain;
use nonlocal_obstacle::kernel::getoor_constant;
use nonlocal_obstacle::penalty::PenaltyFn;
use nonlocal_obstacle::solver::{continuation_delta, continuation_epsilon, solve_direct, solve_penalized, Problem, SolutionField};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::{Instance, Mode, ObstacleKind, RunConfig};
use crate::error::CliError;
use crate::output::{num, read_csv, write_csv, write_json, write_svg};

pub struct Outcome {
    pub summary: String,
}

fn solve(cfg: &RunConfig, inst: &Instance) -> Result<(SolutionField, Option<DecayReport>), CliError> {
    let p = &inst.problem;
    Ok(match cfg.mode {
        Mode::Direct => (solve_direct(p, &cfg.solver, None)?, None),
        Mode::Penalized => {
            let pen = PenaltyFn::new(cfg.delta.expect("validated"))?;
            (solve_penalized(p, &pen, &cfg.solver, None)?, None)
        }
        Mode::ContinuationDelta => {
            let (sol, trace) = continuation_delta(p, &cfg.solver, None)?;
            let decay = if trace.deltas.len() >= 3 { Some(penal_decay(&trace)?) } else { None };
            (sol, decay)
        }
        Mode::ContinuationEpsilon => {
            let (sol, _) = continuation_epsilon(inst.operator.clone(), &inst.rhs, &inst.obstacles, &cfg.solver)?;
            (sol, None)
        }
    })
}

/// sup-error against f/κ·(R² − |x − c|²)^s, when the instance has that closed form.
fn getoor_error(cfg: &RunConfig, inst: &Instance, u: &Field) -> Option<f64> {
    if cfg.obstacles.kind != ObstacleKind::Constant || inst.mollified.is_some() {
        return None;
    }
    if !matches!(cfg.operator_spec().ok()?, nonlocal_obstacle::nonlocal_op::OperatorSpec::Linear { .. }) {
        return None;
    }
    let f = inst.constant_rhs()?;
    let (c, r) = match cfg.domain().ok()? {
        Domain::Interval { a, b } => ([0.5 * (a + b), 0.0], 0.5 * (b - a)),
        Domain::Disk { center, radius } => (center, radius),
    };
    let k = getoor_constant(cfg.dim(), cfg.s);
    let g = &inst.grid;
    let p = &inst.problem;
    let mut err = 0.0f64;
    for (kk, &i) in p.active().iter().enumerate() {
        let x = g.point(i);
        let exact = f / k * (r * r - (x[0] - c[0]).powi(2) - (x[1] - c[1]).powi(2)).max(0.0).powf(cfg.s);
        // Only meaningful while the obstacles stay inactive.
        if exact < p.lower()[kk] || exact > p.upper()[kk] {
            return None;
        }
        err = err.max((u.get(i) - exact).abs());
    }
    Some(err)
}

/// Error against the classical double obstacle problem on the same lattice (1D only).
fn limit_error(cfg: &RunConfig, inst: &Instance, u: &Field) -> Option<f64> {
    let Domain::Interval { a, b } = cfg.domain().ok()? else { return None };
    if inst.mollified.is_some() {
        return None;
    }
    let g = &inst.grid;
    let n = ((b - a) / g.h()).round() as usize;
    if ((b - a) / g.h() - n as f64).abs() > 1e-9 || n < 2 {
        return None;
    }
    let o = &inst.obstacles;
    let (ua, ub) = ((o.phi)([a, 0.0]), (o.phi)([b, 0.0]));
    let sol = classical_double_obstacle_1d(a, b, n - 1, &inst.rhs, &o.psi_minus, &o.psi_plus, ua, ub);
    let mut err = 0.0f64;
    for (x, v) in sol {
        let i = g.nearest([x, 0.0])?;
        err = err.max((u.get(i) - v).abs());
    }
    Some(err)
}

type Rows = Vec<Vec<String>>;

/// Title, x label, x column, y column, log axes.
type PlotSpec = (&'static str, &'static str, usize, usize, bool);

fn node_rows(p: &Problem, u: &Field, tol: f64) -> Result<(Rows, Rows), CliError> {
    let res = p.residual_maxmin(u, Default::default())?;
    let iu = p.apply(u, Default::default())?;
    let flags = contact_flags(p, u, tol);
    let g = p.grid();
    let mut sol = Vec::new();
    let mut resid = Vec::new();
    for (k, &i) in p.active().iter().enumerate() {
        let x = g.point(i);
        sol.push(vec![num(x[0]), num(x[1]), num(u.get(i)), num(p.lower()[k]), num(p.upper()[k]), num(res[k]), flags[k].into()]);
        resid.push(vec![num(x[0]), num(x[1]), num(res[k]), num(-iu[k] - p.rhs()[k]), flags[k].into()]);
    }
    Ok((sol, resid))
}

const SOLUTION_HEADER: [&str; 7] = ["x1", "x2", "u", "psi_minus", "psi_plus", "residual", "contact"];
const RESIDUAL_HEADER: [&str; 5] = ["x1", "x2", "residual", "equation_residual", "contact"];

pub fn run_solve(cfg: &RunConfig, out: &Path) -> Result<Outcome, CliError> {
    std::fs::create_dir_all(out)?;
    let inst = cfg.build()?;
    let (sol, decay) = solve(cfg, &inst)?;
    let p = &inst.problem;
    let (rows, resid) = node_rows(p, &sol.u, cfg.verify.complementarity_tol)?;
    write_csv(&out.join("solution.csv"), &SOLUTION_HEADER, &rows)?;
    write_csv(&out.join("residual.csv"), &RESIDUAL_HEADER, &resid)?;
    let getoor = getoor_error(cfg, &inst, &sol.u).map(|e| {
        json!({ "sup_error": e, "bound": cfg.verify.getoor_bound, "pass": cfg.verify.getoor_bound.map(|b| e <= b) })
    });
    let report = json!({
        "hash": cfg.hash(),
        "config": cfg,
        "solve": {
            "provenance": sol.provenance,
            "iterations": sol.iterations,
            "residual": sol.residual,
            "c0": sol.c0,
            "active_nodes": p.active().len(),
            "converged": true,
        },
        "decay": decay,
        "getoor": getoor,
    });
    write_json(&out.join("report.json"), &report)?;
    let mut summary = format!("solved {} nodes in {} iterations, residual {:.3e}", p.active().len(), sol.iterations, sol.residual);
    if let Some(e) = getoor_error(cfg, &inst, &sol.u) {
        summary += &format!("; closed-form sup error {e:.4e}");
    }
    Ok(Outcome { summary })
}

fn load_solution(inst: &Instance, path: &Path) -> Result<Field, CliError> {
    let (header, rows) = read_csv(path)?;
    let col = |name: &str| {
        header.iter().position(|h| h == name).ok_or_else(|| CliError::Missing(format!("{}: no column {name}", path.display())))
    };
    let (cx, cy, cu) = (col("x1")?, col("x2")?, col("u")?);
    let p = &inst.problem;
    let g = &inst.grid;
    let mut vals = vec![f64::NAN; p.active().len()];
    for (line, r) in rows.iter().enumerate() {
        let parse = |c: usize| {
            r.get(c)
                .and_then(|v| v.parse::<f64>().ok())
                .ok_or_else(|| CliError::Missing(format!("{}: bad value on data row {}", path.display(), line + 1)))
        };
        let x = [parse(cx)?, parse(cy)?];
        let k = g.nearest(x).filter(|&i| {
            let y = g.point(i);
            (y[0] - x[0]).hypot(y[1] - x[1]) < 1e-6 * g.h()
        });
        match k.and_then(|i| p.position(i)) {
            Some(k) => vals[k] = parse(cu)?,
            None => return Err(CliError::Missing(format!("{}: row {} is not an active node of this instance", path.display(), line + 1))),
        }
    }
    if let Some(k) = vals.iter().position(|v| v.is_nan()) {
        let x = g.point(p.active()[k]);
        return Err(CliError::Missing(format!("{}: no value for node ({}, {})", path.display(), x[0], x[1])));
    }
    Ok(p.field_from(&vals))
}

pub fn run_verify(cfg: &RunConfig, out: &Path, solution: Option<PathBuf>) -> Result<Outcome, CliError> {
    let path = solution.unwrap_or_else(|| out.join("solution.csv"));
    if !path.exists() {
        return Err(CliError::Missing(format!("solution file {} not found; run `solve` first", path.display())));
    }
    std::fs::create_dir_all(out)?;
    let inst = cfg.build()?;
    let u = load_solution(&inst, &path)?;
    let p = &inst.problem;
    let v = &cfg.verify;
    let mut failures = Vec::new();

    let comp = complementarity_check(p, &u, v.complementarity_tol, None)?;
    if !(comp.pass && comp.sandwich_violation <= v.complementarity_tol) {
        failures.push(format!(
            "complementarity (sandwich {:.3e}, lower {:.3e}, upper {:.3e}, free {:.3e})",
            comp.sandwich_violation, comp.lower_violation, comp.upper_violation, comp.free_violation
        ));
    }
    let decay = if v.decay {
        let (_, trace) = continuation_delta(p, &cfg.solver, None)?;
        let d = penal_decay(&trace)?;
        if !d.all_bounds_ok {
            failures.push("penalty overshoot exceeds delta(C0 + 1)".into());
        }
        Some(d)
    } else {
        None
    };
    let reg = if v.regularity && inst.grid.nodes_with_margin(v.regularity_margin).len() >= 2 {
        Some(regularity(&u, v.regularity_margin, &v.alphas)?)
    } else {
        None
    };
    let boundary = if v.boundary {
        let dom = cfg.domain()?;
        let x0 = v.boundary_x0.unwrap_or(match dom {
            Domain::Interval { b, .. } => [b, 0.0],
            Domain::Disk { center, radius } => [center[0] + radius, center[1]],
        });
        let rep = boundary_quotient(&u, &inst.phi(), &dom, cfg.s, v.boundary_r, x0, &v.alphas)?;
        if !(rep.q_sup.is_finite() && rep.q_inf.is_finite()) {
            failures.push("boundary quotient is not finite".into());
        }
        Some(rep)
    } else {
        None
    };
    let getoor = match (v.getoor_bound, getoor_error(cfg, &inst, &u)) {
        (Some(b), Some(e)) => {
            if e > b {
                failures.push(format!("closed-form error {e:.4e} exceeds {b}"));
            }
            Some(json!({ "sup_error": e, "bound": b, "pass": e <= b }))
        }
        (Some(_), None) => return Err(CliError::Config("getoor_bound set but the instance has no closed-form solution".into())),
        (None, e) => e.map(|e| json!({ "sup_error": e })),
    };
    let limits = match (v.limit_bound, limit_error(cfg, &inst, &u)) {
        (Some(b), Some(e)) => {
            if e > b {
                failures.push(format!("local-limit error {e:.4e} exceeds {b}"));
            }
            Some(json!({ "sup_error": e, "bound": b, "pass": e <= b }))
        }
        (Some(_), None) => return Err(CliError::Config("limit_bound needs an interval domain with endpoints on the lattice".into())),
        (None, _) => None,
    };

    let (_, resid) = node_rows(p, &u, v.complementarity_tol)?;
    write_csv(&out.join("residual.csv"), &RESIDUAL_HEADER, &resid)?;
    let report = json!({
        "hash": cfg.hash(),
        "config": cfg,
        "solution": path.display().to_string(),
        "complementarity": comp,
        "decay": decay,
        "regularity": reg,
        "boundary": boundary,
        "getoor": getoor,
        "limits": limits,
        "failures": failures,
        "pass": failures.is_empty(),
    });
    write_json(&out.join("report.json"), &report)?;
    if !failures.is_empty() {
        return Err(CliError::Verify(failures.join("; ")));
    }
    Ok(Outcome { summary: format!("all checks passed on {} nodes", p.active().len()) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Axis {
    S,
    Delta,
    Epsilon,
    H,
}

pub fn run_sweep(cfg: &RunConfig, out: &Path, axis: Axis) -> Result<Outcome, CliError> {
    std::fs::create_dir_all(out)?;
    let (name, values) = match axis {
        Axis::S => ("s", &cfg.sweep.s),
        Axis::Delta => ("delta", &cfg.sweep.delta),
        Axis::Epsilon => ("epsilon", &cfg.sweep.epsilon),
        Axis::H => ("h", &cfg.sweep.h),
    };
    if values.is_empty() {
        return Err(CliError::Config(format!("sweep.{name} lists no values")));
    }
    let mut descending = values.clone();
    descending.sort_by(|a, b| b.total_cmp(a));
    let (header, rows, plot, summary): (Vec<&str>, Vec<Vec<f64>>, PlotSpec, Value) = match axis {
        Axis::S => {
            let runs: Vec<Result<Vec<f64>, CliError>> = values
                .par_iter()
                .map(|&s| {
                    let c = RunConfig { s, ..cfg.clone() };
                    let inst = c.build()?;
                    let (sol, _) = solve(&c, &inst)?;
                    let e = limit_error(&c, &inst, &sol.u).unwrap_or(f64::NAN);
                    Ok(vec![s, e, sol.residual, sol.iterations as f64])
                })
                .collect();
            let rows = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
            let tail: Vec<f64> = rows.iter().filter(|r| r[0] >= 0.9).map(|r| r[1]).collect();
            let nonincreasing = tail.windows(2).all(|w| w[1] <= w[0]);
            (vec!["s", "error", "residual", "iterations"], rows, ("error vs s", "s", 0, 1, false), json!({ "tail_nonincreasing": nonincreasing }))
        }
        Axis::Delta => {
            let inst = cfg.build()?;
            let solver = nonlocal_obstacle::SolveConfig { delta_schedule: descending.clone(), ..cfg.solver.clone() };
            let (_, trace) = continuation_delta(&inst.problem, &solver, None)?;
            let rows: Vec<Vec<f64>> = (0..trace.deltas.len())
                .map(|j| {
                    let o = trace.overshoot_upper[j].max(trace.overshoot_lower[j]);
                    vec![trace.deltas[j], o, trace.overshoot_upper[j], trace.overshoot_lower[j], trace.c0[j], trace.iterations[j] as f64]
                })
                .collect();
            let decay = if trace.deltas.len() >= 3 { Some(penal_decay(&trace)?) } else { None };
            (
                vec!["delta", "overshoot", "overshoot_upper", "overshoot_lower", "c0", "iterations"],
                rows,
                ("overshoot vs delta", "delta", 0, 1, true),
                json!({ "decay": decay }),
            )
        }
        Axis::Epsilon => {
            let inst = cfg.build()?;
            let solver = nonlocal_obstacle::SolveConfig { epsilon_schedule: descending.clone(), ..cfg.solver.clone() };
            let (_, levels) = continuation_epsilon(inst.operator.clone(), &inst.rhs, &inst.obstacles, &solver)?;
            let rows: Vec<Vec<f64>> = levels
                .iter()
                .map(|l| {
                    let o = l.delta_trace.overshoot_upper.last().copied().unwrap_or(0.0).max(l.delta_trace.overshoot_lower.last().copied().unwrap_or(0.0));
                    vec![l.eps, l.v_margin, l.active_nodes as f64, l.diff_on_v.unwrap_or(f64::NAN), l.diff_bound.unwrap_or(f64::NAN), o]
                })
                .collect();
            let within = levels.iter().all(|l| match (l.diff_on_v, l.diff_bound) {
                (Some(d), Some(b)) => d <= b,
                _ => true,
            });
            (
                vec!["epsilon", "v_margin", "active_nodes", "diff_on_v", "diff_bound", "final_overshoot"],
                rows,
                ("level difference vs epsilon", "epsilon", 0, 3, true),
                json!({ "differences_within_bound": within }),
            )
        }
        Axis::H => {
            let alpha = cfg.verify.alphas.first().copied().unwrap_or(0.5);
            let runs: Vec<Result<Vec<f64>, CliError>> = descending
                .par_iter()
                .map(|&h| {
                    let c = RunConfig { h, ..cfg.clone() };
                    let inst = c.build()?;
                    let (sol, _) = solve(&c, &inst)?;
                    let e = getoor_error(&c, &inst, &sol.u).unwrap_or(f64::NAN);
                    let reg = regularity(&sol.u, c.verify.regularity_margin, &[alpha])?;
                    Ok(vec![h, e, reg.seminorm_u[0], reg.seminorm_dq[0], sol.residual])
                })
                .collect();
            let rows = runs.into_iter().collect::<Result<Vec<_>, _>>()?;
            let ratios: Vec<f64> = rows.windows(2).map(|w| w[0][1] / w[1][1]).collect();
            (
                vec!["h", "error", "seminorm_u", "seminorm_dq", "residual"],
                rows,
                ("seminorm vs h", "h", 0, 2, true),
                json!({ "error_ratios": ratios, "alpha": alpha }),
            )
        }
    };
    let text: Vec<Vec<String>> = rows.iter().map(|r| r.iter().map(|&v| num(v)).collect()).collect();
    write_csv(&out.join("sweep.csv"), &header, &text)?;
    let (title, xl, xi, yi, log) = plot;
    let mut series = vec![(header[yi].to_string(), rows.iter().map(|r| (r[xi], r[yi])).collect::<Vec<_>>())];
    if axis == Axis::H && rows.iter().any(|r| r[1].is_finite()) {
        series.push(("error".into(), rows.iter().map(|r| (r[0], r[1])).collect()));
    }
    write_svg(&out.join(format!("plot_{name}.svg")), title, xl, header[yi], &series, log)?;
    let report = json!({ "hash": cfg.hash(), "config": cfg, "axis": name, "columns": header, "rows": rows, "summary": summary });
    write_json(&out.join("report.json"), &report)?;
    Ok(Outcome { summary: format!("{} sub-runs along {name}", rows.len()) })
}

mod common;

use std::sync::Arc;

use common::*;
use nonlocal_obstacle::analysis::*;
use nonlocal_obstacle::field::{constant_fn, scalar_fn, Field};
use nonlocal_obstacle::geometry::Grid;
use nonlocal_obstacle::kernel::frac_kernel;
use nonlocal_obstacle::nonlocal_op::{DiscreteOperator, OperatorSpec};
use nonlocal_obstacle::obstacles::*;
use nonlocal_obstacle::presets::bracketing_params;
use nonlocal_obstacle::solver::*;

fn linear(g: &Arc<Grid>, s: f64) -> Arc<DiscreteOperator> {
    Arc::new(DiscreteOperator::new(&OperatorSpec::Linear { kernel: frac_kernel(g.dim(), s).unwrap() }, g.clone()).unwrap())
}

fn sqrt_abs(h: f64) -> (Vec<[f64; 2]>, Vec<f64>) {
    let n = (1.0 / h).round() as i64;
    let pts: Vec<[f64; 2]> = (-n..=n).map(|i| [i as f64 * h, 0.0]).collect();
    let vals = pts.iter().map(|p| p[0].abs().sqrt()).collect();
    (pts, vals)
}

#[test]
fn holder_of_square_root() {
    let (pts, vals) = sqrt_abs(0.01);
    let half = holder_seminorm(&pts, &vals, 0.5).unwrap();
    assert!((half.value - 1.0).abs() < 1e-12, "{}", half.value);
    // Above the true exponent the seminorm blows up like h^{−0.2}.
    let a = holder_seminorm(&pts, &vals, 0.7).unwrap().value;
    let (pts, vals) = sqrt_abs(0.005);
    let b = holder_seminorm(&pts, &vals, 0.7).unwrap().value;
    assert!((b / a - 2f64.powf(0.2)).abs() < 1e-9, "{}", b / a);
    assert!(holder_seminorm(&pts[..1], &vals[..1], 0.5).is_err());
}

#[test]
fn loglog_slope_of_power_law() {
    let x = [0.1, 0.05, 0.025, 0.0125];
    let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.5)).collect();
    assert!((loglog_slope(&x, &y).unwrap() - 1.5).abs() < 1e-12);
    assert!(loglog_slope(&x[..1], &y[..1]).is_none());
}

#[test]
fn boundary_quotient_of_getoor_profile() {
    // (1 − x²)^{1/2} / (1 − x)^{1/2} = (1 + x)^{1/2} → √2 at x = 1.
    let g = grid(interval(), 1.0 / 400.0);
    let u = field(&g, scalar_fn(|x| (1.0 - x[0] * x[0]).max(0.0).sqrt()));
    let rep = boundary_quotient(&u, &constant_fn(0.0), &interval(), 0.5, 0.05, [1.0, 0.0], &[0.5]).unwrap();
    assert!((rep.q_boundary - 2f64.sqrt()).abs() < 1e-3);
    assert!(rep.q_inf >= (1.95f64).sqrt() - 1e-12 && rep.q_sup <= 2f64.sqrt());
    assert!(rep.sup_inf_ratio.unwrap() < 1.02);
}

#[test]
fn decay_for_trivial_problem_is_inactive() {
    let g = grid(interval(), 0.02);
    let p = Problem::from_obstacles(linear(&g, 0.5), &constant_fn(0.0), &preset_distance_obstacles(interval())).unwrap();
    let (_, trace) = continuation_delta(&p, &SolveConfig::default(), None).unwrap();
    let rep = penal_decay(&trace).unwrap();
    assert_eq!(rep.status, DecayStatus::InactiveObstacles);
    assert!(rep.slope.is_none() && rep.all_bounds_ok);
}

#[test]
fn complementarity_of_direct_solution() {
    let g = grid(interval(), 0.01);
    let p = Problem::from_obstacles(linear(&g, 0.5), &constant_fn(1.5), &preset_distance_obstacles(interval())).unwrap();
    let sol = solve_direct(&p, &SolveConfig::default(), None).unwrap();
    let rep = complementarity_check(&p, &sol.u, 1e-7, None).unwrap();
    assert!(rep.pass && rep.upper_contact > 0 && rep.free > 0, "{rep:?}");
    assert_eq!(rep.lower_contact, 0);
    let flags = contact_flags(&p, &sol.u, 1e-7);
    assert_eq!(flags.len(), p.active().len());
    // A field above ψ⁺ is flagged.
    let bad = p.field_from(&vec![2.0; p.active().len()]);
    let rep = complementarity_check(&p, &bad, 1e-7, None).unwrap();
    // The largest excess is at the node nearest the boundary, where ψ⁺ = h.
    assert!(!rep.pass && (rep.sandwich_violation - (2.0 - g.h())).abs() < 1e-9, "{rep:?}");
}

#[test]
fn classical_oracle() {
    let f = constant_fn(8.0);
    let set = preset_distance_obstacles(interval());
    let sol = classical_double_obstacle_1d(-1.0, 1.0, 399, &f, &set.psi_minus, &set.psi_plus, 0.0, 0.0);
    for (x, v) in sol {
        assert!((v - classical_f8(x)).abs() < 1e-3, "x={x}");
    }
    let zero = classical_double_obstacle_1d(-1.0, 1.0, 99, &constant_fn(0.0), &set.psi_minus, &set.psi_plus, 0.0, 0.0);
    assert!(zero.iter().all(|(_, v)| v.abs() < 1e-12));
}

#[test]
fn local_limit_of_zero_data() {
    let g = grid(interval(), 0.02);
    let family: Vec<(f64, Field)> = [0.5, 0.9].iter().map(|&s| (s, Field::zeros(g.clone()))).collect();
    let oracle: Vec<(usize, f64)> = g.interior().iter().map(|&i| (i, 0.0)).collect();
    let rep = local_limit_error(&family, &oracle, 0.3).unwrap();
    assert!(rep.errors.iter().all(|&e| e == 0.0) && rep.pass);
}

#[test]
fn lemma_bound_requires_margin() {
    let set = preset_distance_obstacles(interval());
    let g = grid(interval(), 0.005);
    let op = linear(&g, 0.5);
    assert!(lemma1_bound(&set, &op, 0.1, &[0.04]).is_err());
    let rep = lemma1_bound(&set, &op, 0.3, &[0.08, 0.04]).unwrap();
    assert!(rep.uniform_abs_ok && rep.c_v.iter().all(|&c| c == 0.0));
}

#[test]
fn pucci_star_bound_for_zero_field() {
    let g = grid(disk(), 1.0 / 16.0);
    let p = bracketing_params(2, 0.5).unwrap();
    let v = Field::zeros(g.clone());
    let nodes = collar_nodes(&g, [1.0, 0.0], 0.3);
    assert!(!nodes.is_empty());
    let rep = pucci_star_bound_check(&v, &p, 8, 0.0, 0.0, &nodes, 1e-12).unwrap();
    assert!(rep.pass);
}

#[test]
fn regularity_of_smooth_field() {
    let g = grid(interval(), 0.01);
    let u = field(&g, scalar_fn(|x| x[0].sin()));
    let rep = regularity(&u, 0.3, &[0.5, 1.0]).unwrap();
    assert!(rep.seminorm_u[1] <= 1.0 + 1e-9);
    assert!(rep.seminorm_dq[1] <= 1.0 + 1e-3);
    assert_eq!(alpha_grid().len(), 9);
}

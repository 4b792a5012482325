use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use nonlocal_obstacle::exec::Execution;
use nonlocal_obstacle::field::{constant_fn, scalar_fn, Field};
use nonlocal_obstacle::geometry::{Domain, Grid};
use nonlocal_obstacle::kernel::frac_kernel;
use nonlocal_obstacle::nonlocal_op::{DiscreteOperator, OperatorSpec};
use nonlocal_obstacle::obstacles::preset_distance_obstacles;
use nonlocal_obstacle::penalty::PenaltyFn;
use nonlocal_obstacle::presets::bracketing_params;
use nonlocal_obstacle::solver::{solve_direct, solve_penalized, DirectMethod, PenalizedMethod, Problem, SolveConfig};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn apply(c: &mut Criterion) {
    let disk = Domain::disk([0.0, 0.0], 1.0).unwrap();
    let g = Arc::new(Grid::new(disk, 1.0 / 24.0, 2.0).unwrap());
    let u = Field::from_fn(g.clone(), scalar_fn(|x| (-(x[0] * x[0] + x[1] * x[1])).exp()));
    let specs = [
        ("linear", OperatorSpec::Linear { kernel: frac_kernel(2, 0.5).unwrap() }),
        ("pucci_star_plus", OperatorSpec::PucciStarPlus { p: bracketing_params(2, 0.5).unwrap(), sectors: 16 }),
    ];
    let mut group = c.benchmark_group("apply_disk_h24");
    group.sample_size(10);
    for (name, spec) in specs {
        let op = DiscreteOperator::new(&spec, g.clone()).unwrap();
        for (mode, exec) in MODES {
            group.bench_with_input(BenchmarkId::new(name, mode), &exec, |b, &e| {
                b.iter(|| op.apply(&u, g.interior(), e).unwrap())
            });
        }
    }
    group.finish();
}

fn sweeps(c: &mut Criterion) {
    let dom = Domain::interval(-1.0, 1.0).unwrap();
    let g = Arc::new(Grid::new(dom, 1.0 / 100.0, 2.0).unwrap());
    let op = Arc::new(DiscreteOperator::new(&OperatorSpec::Linear { kernel: frac_kernel(1, 0.5).unwrap() }, g).unwrap());
    let p = Problem::from_obstacles(op, &constant_fn(8.0), &preset_distance_obstacles(dom)).unwrap();
    let pen = PenaltyFn::new(0.05).unwrap();
    let mut group = c.benchmark_group("sweeps_interval_h100");
    group.sample_size(10);
    for (mode, exec) in MODES {
        let red_black = SolveConfig { direct_method: DirectMethod::RedBlack, exec, ..SolveConfig::default() };
        group.bench_function(BenchmarkId::new("red_black", mode), |b| b.iter(|| solve_direct(&p, &red_black, None).unwrap()));
        let damped = SolveConfig { method: PenalizedMethod::DampedFixedPoint, exec, ..SolveConfig::default() };
        group.bench_function(BenchmarkId::new("damped", mode), |b| b.iter(|| solve_penalized(&p, &pen, &damped, None).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, apply, sweeps);
criterion_main!(benches);

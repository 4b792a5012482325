#![allow(dead_code)]

use std::sync::Arc;

use nonlocal_obstacle::field::{scalar_fn, Field, ScalarFn};
use nonlocal_obstacle::geometry::{Domain, Grid, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn interval() -> Domain {
    Domain::interval(-1.0, 1.0).unwrap()
}

pub fn disk() -> Domain {
    Domain::disk([0.0, 0.0], 1.0).unwrap()
}

pub fn grid(d: Domain, h: f64) -> Arc<Grid> {
    Arc::new(Grid::new(d, h, d.diameter()).unwrap())
}

/// Sum of three Gaussian bumps with random centres, widths and heights.
pub fn random_bumps(rng: &mut ChaCha8Rng, dim: usize) -> ScalarFn {
    let bumps: Vec<(Point, f64, f64)> = (0..3)
        .map(|_| {
            let c = [rng.gen_range(-1.0..1.0), if dim == 2 { rng.gen_range(-1.0..1.0) } else { 0.0 }];
            (c, rng.gen_range(0.2..0.6), rng.gen_range(-1.0..1.0))
        })
        .collect();
    scalar_fn(move |x| {
        bumps
            .iter()
            .map(|(c, w, a)| a * (-((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2)) / (w * w)).exp())
            .sum()
    })
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn field(g: &Arc<Grid>, f: ScalarFn) -> Field {
    Field::from_fn(g.clone(), f)
}

/// Classical solution of −u'' = 8 on (−1, 1), u(±1) = 0, with obstacles ±(1 − |x|).
pub fn classical_f8(x: f64) -> f64 {
    let x = x.abs();
    if x < 0.125 {
        0.9375 - 4.0 * x * x
    } else {
        1.0 - x
    }
}

pub fn line(id: &str, pass: bool, detail: &str) {
    println!("{id} [{}] {detail}", if pass { "PASS" } else { "FAIL" });
}

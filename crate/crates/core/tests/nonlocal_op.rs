#![allow(clippy::excessive_precision, clippy::needless_range_loop)]

mod common;

use std::sync::Arc;

use common::*;
use nonlocal_obstacle::exec::Execution;
use nonlocal_obstacle::field::{constant_fn, scalar_fn, Field};
use nonlocal_obstacle::geometry::{Domain, Grid};
use nonlocal_obstacle::kernel::{frac_kernel, EllipticityParams, KernelSpec};
use nonlocal_obstacle::nonlocal_op::*;
use nonlocal_obstacle::presets::{bracketing_params, infsup_families};

// −(−Δ)^s e^{−x²} in one dimension at x = 0 and x = 1/2, from the Kummer-function formula.
// At s = 1/2 and x = 0 the value is 2/√π.
const GAUSS: [(f64, f64, f64); 3] = [
    (0.3, 0.995592784215834606, 0.651874920403553397),
    (0.5, std::f64::consts::FRAC_2_SQRT_PI, 0.649453994194469101),
    (0.7, 1.367066249315245753, 0.682300193619369665),
];

fn gaussian() -> nonlocal_obstacle::field::ScalarFn {
    scalar_fn(|x| (-x[0] * x[0]).exp())
}

fn op(spec: OperatorSpec, g: &Arc<Grid>) -> DiscreteOperator {
    DiscreteOperator::new(&spec, g.clone()).unwrap()
}

fn at(g: &Grid, x: f64) -> usize {
    g.nearest([x, 0.0]).unwrap()
}

#[test]
fn second_differences() {
    let g = grid(interval(), 0.1);
    let affine = field(&g, scalar_fn(|x| 3.0 * x[0] - 1.0));
    let quad = field(&g, scalar_fn(|x| x[0] * x[0]));
    let i = at(&g, 0.3);
    for k in 1..5i64 {
        assert!(second_diff(&affine, i, [k, 0]).unwrap().abs() < 1e-12);
        let y = k as f64 * 0.1;
        assert!((second_diff(&quad, i, [k, 0]).unwrap() - 2.0 * y * y).abs() < 1e-12);
    }
}

#[test]
fn constants_are_annihilated() {
    let g = grid(disk(), 1.0 / 8.0);
    let u = field(&g, constant_fn(2.5));
    let p = bracketing_params(2, 0.5).unwrap();
    for spec in [
        OperatorSpec::Linear { kernel: frac_kernel(2, 0.5).unwrap() },
        OperatorSpec::PucciPlus { p },
        OperatorSpec::PucciStarMinus { p, sectors: 8 },
    ] {
        let v = op(spec, &g).apply(&u, g.interior(), Execution::default()).unwrap();
        assert!(v.iter().all(|x| x.abs() < 1e-12));
    }
}

#[test]
fn getoor_profile_at_centre() {
    // (1 − x²)_+^{1/2} satisfies (−Δ)^{1/2}u = 1 on (−1, 1).
    let g = grid(interval(), 1.0 / 400.0);
    let u = field(&g, scalar_fn(|x| (1.0 - x[0] * x[0]).max(0.0).sqrt()));
    let lin = op(OperatorSpec::Linear { kernel: frac_kernel(1, 0.5).unwrap() }, &g);
    let v = lin.apply(&u, &[at(&g, 0.0)], Execution::Sequential).unwrap()[0];
    assert!((v + 1.0).abs() < 0.01, "{v}");
}

#[test]
fn gaussian_consistency() {
    for (s, v0, v5) in GAUSS {
        let errs: Vec<f64> = [1.0 / 50.0, 1.0 / 100.0, 1.0 / 200.0]
            .iter()
            .map(|&h| {
                let g = Arc::new(Grid::new(interval(), h, 6.0).unwrap());
                let u = field(&g, gaussian());
                let lin = op(OperatorSpec::Linear { kernel: frac_kernel(1, s).unwrap() }, &g);
                let v = lin.apply(&u, &[at(&g, 0.0), at(&g, 0.5)], Execution::default()).unwrap();
                (v[0] + v0).abs().max((v[1] + v5).abs())
            })
            .collect();
        assert!(errs[2] < 0.02, "s={s}: {errs:?}");
        assert!(errs[0] / errs[1] >= 1.5 && errs[1] / errs[2] >= 1.5, "s={s}: {errs:?}");
    }
}

#[test]
fn pucci_plus_of_gaussian_at_peak() {
    // Every second difference at the peak is negative, so M⁺ reduces to the λ branch:
    // (1−s)λ ∫ (2e^{−y²} − 2)/(2y²) dy = −2√π with λ = 1, Λ = 2, s = 1/2.
    let exact = -2.0 * std::f64::consts::PI.sqrt();
    let p = EllipticityParams::new(1.0, 2.0, 0.5, 0.1).unwrap();
    let g = Arc::new(Grid::new(interval(), 1.0 / 200.0, 6.0).unwrap());
    let u = field(&g, gaussian());
    let v = op(OperatorSpec::PucciPlus { p }, &g).apply(&u, &[at(&g, 0.0)], Execution::default()).unwrap()[0];
    assert!((v - exact).abs() < 0.01 * exact.abs(), "{v} vs {exact}");
}

#[test]
fn extremal_ordering_and_one_dimensional_star() {
    let mut r = rng(3);
    let g = grid(interval(), 0.02);
    let p = bracketing_params(1, 0.5).unwrap();
    let m = [
        op(OperatorSpec::PucciMinus { p }, &g),
        op(OperatorSpec::PucciStarMinus { p, sectors: 4 }, &g),
        op(OperatorSpec::PucciStarPlus { p, sectors: 4 }, &g),
        op(OperatorSpec::PucciPlus { p }, &g),
    ];
    for _ in 0..10 {
        let u = field(&g, random_bumps(&mut r, 1));
        let v: Vec<Vec<f64>> = m.iter().map(|o| o.apply(&u, g.interior(), Execution::default()).unwrap()).collect();
        for k in 0..v[0].len() {
            for j in 0..3 {
                assert!(v[j][k] <= v[j + 1][k] + 1e-10);
            }
        }
    }
    // For a convex profile every second difference is positive, so each star variant
    // coincides with its Pucci counterpart.
    let u = field(&g, scalar_fn(|x| x[0] * x[0]));
    let v: Vec<Vec<f64>> = m.iter().map(|o| o.apply(&u, g.interior(), Execution::default()).unwrap()).collect();
    for k in 0..v[0].len() {
        assert!((v[0][k] - v[1][k]).abs() <= 1e-9 * (1.0 + v[1][k].abs()));
        assert!((v[2][k] - v[3][k]).abs() <= 1e-9 * (1.0 + v[3][k].abs()));
    }
}

#[test]
fn pucci_plus_is_subadditive() {
    let mut r = rng(11);
    let g = grid(disk(), 1.0 / 10.0);
    let p = bracketing_params(2, 0.4).unwrap();
    let mp = op(OperatorSpec::PucciPlus { p }, &g);
    for _ in 0..5 {
        let u = field(&g, random_bumps(&mut r, 2));
        let v = field(&g, random_bumps(&mut r, 2));
        let e = Execution::default();
        let a = mp.apply(&u.add(&v), g.interior(), e).unwrap();
        let b = mp.apply(&u, g.interior(), e).unwrap();
        let c = mp.apply(&v, g.interior(), e).unwrap();
        for k in 0..a.len() {
            assert!(a[k] <= b[k] + c[k] + 1e-10);
        }
    }
}

#[test]
fn stencil_weights_are_positive() {
    for (n, h) in [(1usize, 0.01), (2, 0.1)] {
        let st = Stencil::new(n, h, 0.5, 2.0).unwrap();
        assert!(st.weights().iter().all(|&w| w > 0.0));
        assert!(st.tail() > 0.0 && st.r_eff() >= 2.0 - h);
    }
}

#[test]
fn infsup_satisfies_ellipticity() {
    let mut r = rng(5);
    let g = grid(disk(), 1.0 / 10.0);
    let p = bracketing_params(2, 0.5).unwrap();
    let o = op(OperatorSpec::InfSup { p, families: infsup_families(2, 0.5).unwrap() }, &g);
    for _ in 0..5 {
        let u = field(&g, random_bumps(&mut r, 2));
        let v = field(&g, random_bumps(&mut r, 2));
        assert!(ellipticity_test(&o, &p, &u, &v, 1e-10).unwrap().pass);
    }
}

#[test]
fn infsup_rejects_kernels_outside_the_band() {
    let g = grid(interval(), 0.05);
    let p = bracketing_params(1, 0.5).unwrap();
    let k = KernelSpec::homogeneous(1, 0.5, vec![100.0]).unwrap();
    assert!(DiscreteOperator::new(&OperatorSpec::InfSup { p, families: vec![vec![k]] }, g).is_err());
}

#[test]
fn missing_exterior_data_is_an_error() {
    let g = grid(interval(), 0.05);
    let lin = op(OperatorSpec::Linear { kernel: frac_kernel(1, 0.5).unwrap() }, &g);
    let u = Field::from_values(g.clone(), vec![1.0; g.len()], None);
    assert!(lin.apply(&u, g.interior(), Execution::Sequential).is_err());
    // Zero data passes the tail check without an exterior callable.
    let z = Field::from_values(g.clone(), vec![0.0; g.len()], None);
    assert!(lin.apply(&z, g.interior(), Execution::Sequential).is_ok());
}

#[test]
fn free_functions_agree_with_operator() {
    let g = grid(interval(), 0.05);
    let u = field(&g, gaussian());
    let p = bracketing_params(1, 0.5).unwrap();
    let k = frac_kernel(1, 0.5).unwrap();
    let a = apply_linear(&u, &k, 1e-6).unwrap();
    let b = op(OperatorSpec::Linear { kernel: k }, &g).apply_interior(&u, Execution::Sequential).unwrap();
    assert_eq!(a.values(), b.values());
    let mp = apply_pucci(&u, &p, true, 1e-6).unwrap();
    let msp = apply_pucci_star(&u, &p, true, 4, 1e-6).unwrap();
    for &i in g.interior() {
        assert!(msp.get(i) <= mp.get(i) + 1e-12);
    }
    let _ = Domain::interval(0.0, 1.0);
}

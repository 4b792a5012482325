#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;
use std::sync::Arc;

use nonlocal_obstacle::kernel::*;
use nonlocal_obstacle::quadrature::integrate;

// High-precision reference values of the kernel constant.
const C_1_05: f64 = 0.159154943091895335768883763373;
const C_2_05: f64 = 0.0795774715459476678844418816863;
const C_1_03: f64 = 0.115048190840816049086608471661;
const C_2_07: f64 = 0.0893001912192223688063259405135;
const C_1_09: f64 = 0.0824524694091513478254517453848;

#[test]
fn kernel_constants_match_reference() {
    for (n, s, c) in [(1, 0.5, C_1_05), (2, 0.5, C_2_05), (1, 0.3, C_1_03), (2, 0.7, C_2_07), (1, 0.9, C_1_09)] {
        assert!((frac_constant(n, s) - c).abs() < 1e-13 * c, "n={n} s={s}");
    }
    assert!((C_1_05 - 0.5 / PI).abs() < 1e-16);
}

#[test]
fn getoor_constants() {
    assert!((getoor_constant(1, 0.5) - 1.0).abs() < 1e-13);
    assert!((getoor_constant(2, 0.5) - PI / 2.0).abs() < 1e-13);
}

#[test]
fn sphere_areas() {
    assert_eq!(sphere_area(1), 2.0);
    assert!((sphere_area(2) - 2.0 * PI).abs() < 1e-15);
}

#[test]
fn symmetric_and_homogeneous() {
    let k = frac_kernel(2, 0.4).unwrap();
    for y in [[0.3, 0.1], [-1.2, 0.7], [0.05, -0.02]] {
        assert_eq!(k.eval(y), k.eval([-y[0], -y[1]]));
        let scale = 2.5f64;
        let ratio = k.eval([scale * y[0], scale * y[1]]) / k.eval(y);
        assert!((ratio - scale.powf(-2.8)).abs() < 1e-12);
    }
    let a = KernelSpec::homogeneous(2, 0.5, vec![1.0, 2.0, 3.0]).unwrap();
    assert_eq!(a.eval([0.2, 0.3]), a.eval([-0.2, -0.3]));
}

#[test]
fn tail_mass_closed_form() {
    // 1D, s = 1/2, c = 1/(2π): 2 ∫_1^∞ c y^{-2} dy = 1/π.
    let k = frac_kernel(1, 0.5).unwrap();
    assert!((k.tail_mass(1.0).unwrap() - 1.0 / PI).abs() < 1e-14);
    // Unit constant, R = 1/2: 2 ∫_{1/2}^∞ y^{-2} dy = 4.
    let u = KernelSpec::Fractional { n: 1, s: 0.5, c: 1.0 };
    assert!((u.tail_mass(0.5).unwrap() - 4.0).abs() < 1e-13);
}

#[test]
fn tail_mass_against_quadrature() {
    // ∫_{|y|>R} K = |S| c ∫_R^∞ r^{-1-2s} dr; with r = R/t this is |S| c R^{-2s} ∫_0^1 t^{2s-1} dt.
    for s in [0.3, 0.5, 0.7] {
        for n in [1usize, 2] {
            let k = frac_kernel(n, s).unwrap();
            let r = 0.37f64;
            let c = frac_constant(n, s);
            let area = if n == 1 { 2.0 } else { 2.0 * PI };
            let quad: f64 = (0..64)
                .map(|j| {
                    let (a, b) = (j as f64 / 64.0, (j + 1) as f64 / 64.0);
                    integrate(|t| t.powf(2.0 * s - 1.0), a, b, 16)
                })
                .sum();
            let brute = area * c * r.powf(-2.0 * s) * quad;
            let exact = k.tail_mass(r).unwrap();
            assert!((brute - exact).abs() <= 0.02 * exact, "s={s} n={n}: {brute} vs {exact}");
        }
    }
}

#[test]
fn levy_mass_is_stable_under_refinement() {
    for (n, s) in [(1usize, 0.3), (1, 0.7), (2, 0.5)] {
        let k = frac_kernel(n, s).unwrap();
        let h = if n == 1 { 1e-3 } else { 1.0 / 64.0 };
        let a = k.levy_mass(h).unwrap();
        let b = k.levy_mass(h / 2.0).unwrap();
        assert!(a.is_finite() && (a - b).abs() <= 0.05 * b, "n={n} s={s}: {a} vs {b}");
    }
}

#[test]
fn power_bounded_tail_is_an_error() {
    let k = KernelSpec::power_bounded(1, 0.5, Arc::new(|y: [f64; 2]| y[0].abs().powi(-2))).unwrap();
    assert!(k.tail_mass(1.0).is_err());
}

#[test]
fn l0_comparability() {
    let p = EllipticityParams::new(1.0, 2.0, 0.5, 0.1).unwrap();
    let samples: Vec<[f64; 2]> = (1..50).map(|i| [0.05 * i as f64, 0.0]).collect();
    // (1−s)·1.5 sits strictly inside [(1−s)·1, (1−s)·2].
    let inside = KernelSpec::Fractional { n: 1, s: 0.5, c: 0.75 };
    assert!(l0_check(&inside, &p, &samples).pass);
    let below = KernelSpec::Fractional { n: 1, s: 0.5, c: 0.4 };
    let r = l0_check(&below, &p, &samples);
    assert!(!r.pass && r.violations.len() == samples.len());
    // Oscillating kernel leaving the band only for |y| > 1.
    let osc = KernelSpec::power_bounded(1, 0.5, Arc::new(|y: [f64; 2]| {
        let r = y[0].abs();
        (if r > 1.0 { 1.2 } else { 0.75 }) * r.powi(-2)
    }))
    .unwrap();
    let r = l0_check(&osc, &p, &samples);
    assert!(!r.pass && r.violations.iter().all(|v| v.0[0] > 1.0));
}

#[test]
fn ellipticity_params_validation() {
    assert!(EllipticityParams::new(2.0, 1.0, 0.5, 0.1).is_err());
    assert!(EllipticityParams::new(1.0, 2.0, 0.05, 0.1).is_err());
    assert!(EllipticityParams::new(1.0, 2.0, 1.0, 0.1).is_err());
    let p = EllipticityParams::new(1.0, 3.0, 0.25, 0.1).unwrap();
    assert_eq!((p.lower(), p.upper()), (0.75, 2.25));
}

#[test]
fn sectors_partition_directions() {
    let m = 8;
    let mut seen = vec![false; m];
    for k in 0..64 {
        let t = (k as f64 + 0.5) * PI / 32.0;
        let sec = sector_of([t.cos(), t.sin()], m);
        assert!(sec < m);
        assert_eq!(sec, sector_of([-t.cos(), -t.sin()], m));
        seen[sec] = true;
    }
    assert!(seen.iter().all(|&b| b));
}

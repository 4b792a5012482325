//! Nonlocal kernels, ellipticity parameters and closed-form tail masses.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma;

use crate::error::{invalid, Result};
use crate::geometry::Point;

/// Ellipticity bounds λ ≤ Λ and order bounds 0 < s₀ < s < 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipticityParams {
    pub lambda: f64,
    #[serde(rename = "Lambda")]
    pub big_lambda: f64,
    pub s: f64,
    pub s0: f64,
}

impl EllipticityParams {
    pub fn new(lambda: f64, big_lambda: f64, s: f64, s0: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= big_lambda && big_lambda.is_finite()) {
            return invalid(format!("need 0 < lambda <= Lambda, got {lambda}, {big_lambda}"));
        }
        if !(s0 > 0.0 && s0 < s && s < 1.0) {
            return invalid(format!("need 0 < s0 < s < 1, got s0 = {s0}, s = {s}"));
        }
        Ok(Self { lambda, big_lambda, s, s0 })
    }

    /// Smallest admissible kernel multiplier (1−s)λ.
    pub fn lower(&self) -> f64 {
        (1.0 - self.s) * self.lambda
    }

    /// Largest admissible kernel multiplier (1−s)Λ.
    pub fn upper(&self) -> f64 {
        (1.0 - self.s) * self.big_lambda
    }
}

pub type KernelFn = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

/// A symmetric positive kernel K(y).
#[derive(Clone)]
pub enum KernelSpec {
    /// c·|y|^{−n−2s}.
    Fractional { n: usize, s: f64, c: f64 },
    /// An arbitrary even kernel, expected to lie in the L₀ sandwich.
    PowerBounded { n: usize, s: f64, k: KernelFn },
    /// a(θ)|y|^{−n−2s} with a piecewise constant over sectors of [0, π), mirrored.
    Homogeneous { n: usize, s: f64, a: Vec<f64> },
}

impl fmt::Debug for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Fractional { n, s, c } => {
                write!(f, "Fractional {{ n: {n}, s: {s}, c: {c} }}")
            }
            KernelSpec::PowerBounded { n, s, .. } => write!(f, "PowerBounded {{ n: {n}, s: {s} }}"),
            KernelSpec::Homogeneous { n, s, a } => {
                write!(f, "Homogeneous {{ n: {n}, s: {s}, a: {a:?} }}")
            }
        }
    }
}

fn check_order(n: usize, s: f64) -> Result<()> {
    if n != 1 && n != 2 {
        return invalid(format!("dimension must be 1 or 2, got {n}"));
    }
    if !(s > 0.0 && s < 1.0) {
        return invalid(format!("order s must lie in (0, 1), got {s}"));
    }
    Ok(())
}

/// Surface measure of the unit sphere S^{n−1}.
pub fn sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * PI,
        _ => 2.0 * PI.powf(n as f64 / 2.0) / gamma(n as f64 / 2.0),
    }
}

/// Normalization making ∫δu(x,y)c|y|^{−n−2s}dy = −(−Δ)^s u(x).
///
/// This is half of 4^s Γ(n/2+s)/(π^{n/2}|Γ(−s)|): the second-difference form
/// counts each pair ±y twice.
pub fn frac_constant(n: usize, s: f64) -> f64 {
    let abs_gamma_neg_s = gamma(1.0 - s) / s;
    0.5 * 4f64.powf(s) * gamma(n as f64 / 2.0 + s) / (PI.powf(n as f64 / 2.0) * abs_gamma_neg_s)
}

/// (−Δ)^s (1−|x|²)₊^s = κ inside the unit ball.
pub fn getoor_constant(n: usize, s: f64) -> f64 {
    4f64.powf(s) * gamma(1.0 + s) * gamma(n as f64 / 2.0 + s) / gamma(n as f64 / 2.0)
}

/// The fractional-Laplacian kernel in dimension n.
pub fn frac_kernel(n: usize, s: f64) -> Result<KernelSpec> {
    check_order(n, s)?;
    Ok(KernelSpec::Fractional { n, s, c: frac_constant(n, s) })
}

/// Sector of offset `y` among `m` equal sectors of [0, π). Always 0 in 1D.
pub fn sector_of(y: Point, m: usize) -> usize {
    if y[1] == 0.0 && m == 1 {
        return 0;
    }
    let mut th = y[1].atan2(y[0]);
    if th < 0.0 {
        th += PI;
    }
    if th >= PI {
        th -= PI;
    }
    ((th / (PI / m as f64)) as usize).min(m - 1)
}

impl KernelSpec {
    pub fn homogeneous(n: usize, s: f64, a: Vec<f64>) -> Result<Self> {
        check_order(n, s)?;
        if a.is_empty() || a.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return invalid("homogeneous kernel needs positive finite sector values");
        }
        if n == 1 && a.len() != 1 {
            return invalid("a 1D homogeneous kernel has exactly one sector value");
        }
        Ok(KernelSpec::Homogeneous { n, s, a })
    }

    pub fn power_bounded(n: usize, s: f64, k: KernelFn) -> Result<Self> {
        check_order(n, s)?;
        Ok(KernelSpec::PowerBounded { n, s, k })
    }

    pub fn dim(&self) -> usize {
        match self {
            KernelSpec::Fractional { n, .. }
            | KernelSpec::PowerBounded { n, .. }
            | KernelSpec::Homogeneous { n, .. } => *n,
        }
    }

    pub fn order(&self) -> f64 {
        match self {
            KernelSpec::Fractional { s, .. }
            | KernelSpec::PowerBounded { s, .. }
            | KernelSpec::Homogeneous { s, .. } => *s,
        }
    }

    /// K(y)|y|^{n+2s}, the angular profile.
    pub fn multiplier(&self, y: Point) -> f64 {
        match self {
            KernelSpec::Fractional { c, .. } => *c,
            KernelSpec::Homogeneous { a, .. } => a[sector_of(y, a.len())],
            KernelSpec::PowerBounded { n, s, k } => {
                let r = y[0].hypot(y[1]);
                k(y) * r.powf(*n as f64 + 2.0 * s)
            }
        }
    }

    /// K(y) for y ≠ 0.
    pub fn eval(&self, y: Point) -> f64 {
        match self {
            KernelSpec::PowerBounded { k, .. } => k(y),
            _ => {
                let r = y[0].hypot(y[1]);
                self.multiplier(y) * r.powf(-(self.dim() as f64) - 2.0 * self.order())
            }
        }
    }

    /// ∫_{S^{n−1}} K(θ)|θ|^{n+2s} dθ for the closed-form variants.
    pub fn angular_mass(&self) -> Result<f64> {
        match self {
            KernelSpec::Fractional { n, c, .. } => Ok(c * sphere_area(*n)),
            KernelSpec::Homogeneous { n, a, .. } => {
                if *n == 1 {
                    Ok(2.0 * a[0])
                } else {
                    let w = PI / a.len() as f64;
                    Ok(2.0 * w * a.iter().sum::<f64>())
                }
            }
            KernelSpec::PowerBounded { .. } => {
                invalid("tail mass has no closed form for a general power-bounded kernel")
            }
        }
    }

    /// ∫_{|y|>R} K(y) dy.
    pub fn tail_mass(&self, r: f64) -> Result<f64> {
        let s = self.order();
        if !(s > 0.0) {
            return invalid("non-integrable tail: s must be positive");
        }
        if !(r > 0.0) {
            return invalid(format!("tail radius must be positive, got {r}"));
        }
        Ok(self.angular_mass()? * r.powf(-2.0 * s) / (2.0 * s))
    }

    /// Lattice approximation of ∫ min{1,|y|²}K(y)dy: the sum over 0 < |y| ≤ 1 plus the
    /// closed-form tail beyond 1.
    pub fn levy_mass(&self, h: f64) -> Result<f64> {
        let m = (1.0 / h).floor() as i64;
        let n = self.dim();
        let hn = h.powi(n as i32);
        let mut sum = 0.0;
        let jr = if n == 2 { m } else { 0 };
        for j in -jr..=jr {
            for i in -m..=m {
                if i == 0 && j == 0 {
                    continue;
                }
                let y = [i as f64 * h, j as f64 * h];
                let r2 = y[0] * y[0] + y[1] * y[1];
                if r2 <= 1.0 {
                    sum += r2 * self.eval(y) * hn;
                }
            }
        }
        Ok(sum + self.tail_mass(1.0)?)
    }
}

/// Outcome of the L₀ comparability check.
#[derive(Debug, Clone, Serialize)]
pub struct L0Report {
    pub samples: usize,
    /// (sample, K(y), lower bound, upper bound) for every violating sample.
    pub violations: Vec<(Point, f64, f64, f64)>,
    pub pass: bool,
}

/// Checks (1−s)λ|y|^{−n−2s} ≤ K(y) ≤ (1−s)Λ|y|^{−n−2s} at each sample.
pub fn l0_check(k: &KernelSpec, p: &EllipticityParams, samples: &[Point]) -> L0Report {
    let n = k.dim() as f64;
    let mut violations = Vec::new();
    for &y in samples {
        let r = y[0].hypot(y[1]);
        if r == 0.0 {
            continue;
        }
        let pw = r.powf(-n - 2.0 * p.s);
        let (lo, hi) = (p.lower() * pw, p.upper() * pw);
        let v = k.eval(y);
        let slack = 1e-12 * hi;
        if v < lo - slack || v > hi + slack {
            violations.push((y, v, lo, hi));
        }
    }
    L0Report { samples: samples.len(), pass: violations.is_empty(), violations }
}

//! The penalty β_δ and the penalized residual.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// β_δ: zero on (−∞, 0], cubic bridge on (0, δ), t/δ beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PenaltyFn {
    delta: f64,
}

impl PenaltyFn {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return invalid(format!("penalty scale must be positive, got {delta}"));
        }
        Ok(PenaltyFn { delta })
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        let d = self.delta;
        if t <= 0.0 {
            0.0
        } else if t < d {
            let r = t / d;
            r * r * (2.0 - r)
        } else {
            t / d
        }
    }

    #[inline]
    pub fn deriv(&self, t: f64) -> f64 {
        let d = self.delta;
        if t <= 0.0 {
            0.0
        } else if t < d {
            t * (4.0 * d - 3.0 * t) / (d * d * d)
        } else {
            1.0 / d
        }
    }

    /// sup β', attained at t = 2δ/3.
    pub fn max_slope(&self) -> f64 {
        4.0 / (3.0 * self.delta)
    }

    /// −β(ψ⁻ − u) + β(u − ψ⁺): the penalty part of the residual.
    #[inline]
    pub fn penalty_term(&self, u: f64, lower: f64, upper: f64) -> f64 {
        -self.eval(lower - u) + self.eval(u - upper)
    }

    /// d/du of [`PenaltyFn::penalty_term`].
    #[inline]
    pub fn penalty_slope(&self, u: f64, lower: f64, upper: f64) -> f64 {
        self.deriv(lower - u) + self.deriv(u - upper)
    }
}

/// F(u) = −Iu − f − β(ψ⁻ − u) + β(u − ψ⁺), nodewise over aligned slices.
pub fn penal_residual(u: &[f64], iu: &[f64], f: &[f64], lower: &[f64], upper: &[f64], p: &PenaltyFn) -> Vec<f64> {
    (0..u.len()).map(|i| -iu[i] - f[i] + p.penalty_term(u[i], lower[i], upper[i])).collect()
}

use serde::{Deserialize, Serialize};

use super::DeformError;

/// `ν` with `ν = 1` on `[0, a]`, `ν = 0` on `[b, ∞)` and a smooth monotone
/// transition in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpProfile {
    pub a: f64,
    pub b: f64,
}

fn g(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

impl BumpProfile {
    pub fn new(a: f64, b: f64) -> Result<Self, DeformError> {
        if !(0.0 < a && a < b && b < 1.0) {
            return Err(DeformError::BadProfile { a, b });
        }
        Ok(Self { a, b })
    }

    /// `a = b / 2`.
    pub fn from_b(b: f64) -> Result<Self, DeformError> {
        Self::new(0.5 * b, b)
    }

    /// `g(b - s) / (g(b - s) + g(s - a))`, `g(t) = exp(-1/t)` for `t > 0`.
    pub fn eval(&self, s: f64) -> f64 {
        if s <= self.a {
            return 1.0;
        }
        if s >= self.b {
            return 0.0;
        }
        let (p, q) = (g(self.b - s), g(s - self.a));
        p / (p + q)
    }
}

pub fn bump_eval(p: &BumpProfile, s: f64) -> f64 {
    p.eval(s)
}

//! The collar reparametrization `ψ` with `f̂ ∘ ψ = μ ∘ f̂`, moving points
//! along the normalized gradient field of `f̂`.

use serde::{Deserialize, Serialize};

use crate::field::IntegralSpec;
use crate::geom::Point;
use crate::ode::{solve, OdeOptions};

use super::{BumpProfile, DeformError};

/// `μ(s) = s + (1 - 2ε)(1 - ν(s))` with `ν` switching off on `[ε, 2ε]`:
/// the identity on `[0, ε]`, `μ(2ε) = 1`, `μ' ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollarMap {
    pub eps: f64,
    profile: BumpProfile,
}

const LEVEL_TOL: f64 = 1e-13;
const OVERSHOOT: f64 = 1e-3;

impl CollarMap {
    pub fn new(eps: f64) -> Result<Self, DeformError> {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(DeformError::BadCollar(eps));
        }
        Ok(Self { eps, profile: BumpProfile::new(eps, 2.0 * eps)? })
    }

    pub fn mu(&self, s: f64) -> f64 {
        if s <= self.eps {
            return s;
        }
        s + (1.0 - 2.0 * self.eps) * (1.0 - self.profile.eval(s))
    }

    /// Monotone inverse by bisection on `[ε, 2ε]`.
    pub fn mu_inv(&self, v: f64) -> f64 {
        if v <= self.eps {
            return v;
        }
        if v >= 1.0 {
            return v - (1.0 - 2.0 * self.eps);
        }
        let (mut lo, mut hi) = (self.eps, 2.0 * self.eps);
        while hi - lo > 1e-15 * hi {
            let mid = 0.5 * (lo + hi);
            if self.mu(mid) < v {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Moves `z` along `∇f̂ / |∇f̂|²` until `f̂ = target`.
fn transport(is: &IntegralSpec, z: Point, target: f64) -> Result<Point, DeformError> {
    let s0 = is.level(z);
    if s0 == target {
        return Ok(z);
    }
    let rhs = |p: Point| {
        let g = is.gradient(p);
        (1.0 / g.norm2()) * g
    };
    if !(is.gradient(z).norm2() > 0.0) {
        return Err(DeformError::GradientVanishes { x: z.x, y: z.y });
    }
    let mut w = solve(rhs, z, target - s0, &OdeOptions::new(1e-13))?;
    for _ in 0..6 {
        let gap = target - is.level(w);
        if gap.abs() <= LEVEL_TOL * target.max(1.0) {
            break;
        }
        let g = is.gradient(w);
        if !(g.norm2() > 0.0) {
            return Err(DeformError::GradientVanishes { x: w.x, y: w.y });
        }
        w = w + (gap / g.norm2()) * g;
    }
    Ok(w)
}

/// `ψ(z)`: transport from level `f̂(z)` to `μ(f̂(z))`.
pub fn collar_psi(is: &IntegralSpec, collar: &CollarMap, z: Point) -> Result<Point, DeformError> {
    let s = is.level(z);
    if s <= collar.eps || z.is_origin() {
        return Ok(z);
    }
    transport(is, z, collar.mu(s))
}

/// `ψ⁻¹(w)` for `w` in `V`, extended slightly past `∂V` by `μ(s) = s + 1 - 2ε`.
pub fn collar_psi_inv(is: &IntegralSpec, collar: &CollarMap, w: Point) -> Result<Point, DeformError> {
    let v = is.level(w);
    if v <= collar.eps || w.is_origin() {
        return Ok(w);
    }
    if !(v <= 1.0 + OVERSHOOT) {
        return Err(DeformError::PsiInverseFailure { x: w.x, y: w.y });
    }
    let z = transport(is, w, collar.mu_inv(v))?;
    let back = collar.mu(is.level(z));
    if (back - v).abs() > 1e-8 {
        return Err(DeformError::PsiInverseFailure { x: w.x, y: w.y });
    }
    Ok(z)
}

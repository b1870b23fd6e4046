//! Shift functions of composites, inverses and quotients of shifts.

use rayon::prelude::*;

use crate::field::FieldSpec;
use crate::flow::{flow_with, FlowConfig};
use crate::geom::Point;

use super::map::ShiftFn;
use super::sample::{NodeGrid, ShiftFunctionSample};
use super::ShiftError;

fn sample_with(
    grid: &NodeGrid,
    f: impl Fn(Point) -> Result<f64, ShiftError> + Sync,
) -> Result<ShiftFunctionSample, ShiftError> {
    let values = grid
        .nodes
        .par_iter()
        .map(|row| row.iter().map(|z| f(*z)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ShiftFunctionSample { grid: grid.clone(), values, anchor_node: (0, 0), branch: 0, residual: 0.0 })
}

/// `α_{g∘h}(z) = α_g(h(z)) + α_h(z)`, where `g∘h` applies `h` first.
pub fn compose_at(fs: &FieldSpec, g: &ShiftFn, h: &ShiftFn, z: Point, cfg: &FlowConfig) -> Result<f64, ShiftError> {
    let ah = h.eval(z);
    let hz = flow_with(fs, z, ah, cfg)?;
    Ok(g.eval(hz) + ah)
}

/// The point `w` with `Φ(w, α_k(w)) = z`, together with `α_k(w)`.
pub fn inverse_point(fs: &FieldSpec, k: &ShiftFn, z: Point, cfg: &FlowConfig) -> Result<(Point, f64), ShiftError> {
    // w = Φ(z, -s) with s = α_k(w): solve G(s) = s - α_k(Φ(z, -s)) = 0
    let fail = || ShiftError::InverseNotResolvable { x: z.x, y: z.y };
    let g = |s: f64| -> Result<(f64, Point), ShiftError> {
        let w = flow_with(fs, z, -s, cfg)?;
        Ok((s - k.eval(w), w))
    };
    let mut s0 = k.eval(z);
    let (mut g0, mut w) = g(s0)?;
    if g0 == 0.0 {
        return Ok((w, s0));
    }
    let mut s1 = s0 - g0;
    for _ in 0..60 {
        let (g1, w1) = g(s1)?;
        w = w1;
        let scale = 1.0 + s1.abs();
        if g1.abs() <= 1e-13 * scale {
            return Ok((w, s1));
        }
        if g1 == g0 {
            break;
        }
        let next = s1 - g1 * (s1 - s0) / (g1 - g0);
        if !next.is_finite() {
            return Err(fail());
        }
        s0 = s1;
        g0 = g1;
        s1 = next;
    }
    let (g1, _) = g(s1)?;
    if g1.abs() <= 1e-10 * (1.0 + s1.abs()) {
        return Ok((w, s1));
    }
    Err(fail())
}

/// Samples `α_{g∘h}`.
pub fn compose_shift(
    fs: &FieldSpec,
    grid: &NodeGrid,
    g: &ShiftFn,
    h: &ShiftFn,
    cfg: &FlowConfig,
) -> Result<ShiftFunctionSample, ShiftError> {
    sample_with(grid, |z| compose_at(fs, g, h, z, cfg))
}

/// Samples `α_{k⁻¹} = -α_k ∘ k⁻¹`.
pub fn inverse_shift(fs: &FieldSpec, grid: &NodeGrid, k: &ShiftFn, cfg: &FlowConfig) -> Result<ShiftFunctionSample, ShiftError> {
    sample_with(grid, |z| inverse_point(fs, k, z, cfg).map(|(_, s)| -s))
}

/// Samples `α_{g∘k⁻¹} = (α_g - α_k) ∘ k⁻¹`.
pub fn quotient_shift(
    fs: &FieldSpec,
    grid: &NodeGrid,
    g: &ShiftFn,
    k: &ShiftFn,
    cfg: &FlowConfig,
) -> Result<ShiftFunctionSample, ShiftError> {
    sample_with(grid, |z| inverse_point(fs, k, z, cfg).map(|(w, s)| g.eval(w) - s))
}

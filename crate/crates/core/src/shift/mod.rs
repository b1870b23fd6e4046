//! Shifts along orbits: the map `Sh(α)(z) = Φ(z, α(z))`, recovery of
//! shift functions for orbit-preserving maps, their composition algebra
//! and the local-diffeomorphism criterion `F(α) ≠ -1`.

mod compose;
mod map;
mod orbit;
mod sample;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::ExprError;
use crate::field::{FieldError, FieldSpec};
use crate::flow::{flow_with, FlowConfig, FlowError};
use crate::geom::Point;

pub use compose::{compose_at, compose_shift, inverse_point, inverse_shift, quotient_shift};
pub use map::{MapSpec, Primitive, ShiftFn};
pub use orbit::OrbitTable;
pub use sample::{branch_difference, default_anchor, recover_shift, Anchor, GridSpec, NodeGrid, SampledShift, ShiftFunctionSample};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ShiftError {
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Field(#[from] FieldError),
    #[error("polynomial map does not fix the origin")]
    OriginNotFixed,
    #[error("invalid map specification: {0}")]
    BadMapSpec(String),
    #[error("primitive {0} has no JSON form")]
    NotSerializable(String),
    #[error("invalid grid: {0}")]
    BadGrid(String),
    #[error("map moves ({x}, {y}) off its orbit (deviation {drift:e})")]
    NotOrbitPreserving { x: f64, y: f64, drift: f64 },
    #[error("anchor is inconsistent with the map (residual {residual:e})")]
    AnchorInconsistent { residual: f64 },
    #[error("branch conflict at level {level}, angle {angle}: nearest lift is {distance} away, period {theta}")]
    BranchConflict { level: f64, angle: f64, distance: f64, theta: f64 },
    #[error("shift functions differ by {ratio} periods somewhere, not a common integer")]
    NotMultiple { ratio: f64 },
    #[error("shift function samples live on different grids")]
    GridMismatch,
    #[error("inverse image of ({x}, {y}) not found on its orbit")]
    InverseNotResolvable { x: f64, y: f64 },
    #[error("custom primitive failed: {0}")]
    Primitive(String),
}

/// `m(z)`.
pub fn apply_map(fs: &FieldSpec, m: &MapSpec, z: Point, tol: f64) -> Result<Point, ShiftError> {
    m.apply(fs, z, &FlowConfig::new(tol)?)
}

/// `Sh(α)(z) = Φ(z, α(z))`.
pub fn shift_of(fs: &FieldSpec, alpha: &ShiftFn, z: Point, tol: f64) -> Result<Point, ShiftError> {
    Ok(flow_with(fs, z, alpha.eval(z), &FlowConfig::new(tol)?)?)
}

/// Lie derivative with an error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LieDerivative {
    pub value: f64,
    pub error: f64,
}

/// `F(α)(z)` by central differences along the flow, Richardson-extrapolated
/// over the steps `s` and `s/2`.
pub fn lie_derivative(fs: &FieldSpec, alpha: &ShiftFn, z: Point, step: f64, cfg: &FlowConfig) -> Result<LieDerivative, ShiftError> {
    if alpha.constant_value().is_some() || z.is_origin() {
        return Ok(LieDerivative { value: 0.0, error: 0.0 });
    }
    let central = |s: f64| -> Result<f64, ShiftError> {
        let fwd = alpha.eval(flow_with(fs, z, s, cfg)?);
        let bwd = alpha.eval(flow_with(fs, z, -s, cfg)?);
        Ok((fwd - bwd) / (2.0 * s))
    };
    let d1 = central(step)?;
    let d2 = central(0.5 * step)?;
    Ok(LieDerivative { value: (4.0 * d2 - d1) / 3.0, error: (d2 - d1).abs() / 3.0 })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub z: Point,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalDiffeoReport {
    pub min_value: f64,
    pub min_at: Point,
    /// Samples with `F(α) ≤ -1 + margin`.
    pub witnesses: Vec<Witness>,
    pub margin: f64,
}

impl LocalDiffeoReport {
    pub fn is_clean(&self) -> bool {
        self.witnesses.is_empty()
    }
}

/// Scans `F(α)` over the samples and flags those at or below `-1 + margin`.
pub fn local_diffeo_report(
    fs: &FieldSpec,
    alpha: &ShiftFn,
    samples: &[Point],
    margin: f64,
    cfg: &FlowConfig,
) -> Result<LocalDiffeoReport, ShiftError> {
    let values = samples
        .par_iter()
        .map(|z| lie_derivative(fs, alpha, *z, 1e-2, cfg).map(|d| Witness { z: *z, value: d.value }))
        .collect::<Result<Vec<_>, _>>()?;
    let min = values
        .iter()
        .copied()
        .fold(Witness { z: Point::default(), value: f64::INFINITY }, |a, b| if b.value < a.value { b } else { a });
    let witnesses = values.into_iter().filter(|w| w.value <= -1.0 + margin).collect();
    Ok(LocalDiffeoReport { min_value: min.value, min_at: min.z, witnesses, margin })
}

#[cfg(test)]
mod tests;

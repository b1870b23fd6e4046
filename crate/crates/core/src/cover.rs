//! The polar strip covering `P(φ, ρ) = (ρ cos φ, ρ sin φ)` of the
//! punctured plane, angle unwrapping and winding numbers.

use std::f64::consts::{PI, TAU};
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::FieldSpec;
use crate::flow::{flow_steps, FlowConfig, FlowError};
use crate::geom::{wrap_angle, Point};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CoverError {
    #[error("strip radius must be positive, got {0}")]
    NonPositiveRho(f64),
    #[error("path sample {index} is the origin")]
    HitsOrigin { index: usize },
    #[error("angular jump of {jump} rad between samples {index} and {next}", next = index + 1)]
    SamplesTooCoarse { index: usize, jump: f64 },
    #[error("initial angle {phi0} does not project to the first sample")]
    BadInitialAngle { phi0: f64 },
    #[error("parameter and point sequences differ in length")]
    LengthMismatch,
    #[error("loop endpoints are {gap} apart")]
    NotClosed { gap: f64 },
    #[error("winding {value} is within {margin} of a half-integer")]
    AmbiguousWinding { value: f64, margin: f64 },
    #[error(transparent)]
    Flow(#[from] FlowError),
}

/// A point `(φ, ρ)` of the strip; `φ` is an unbounded angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StripPoint {
    pub phi: f64,
    pub rho: f64,
}

impl StripPoint {
    pub fn new(phi: f64, rho: f64) -> Result<Self, CoverError> {
        if !(rho > 0.0) {
            return Err(CoverError::NonPositiveRho(rho));
        }
        Ok(Self { phi, rho })
    }

    /// Deck transformation `η^n(φ, ρ) = (φ + 2πn, ρ)`.
    pub fn deck(self, n: i64) -> Self {
        Self { phi: self.phi + TAU * n as f64, rho: self.rho }
    }

    /// The lift of `z ≠ O` whose angle is closest to `phi_hint`.
    pub fn lift_near(z: Point, phi_hint: f64) -> Result<Self, CoverError> {
        if z.is_origin() {
            return Err(CoverError::HitsOrigin { index: 0 });
        }
        Ok(Self { phi: phi_hint + wrap_angle(z.angle() - phi_hint), rho: z.norm() })
    }
}

pub fn project(sp: StripPoint) -> Point {
    Point::polar(sp.rho, sp.phi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftedPath {
    pub params: Vec<f64>,
    pub points: Vec<StripPoint>,
}

impl LiftedPath {
    pub fn total_angle(&self) -> f64 {
        match (self.points.first(), self.points.last()) {
            (Some(a), Some(b)) => b.phi - a.phi,
            _ => 0.0,
        }
    }
}

/// Continuous angle unwrapping of a sampled path avoiding `O`.
pub fn lift_path(params: &[f64], path: &[Point], phi0: f64) -> Result<LiftedPath, CoverError> {
    if params.len() != path.len() {
        return Err(CoverError::LengthMismatch);
    }
    let mut points = Vec::with_capacity(path.len());
    let mut prev: Option<(f64, f64)> = None;
    for (i, p) in path.iter().enumerate() {
        if p.is_origin() {
            return Err(CoverError::HitsOrigin { index: i });
        }
        let a = p.angle();
        let phi = match prev {
            None => {
                if wrap_angle(phi0 - a).abs() > 1e-9 * phi0.abs().max(1.0) {
                    return Err(CoverError::BadInitialAngle { phi0 });
                }
                phi0
            }
            Some((phi_prev, a_prev)) => {
                let jump = wrap_angle(a - a_prev);
                if jump.abs() >= PI * (1.0 - 1e-12) {
                    return Err(CoverError::SamplesTooCoarse { index: i - 1, jump });
                }
                // nearest representative of the sample's own angle, so that
                // the lift projects back without accumulated rounding
                let k = ((phi_prev + jump - a) / TAU).round();
                a + TAU * k
            }
        };
        points.push(StripPoint { phi, rho: p.norm() });
        prev = Some((phi, a));
    }
    Ok(LiftedPath { params: params.to_vec(), points })
}

/// Lift of the flow: integrates `Φ` downstairs and unwraps the angle.
pub fn lifted_flow(fs: &FieldSpec, sp: StripPoint, t: f64, tol: f64) -> Result<StripPoint, CoverError> {
    lifted_flow_with(fs, sp, t, &FlowConfig::new(tol)?)
}

pub fn lifted_flow_with(fs: &FieldSpec, sp: StripPoint, t: f64, cfg: &FlowConfig) -> Result<StripPoint, CoverError> {
    if t == 0.0 {
        return Ok(sp);
    }
    const SUB: usize = 8;
    let mut phi = sp.phi;
    let mut a_prev = wrap_angle(sp.phi);
    let mut err = None;
    let end = flow_steps(fs, project(sp), t, cfg, |s| {
        for k in 1..=SUB {
            let p = if k == SUB { s.y1 } else { s.eval(s.t0 + (s.t1 - s.t0) * k as f64 / SUB as f64) };
            let a = p.angle();
            let jump = wrap_angle(a - a_prev);
            if jump.abs() >= PI * (1.0 - 1e-12) || p.is_origin() {
                err = Some(CoverError::SamplesTooCoarse { index: 0, jump });
                return ControlFlow::Break(());
            }
            phi += jump;
            a_prev = a;
        }
        ControlFlow::Continue(())
    })?;
    if let Some(e) = err {
        return Err(e);
    }
    StripPoint::new(phi, end.norm())
}

/// Number of turns of a closed sampled loop around `O`.
pub fn winding_of_loop(lp: &[Point], close_tol: f64) -> Result<i64, CoverError> {
    let (Some(first), Some(last)) = (lp.first(), lp.last()) else {
        return Ok(0);
    };
    let gap = first.dist(*last);
    if gap > close_tol {
        return Err(CoverError::NotClosed { gap });
    }
    let params: Vec<f64> = (0..lp.len()).map(|i| i as f64).collect();
    let lifted = lift_path(&params, lp, first.angle())?;
    let value = lifted.total_angle() / TAU;
    let margin = 0.5 - (value - value.round()).abs();
    if margin < 0.25 {
        return Err(CoverError::AmbiguousWinding { value, margin });
    }
    Ok(value.round() as i64)
}

//! First jets at the origin: Jacobi matrices of orbit-preserving maps,
//! their classification, the observed jet image, the boundary rotation
//! number of a loop of maps and the normalization into the kernel.

mod classify;
mod matrix;

use std::collections::BTreeSet;

use num_traits::ToPrimitive;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{CenterCase, FieldSpec, IntegralSpec};
use crate::flow::{FlowConfig, FlowError};
use crate::geom::Point;
use crate::shift::{MapSpec, OrbitTable, Primitive, ShiftError};

pub use classify::{classify_jet, JetClass, JetTag, DEFAULT_CLASS_TOL};
pub use matrix::{jet_of_flow_map, Jet2};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error(transparent)]
    Shift(#[from] ShiftError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("finite-difference Jacobian unstable: Richardson steps disagree by {0:e}")]
    NumericalBreakdown(f64),
    #[error("branch conflict tracking the boundary shift at parameter {k}")]
    BranchConflict { k: f64 },
    #[error("rotation {value} is within {margin} of a half-integer")]
    MarginViolated { value: f64, margin: f64 },
    #[error("family endpoint does not fix the boundary (displacement {0:e})")]
    BoundaryNotFixed(f64),
    #[error("family does not start at the identity (displacement {0:e})")]
    NotStartingAtIdentity(f64),
    #[error("linear part is not of the form ((0, a), (0, 0)) with a ≠ 0")]
    NotNF2,
}

/// A Jacobi matrix at `O` with an error estimate; `exact` when every
/// factor was differentiated symbolically.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JetEstimate {
    pub jet: Jet2,
    pub error: f64,
    pub exact: bool,
}

const FD_STEPS: [f64; 2] = [1e-4, 5e-5];
const FD_TOL: f64 = 1e-12;

fn primitive_jet(fs: &FieldSpec, p: &Primitive, cfg: &FlowConfig) -> Result<JetEstimate, JetError> {
    match p {
        Primitive::Linear { mf, .. } => Ok(JetEstimate { jet: Jet2(*mf), error: 0.0, exact: true }),
        Primitive::Poly { h1, h2, .. } => {
            let c = |h: &crate::expr::Poly2, i, j| h.coeff(i, j).to_f64().unwrap_or(f64::NAN);
            Ok(JetEstimate {
                jet: Jet2::new(c(h1, 1, 0), c(h1, 0, 1), c(h2, 1, 0), c(h2, 0, 1)),
                error: 0.0,
                exact: true,
            })
        }
        _ => {
            let central = |h: f64| -> Result<Jet2, JetError> {
                let ap = |z: Point| p.apply(fs, z, cfg);
                let cx = ap(Point::new(h, 0.0))? - ap(Point::new(-h, 0.0))?;
                let cy = ap(Point::new(0.0, h))? - ap(Point::new(0.0, -h))?;
                Ok(Jet2::new(cx.x, cy.x, cx.y, cy.y).scale(0.5 / h))
            };
            let d1 = central(FD_STEPS[0])?;
            let d2 = central(FD_STEPS[1])?;
            let gap = d2.dist(&d1);
            if gap > 1e-4 || !gap.is_finite() {
                return Err(JetError::NumericalBreakdown(gap));
            }
            let jet = (d2.scale(4.0) - d1).scale(1.0 / 3.0);
            Ok(JetEstimate { jet, error: gap / 3.0, exact: false })
        }
    }
}

/// `J(m, O)` by the chain rule over the primitives: exact for linear and
/// polynomial factors, Richardson-extrapolated central differences
/// otherwise.
pub fn jet_at_origin(m: &MapSpec, fs: &FieldSpec) -> Result<JetEstimate, JetError> {
    let cfg = FlowConfig::new(FD_TOL)?;
    let mut acc = JetEstimate { jet: Jet2::IDENTITY, error: 0.0, exact: true };
    for p in &m.primitives {
        let e = primitive_jet(fs, p, &cfg)?;
        // first-order error propagation through the product
        let error = e.error * acc.jet.max_abs() * 2.0 + acc.error * e.jet.max_abs() * 2.0;
        acc = JetEstimate { jet: e.jet * acc.jet, error, exact: acc.exact && e.exact };
    }
    Ok(acc)
}

/// JSON jet report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetReport {
    pub map: String,
    pub matrix: Jet2,
    pub class: JetTag,
    pub d: Option<f64>,
    pub error: f64,
}

pub fn jet_report(m: &MapSpec, fs: &FieldSpec, tol: f64) -> Result<JetReport, JetError> {
    let e = jet_at_origin(m, fs)?;
    let c = classify_jet(&e.jet, tol);
    Ok(JetReport { map: m.name.clone(), matrix: e.jet, class: c.tag, d: c.d, error: e.error })
}

/// Observed classes of `j` over a corpus of maps: an empirical lower
/// bound for the jet image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JetImage {
    pub classes: BTreeSet<JetTag>,
    pub reports: Vec<JetReport>,
}

pub fn collect_jet_image(fs: &FieldSpec, maps: &[MapSpec], tol: f64) -> Result<JetImage, JetError> {
    let reports = maps.par_iter().map(|m| jet_report(m, fs, tol)).collect::<Result<Vec<_>, _>>()?;
    let classes = reports.iter().map(|r| r.class).collect();
    Ok(JetImage { classes, reports })
}

/// A loop of maps parametrized by `k ∈ [0, 1]`.
pub trait MapFamily: Sync {
    fn at(&self, k: f64) -> MapSpec;
}

impl<F: Fn(f64) -> MapSpec + Sync> MapFamily for F {
    fn at(&self, k: f64) -> MapSpec {
        self(k)
    }
}

/// Runs `first` and then `second`; the second half is composed after the
/// endpoint of the first so the result is continuous in `k`.
pub struct Concat<'a>(pub &'a dyn MapFamily, pub &'a dyn MapFamily);

impl MapFamily for Concat<'_> {
    fn at(&self, k: f64) -> MapSpec {
        if k <= 0.5 {
            self.0.at(2.0 * k)
        } else {
            self.0.at(1.0).then(&self.1.at(2.0 * k - 1.0))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RotationReport {
    pub rho: i64,
    /// `(Λ(1, z_b) - Λ(0, z_b)) / θ(∂V)` before rounding.
    pub raw: f64,
    pub margin: f64,
    pub boundary_point: Point,
    pub boundary_period: f64,
    /// `Λ(k, z_b)` at the parameter samples.
    pub track: Vec<f64>,
}

/// Boundary rotation number of a loop from the identity to a map fixing
/// `∂V`, tracking `Λ(k, z_b)` continuously over `samples + 1` parameters.
pub fn rotation_number(
    fs: &FieldSpec,
    is: &IntegralSpec,
    family: &dyn MapFamily,
    samples: usize,
    tol: f64,
) -> Result<RotationReport, JetError> {
    let cfg = FlowConfig::new(tol)?;
    let zb = is.ray_point(1.0, 0.0).map_err(ShiftError::from)?;
    let table = OrbitTable::build(fs, zb, &cfg)?;
    let theta = table.theta;
    let (s0, _) = table.time_of(fs, zb);
    let start = family.at(0.0).apply(fs, zb, &cfg)?;
    if start.dist(zb) > 1e3 * tol {
        return Err(JetError::NotStartingAtIdentity(start.dist(zb)));
    }
    let end_map = family.at(1.0);
    let disp = (0..8)
        .map(|i| -> Result<f64, JetError> {
            let z = is.ray_point(1.0, std::f64::consts::TAU * i as f64 / 8.0).map_err(ShiftError::from)?;
            Ok(end_map.apply(fs, z, &cfg)?.dist(z))
        })
        .try_fold(0.0f64, |a, d| d.map(|d| a.max(d)))?;
    if disp > 1e-6 {
        return Err(JetError::BoundaryNotFixed(disp));
    }
    let images = (0..=samples)
        .into_par_iter()
        .map(|i| {
            let k = i as f64 / samples as f64;
            Ok((k, family.at(k).apply(fs, zb, &cfg)?))
        })
        .collect::<Result<Vec<_>, JetError>>()?;
    let mut track = Vec::with_capacity(samples + 1);
    let mut prev = 0.0;
    for (k, w) in images {
        let (sw, _) = table.time_of(fs, w);
        let base = (sw - s0 + 0.5 * theta).rem_euclid(theta) - 0.5 * theta;
        let n = ((prev - base) / theta).round();
        let v = base + n * theta;
        if (v - prev).abs() > 0.25 * theta {
            return Err(JetError::BranchConflict { k });
        }
        track.push(v);
        prev = v;
    }
    let raw = (track[samples] - track[0]) / theta;
    let margin = 0.5 - (raw - raw.round()).abs();
    if margin < 0.25 {
        return Err(JetError::MarginViolated { value: raw, margin });
    }
    Ok(RotationReport { rho: raw.round() as i64, raw, margin, boundary_point: zb, boundary_period: theta, track })
}

/// `B(t)` for one family member `ω`: `z ↦ Φ(ω(z), -t τ)` with
/// `τ = J₁₂ / a`, so that `B(1)` has identity jet. Members already in the
/// kernel are returned unchanged.
pub fn normalize_to_kernel(fs: &FieldSpec, omega: &MapSpec, t: f64) -> Result<MapSpec, JetError> {
    let n = fs.nabla();
    let a = n.get(0, 1);
    if fs.case() != CenterCase::Nf2NilpotentNonzero || n.get(0, 0) != 0.0 || n.get(1, 0) != 0.0 || n.get(1, 1) != 0.0 || a == 0.0 {
        return Err(JetError::NotNF2);
    }
    let j = jet_at_origin(omega, fs)?.jet;
    if classify_jet(&j, 1e-8).tag == JetTag::Kernel || t == 0.0 {
        return Ok(omega.clone());
    }
    let tau = j.get(0, 1) / a;
    Ok(omega.then(&MapSpec::flow_map(-t * tau)))
}

#[cfg(test)]
mod tests;

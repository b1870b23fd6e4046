//! Deformations of orbit-preserving maps: bump truncation of shift
//! functions, the homotopy `A(t, k, z)`, boundary fixing, and conjugation by
//! the collar `ψ` into a genuine diffeomorphism.

mod bump;
mod collar;

use std::f64::consts::TAU;
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{FieldSpec, IntegralSpec};
use crate::flow::{flow_with, FlowConfig, FlowError};
use crate::geom::Point;
use crate::jet::Jet2;
use crate::ode::OdeError;
use crate::shift::{lie_derivative, MapSpec, NodeGrid, Primitive, ShiftError, ShiftFn, ShiftFunctionSample};

pub use bump::{bump_eval, BumpProfile};
pub use collar::{collar_psi, collar_psi_inv, CollarMap};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DeformError {
    #[error("bump profile needs 0 < a < b < 1, got a = {a}, b = {b}")]
    BadProfile { a: f64, b: f64 },
    #[error("collar parameter must lie in (0, 1/2), got {0}")]
    BadCollar(f64),
    #[error(transparent)]
    Shift(#[from] ShiftError),
    #[error(transparent)]
    Flow(#[from] FlowError),
    #[error("gradient transport failed: {0}")]
    Transport(#[from] OdeError),
    #[error("gradient of the integral vanishes at ({x}, {y})")]
    GradientVanishes { x: f64, y: f64 },
    #[error("collar inverse not found for ({x}, {y})")]
    PsiInverseFailure { x: f64, y: f64 },
    #[error("map is not injective on U_b for any b down to {b_min}")]
    NotInjectiveOnUb { b_min: f64 },
    #[error("F(β) = {value} ≤ -1 at ({x}, {y})")]
    CriterionViolated { value: f64, x: f64, y: f64 },
}

/// `α = (ν ∘ f̂) · Λ`.
pub fn truncate_shift(is: &IntegralSpec, lambda: &ShiftFn, p: &BumpProfile) -> ShiftFn {
    beta(is, lambda, p, 0.0)
}

/// Node values of `(ν ∘ f̂) · Λ`.
pub fn truncate_sample(is: &IntegralSpec, sample: &ShiftFunctionSample, p: &BumpProfile) -> ShiftFunctionSample {
    sample.map_values(|_, _, z, v| p.eval(is.level(z)) * v)
}

/// `β_t = ((1 - t) ν ∘ f̂ + t) · Λ`.
pub fn beta(is: &IntegralSpec, lambda: &ShiftFn, p: &BumpProfile, t: f64) -> ShiftFn {
    if let Some(c) = lambda.constant_value() {
        if c == 0.0 {
            return ShiftFn::constant(0.0);
        }
    }
    let (is, lambda, p) = (is.clone(), lambda.clone(), *p);
    ShiftFn::func(move |z| {
        let w = (1.0 - t) * p.eval(is.level(z)) + t;
        if w == 0.0 {
            0.0
        } else {
            w * lambda.eval(z)
        }
    })
}

/// `A(t, k, z) = Φ(z, β_{t,k}(z))` for `Λ_k = lambda`: `Ω′` at `t = 0`,
/// `Ω` at `t = 1`.
pub fn homotopy_a(
    fs: &FieldSpec,
    is: &IntegralSpec,
    lambda: &ShiftFn,
    p: &BumpProfile,
    t: f64,
    z: Point,
    cfg: &FlowConfig,
) -> Result<Point, DeformError> {
    if z.is_origin() {
        return Ok(z);
    }
    let w = (1.0 - t) * p.eval(is.level(z)) + t;
    if w == 0.0 {
        return Ok(z);
    }
    Ok(flow_with(fs, z, w * lambda.eval(z), cfg)?)
}

/// Whether images of one orbit's nodes keep their cyclic order: the
/// positive angular gaps between consecutive images add up to one turn.
pub fn orbit_order_preserved(images: &[Point]) -> bool {
    let n = images.len();
    let mut total = 0.0;
    for j in 0..n {
        let d = (images[(j + 1) % n].angle() - images[j].angle()).rem_euclid(TAU);
        if !(d > 1e-12) {
            return false;
        }
        total += d;
    }
    (total - TAU).abs() < 1e-6
}

/// Central-difference Jacobian of `m` at `z`.
pub fn jacobian_fd(fs: &FieldSpec, m: &MapSpec, z: Point, h: f64, cfg: &FlowConfig) -> Result<Jet2, DeformError> {
    let ap = |p: Point| m.apply(fs, p, cfg);
    let cx = ap(z + Point::new(h, 0.0))? - ap(z - Point::new(h, 0.0))?;
    let cy = ap(z + Point::new(0.0, h))? - ap(z - Point::new(0.0, h))?;
    Ok(Jet2::new(cx.x, cy.x, cx.y, cy.y).scale(0.5 / h))
}

/// Grid-level diagnostics of a map claimed to be an orbit-preserving
/// diffeomorphism.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDiagnostics {
    /// Largest `|f̂(m(z)) - f̂(z)|` over the nodes.
    pub max_drift: f64,
    /// Levels whose node images keep their cyclic order.
    pub injective_levels: Vec<bool>,
    pub min_jacobian_det: f64,
}

impl GridDiagnostics {
    pub fn injective(&self) -> bool {
        self.injective_levels.iter().all(|b| *b)
    }
}

pub fn grid_diagnostics(
    fs: &FieldSpec,
    is: &IntegralSpec,
    m: &MapSpec,
    grid: &NodeGrid,
    cfg: &FlowConfig,
) -> Result<GridDiagnostics, DeformError> {
    let rows = grid
        .nodes
        .par_iter()
        .map(|row| {
            let mut drift: f64 = 0.0;
            let mut det = f64::INFINITY;
            let mut images = Vec::with_capacity(row.len());
            for z in row {
                let w = m.apply(fs, *z, cfg)?;
                drift = drift.max((is.level(w) - is.level(*z)).abs());
                det = det.min(jacobian_fd(fs, m, *z, 1e-5, cfg)?.det());
                images.push(w);
            }
            Ok((drift, orbit_order_preserved(&images), det))
        })
        .collect::<Result<Vec<_>, DeformError>>()?;
    Ok(GridDiagnostics {
        max_drift: rows.iter().map(|r| r.0).fold(0.0, f64::max),
        injective_levels: rows.iter().map(|r| r.1).collect(),
        min_jacobian_det: rows.iter().map(|r| r.2).fold(f64::INFINITY, f64::min),
    })
}

/// `Ω′` with its profile and diagnostics.
#[derive(Debug, Clone)]
pub struct BoundaryFix {
    pub map: MapSpec,
    pub profile: BumpProfile,
    /// Truncated shift function `(ν ∘ f̂) · Λ`.
    pub shift: ShiftFn,
    /// Smallest `F(β)` over the nodes.
    pub min_lie: f64,
    /// Largest `|Ω′(z) - m(z)|` over nodes in `U_a`.
    pub inner_residual: f64,
    /// Largest `|Ω′(z) - z|` over nodes outside `U_b`.
    pub boundary_residual: f64,
}

const B_START: f64 = 0.75;

/// `Ω′ = Sh((ν ∘ f̂) · Λ)` for a map `m` with shift function `Λ`.
///
/// Without an explicit profile, `b` starts at `3/4` and is halved until the
/// node images of `m` keep their order on every level inside `U_b`;
/// `a = b / 2`.
pub fn fix_boundary(
    fs: &FieldSpec,
    is: &IntegralSpec,
    m: &MapSpec,
    lambda: &ShiftFn,
    grid: &NodeGrid,
    profile: Option<BumpProfile>,
    cfg: &FlowConfig,
) -> Result<BoundaryFix, DeformError> {
    let levels = &grid.spec.levels;
    let images = grid
        .nodes
        .par_iter()
        .map(|row| row.iter().map(|z| m.apply(fs, *z, cfg)).collect::<Result<Vec<_>, _>>())
        .collect::<Result<Vec<_>, ShiftError>>()?;
    let ordered: Vec<bool> = images.iter().map(|r| orbit_order_preserved(r)).collect();
    let fits = |b: f64| levels.iter().zip(&ordered).all(|(c, ok)| *c > b || *ok);
    let profile = match profile {
        Some(p) => {
            if !fits(p.b) {
                return Err(DeformError::NotInjectiveOnUb { b_min: p.b });
            }
            p
        }
        None => {
            let b_min = levels[0];
            let mut b = B_START;
            while !fits(b) {
                b *= 0.5;
                if b < b_min {
                    return Err(DeformError::NotInjectiveOnUb { b_min });
                }
            }
            BumpProfile::from_b(b)?
        }
    };
    let shift = truncate_shift(is, lambda, &profile);
    let map = if shift.constant_value() == Some(0.0) {
        MapSpec::identity()
    } else {
        MapSpec::new(format!("fix_boundary({})", m.name), vec![Primitive::flow_shift(shift.clone())])
    };
    let per_node = grid
        .nodes
        .par_iter()
        .zip(&images)
        .map(|(row, imgs)| {
            let (mut lie, mut inner, mut outer) = (f64::INFINITY, 0.0f64, 0.0f64);
            let mut worst = Point::default();
            for (z, mz) in row.iter().zip(imgs) {
                let s = is.level(*z);
                let w = map.apply(fs, *z, cfg)?;
                if s <= profile.a {
                    inner = inner.max(w.dist(*mz));
                }
                if s >= profile.b {
                    outer = outer.max(w.dist(*z));
                }
                let d = if s >= profile.b { 0.0 } else { lie_derivative(fs, &shift, *z, 1e-2, cfg)?.value };
                if d < lie {
                    lie = d;
                    worst = *z;
                }
            }
            Ok((lie, worst, inner, outer))
        })
        .collect::<Result<Vec<_>, ShiftError>>()?;
    let (min_lie, at) = per_node.iter().fold((f64::INFINITY, Point::default()), |a, r| if r.0 < a.0 { (r.0, r.1) } else { a });
    if min_lie <= -1.0 {
        return Err(DeformError::CriterionViolated { value: min_lie, x: at.x, y: at.y });
    }
    Ok(BoundaryFix {
        map,
        profile,
        shift,
        min_lie,
        inner_residual: per_node.iter().map(|r| r.2).fold(0.0, f64::max),
        boundary_residual: per_node.iter().map(|r| r.3).fold(0.0, f64::max),
    })
}

/// `g = ψ ∘ m ∘ ψ⁻¹` as a single custom primitive.
pub fn change_to_diffeo(is: &IntegralSpec, m: &MapSpec, collar: &CollarMap) -> MapSpec {
    let (is, inner, collar) = (is.clone(), Arc::new(m.clone()), *collar);
    let name = format!("collar({})", m.name);
    let f = move |fs: &FieldSpec, z: Point, cfg: &FlowConfig| -> Result<Point, ShiftError> {
        let fail = |e: DeformError| ShiftError::Primitive(e.to_string());
        let u = collar_psi_inv(&is, &collar, z).map_err(fail)?;
        let v = inner.apply(fs, u, cfg)?;
        collar_psi(&is, &collar, v).map_err(fail)
    };
    MapSpec::new(name.clone(), vec![Primitive::custom(name, f)])
}

/// Sampled diagnostics of the homotopy `A` over `(t, k, node)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeformReport {
    pub field_id: String,
    pub profile: BumpProfile,
    pub ks: Vec<f64>,
    pub ts: Vec<f64>,
    /// `sup |A(1, k, z) - Φ(z, Λ_k(z))|`.
    pub omega_deviation: f64,
    /// `sup |A(0, k, z) - Ω′_k(z)|`.
    pub omega_prime_deviation: f64,
    /// Smallest `F(β_{t,k})` over the samples.
    pub min_lie: f64,
    /// `sup |F(β_{t,k}) - ((1 - t) ν ∘ f̂ + t) F(Λ_k)|`.
    pub factorization_error: f64,
    /// `sup |A(t, k, z) - z|` over nodes with `|Λ_k(z)| ≤ 1e-10`.
    pub zero_set_deviation: f64,
    /// `sup |A(0, k, z) - z|` over nodes outside `U_b`.
    pub boundary_residual: f64,
    pub samples: usize,
}

/// A family `k ↦ Λ_k` of shift functions with its deformation diagnostics.
pub struct DeformState {
    pub field_id: String,
    pub profile: BumpProfile,
    pub ks: Vec<f64>,
    pub ts: Vec<f64>,
    pub report: Option<DeformReport>,
}

impl DeformState {
    pub fn new(fs: &FieldSpec, profile: BumpProfile, ks: Vec<f64>, ts: Vec<f64>) -> Self {
        Self { field_id: fs.id(), profile, ks, ts, report: None }
    }

    /// Evaluates `A` at every `(t, k, node)` and refreshes the report.
    pub fn evaluate(
        &mut self,
        fs: &FieldSpec,
        is: &IntegralSpec,
        family: &(dyn Fn(f64) -> ShiftFn + Sync),
        grid: &NodeGrid,
        cfg: &FlowConfig,
    ) -> Result<&DeformReport, DeformError> {
        let p = self.profile;
        let nodes: Vec<Point> = grid.iter_nodes().map(|(_, _, z)| z).collect();
        let mut cells = Vec::new();
        for &k in &self.ks {
            for &t in &self.ts {
                cells.push((k, t));
            }
        }
        struct Acc {
            omega: f64,
            omega_prime: f64,
            lie: f64,
            fact: f64,
            zero: f64,
            boundary: f64,
        }
        let accs = cells
            .par_iter()
            .map(|&(k, t)| -> Result<Acc, DeformError> {
                let lambda = family(k);
                let b = beta(is, &lambda, &p, t);
                let trunc = truncate_shift(is, &lambda, &p);
                let mut acc =
                    Acc { omega: 0.0, omega_prime: 0.0, lie: f64::INFINITY, fact: 0.0, zero: 0.0, boundary: 0.0 };
                for z in &nodes {
                    let a = homotopy_a(fs, is, &lambda, &p, t, *z, cfg)?;
                    let l = lambda.eval(*z);
                    let s = is.level(*z);
                    if t == 1.0 {
                        acc.omega = acc.omega.max(a.dist(flow_with(fs, *z, l, cfg)?));
                    }
                    if t == 0.0 {
                        acc.omega_prime = acc.omega_prime.max(a.dist(flow_with(fs, *z, trunc.eval(*z), cfg)?));
                        if s >= p.b {
                            acc.boundary = acc.boundary.max(a.dist(*z));
                        }
                    }
                    if l.abs() <= 1e-10 {
                        acc.zero = acc.zero.max(a.dist(*z));
                    }
                    let fb = lie_derivative(fs, &b, *z, 1e-2, cfg)?.value;
                    let fl = lie_derivative(fs, &lambda, *z, 1e-2, cfg)?.value;
                    acc.lie = acc.lie.min(fb);
                    acc.fact = acc.fact.max((fb - ((1.0 - t) * p.eval(s) + t) * fl).abs());
                }
                Ok(acc)
            })
            .collect::<Result<Vec<_>, _>>()?;
        let max = |f: fn(&Acc) -> f64| accs.iter().map(f).fold(0.0, f64::max);
        self.report = Some(DeformReport {
            field_id: self.field_id.clone(),
            profile: p,
            ks: self.ks.clone(),
            ts: self.ts.clone(),
            omega_deviation: max(|a| a.omega),
            omega_prime_deviation: max(|a| a.omega_prime),
            min_lie: accs.iter().map(|a| a.lie).fold(f64::INFINITY, f64::min),
            factorization_error: max(|a| a.fact),
            zero_set_deviation: max(|a| a.zero),
            boundary_residual: max(|a| a.boundary),
            samples: cells.len() * nodes.len(),
        });
        Ok(self.report.as_ref().unwrap())
    }
}

#[cfg(test)]
mod tests;

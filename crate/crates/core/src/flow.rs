//! Numerical flow `Φ(z, t)`, orbit sampling and the period function.

use std::fmt::Write as _;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::field::{CenterCase, FieldSpec, IntegralSpec};
use crate::geom::Point;
use crate::ode::{self, OdeError, OdeOptions, Step};

pub const MIN_TOL: f64 = 1e-12;
pub const MAX_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("tolerance {0} outside [1e-12, 1e-3]")]
    BadTolerance(f64),
    #[error("step size underflow at t = {t} (stiff near the singular point?)")]
    StepUnderflow { t: f64 },
    #[error("trajectory left the domain at t = {t}")]
    LeftDomain { t: f64 },
    #[error("no return to the section from ({x}, {y}) within budget")]
    NoReturn { x: f64, y: f64 },
    #[error("point ({x}, {y}) is closer than {min_radius} to the origin")]
    TooCloseToOrigin { x: f64, y: f64, min_radius: f64 },
    #[error("levels must be decreasing and in (0, 1]")]
    BadLevels,
    #[error("{0}")]
    Field(String),
}

impl From<OdeError> for FlowError {
    fn from(e: OdeError) -> Self {
        match e {
            OdeError::StepUnderflow { t } => FlowError::StepUnderflow { t },
            OdeError::LeftDomain { t } | OdeError::TooManySteps { t } => FlowError::LeftDomain { t },
        }
    }
}

/// Integration settings shared by the flow-based operations.
#[derive(Debug, Clone, Copy)]
pub struct FlowConfig {
    pub tol: f64,
    /// Points closer than this to `O` are rejected where `z ≠ O` is required.
    pub min_radius: f64,
    /// Step budget for a single return-time search.
    pub max_period_steps: usize,
}

impl FlowConfig {
    pub fn new(tol: f64) -> Result<Self, FlowError> {
        if !(MIN_TOL..=MAX_TOL).contains(&tol) {
            return Err(FlowError::BadTolerance(tol));
        }
        Ok(Self { tol, min_radius: 1e-6, max_period_steps: 500_000 })
    }

    /// Local error control runs two orders below `tol`, so that global
    /// quantities (group law, return distance) stay within a few `tol`.
    fn ode(&self) -> OdeOptions {
        OdeOptions::new((self.tol * 1e-2).max(1e-14))
    }
}

/// `Φ(z, t)`.
pub fn flow(fs: &FieldSpec, z: Point, t: f64, tol: f64) -> Result<Point, FlowError> {
    flow_with(fs, z, t, &FlowConfig::new(tol)?)
}

pub fn flow_with(fs: &FieldSpec, z: Point, t: f64, cfg: &FlowConfig) -> Result<Point, FlowError> {
    if z.is_origin() || t == 0.0 {
        return Ok(z);
    }
    Ok(ode::solve(|p| fs.eval(p), z, t, &cfg.ode())?)
}

/// Calls `on_step` for each accepted integration step of `Φ(z, ·)` on `[0, t]`.
pub fn flow_steps<C>(fs: &FieldSpec, z: Point, t: f64, cfg: &FlowConfig, on_step: C) -> Result<Point, FlowError>
where
    C: FnMut(&Step) -> ControlFlow<()>,
{
    if z.is_origin() || t == 0.0 {
        return Ok(z);
    }
    Ok(ode::integrate(|p| fs.eval(p), z, t, &cfg.ode(), on_step)?.1)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub field_id: String,
    pub times: Vec<f64>,
    pub points: Vec<Point>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Largest `|f̂(p) - f̂(p₀)|` along the samples.
    pub fn level_drift(&self, is: &IntegralSpec) -> f64 {
        let Some(&p0) = self.points.first() else { return 0.0 };
        let l0 = is.level(p0);
        self.points.iter().map(|p| (is.level(*p) - l0).abs()).fold(0.0, f64::max)
    }

    /// CSV with header `t,x,y`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,x,y\n");
        for (t, p) in self.times.iter().zip(&self.points) {
            let _ = writeln!(s, "{t:.16e},{:.16e},{:.16e}", p.x, p.y);
        }
        s
    }
}

/// Trajectory through the accepted steps of `Φ(z, ·)` on `[0, t]`.
pub fn trajectory(fs: &FieldSpec, z: Point, t: f64, tol: f64) -> Result<Trajectory, FlowError> {
    let cfg = FlowConfig::new(tol)?;
    let mut times = vec![0.0];
    let mut points = vec![z];
    flow_steps(fs, z, t, &cfg, |s| {
        times.push(s.t1);
        points.push(s.y1);
        ControlFlow::Continue(())
    })?;
    Ok(Trajectory { field_id: fs.id(), times, points })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeriodSample {
    pub z: Point,
    pub theta: f64,
    pub level: f64,
    pub residual: f64,
}

/// Return time of `z` to the ray `O→z` and the return distance.
pub fn return_time(fs: &FieldSpec, z: Point, cfg: &FlowConfig) -> Result<(f64, f64), FlowError> {
    let no_return = || FlowError::NoReturn { x: z.x, y: z.y };
    if z.norm() < cfg.min_radius {
        return Err(FlowError::TooCloseToOrigin { x: z.x, y: z.y, min_radius: cfg.min_radius });
    }
    let u = (1.0 / z.norm()) * z;
    let sigma = u.cross(fs.eval(z)).signum();
    if sigma == 0.0 {
        return Err(no_return());
    }
    // signed distance to the line through the ray, positive once the orbit has left it
    let g = |p: Point| sigma * u.cross(p);
    let on_ray = |p: Point| p.dot(u) > 0.0;
    let mut opts = cfg.ode();
    opts.max_steps = cfg.max_period_steps;
    opts.timescale = Some(z.norm() / fs.eval(z).norm());
    let mut left = false;
    let mut hit: Option<(Step, f64, f64)> = None;
    const SUB: usize = 4;
    let res = ode::integrate(|p| fs.eval(p), z, f64::MAX / 4.0, &opts, |s| {
        let mut ta = s.t0;
        let mut ga = g(s.y0);
        for k in 1..=SUB {
            let tb = if k == SUB { s.t1 } else { s.t0 + (s.t1 - s.t0) * k as f64 / SUB as f64 };
            let pb = if k == SUB { s.y1 } else { s.eval(tb) };
            let gb = g(pb);
            if left && ga < 0.0 && gb >= 0.0 && on_ray(pb) {
                hit = Some((*s, ta, tb));
                return ControlFlow::Break(());
            }
            if gb < 0.0 {
                left = true;
            }
            ta = tb;
            ga = gb;
        }
        ControlFlow::Continue(())
    });
    match res {
        Ok(_) => {}
        Err(OdeError::TooManySteps { .. }) => return Err(no_return()),
        Err(e) => return Err(e.into()),
    }
    let (step, mut a, mut b) = hit.ok_or_else(no_return)?;
    // Illinois iteration on the interpolant
    let (mut ga, mut gb) = (g(step.eval(a)), g(step.eval(b)));
    let mut side = 0;
    let mut t = b;
    for _ in 0..100 {
        t = (a * gb - b * ga) / (gb - ga);
        if !(t > a.min(b) && t < a.max(b)) {
            t = 0.5 * (a + b);
        }
        let gt = g(step.eval(t));
        if gt == 0.0 || (b - a).abs() <= 4.0 * f64::EPSILON * t.abs() {
            break;
        }
        if gt < 0.0 {
            a = t;
            ga = gt;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        } else {
            b = t;
            gb = gt;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        }
    }
    // Newton on the crossing time, integrating afresh from the step start
    let fine = opts;
    let mut p = ode::solve(|q| fs.eval(q), step.y0, t - step.t0, &fine)?;
    for _ in 0..8 {
        let dg = sigma * u.cross(fs.eval(p));
        if dg == 0.0 {
            break;
        }
        let dt = -g(p) / dg;
        let next = t + dt;
        p = ode::solve(|q| fs.eval(q), step.y0, next - step.t0, &fine)?;
        t = next;
        if dt.abs() <= 1e-15 * t.abs() {
            break;
        }
    }
    if !(t > 0.0) {
        return Err(no_return());
    }
    Ok((t, p.dist(z)))
}

/// Period `θ(z)` of the orbit through `z`.
pub fn period(fs: &FieldSpec, is: &IntegralSpec, z: Point, tol: f64) -> Result<PeriodSample, FlowError> {
    period_with(fs, is, z, &FlowConfig::new(tol)?)
}

pub fn period_with(fs: &FieldSpec, is: &IntegralSpec, z: Point, cfg: &FlowConfig) -> Result<PeriodSample, FlowError> {
    let (theta, residual) = return_time(fs, z, cfg)?;
    Ok(PeriodSample { z, theta, level: is.level(z), residual })
}

/// `n` points equally spaced in time over one period, starting at `z`.
pub fn orbit_samples(fs: &FieldSpec, z: Point, n: usize, tol: f64) -> Result<Trajectory, FlowError> {
    let cfg = FlowConfig::new(tol)?;
    let (theta, _) = return_time(fs, z, &cfg)?;
    let mut times = Vec::with_capacity(n);
    let mut points = Vec::with_capacity(n);
    let mut p = z;
    for i in 0..n {
        let t = theta * i as f64 / n as f64;
        if i > 0 {
            p = flow_with(fs, p, t - times[i - 1], &cfg)?;
        }
        times.push(t);
        points.push(p);
    }
    Ok(Trajectory { field_id: fs.id(), times, points })
}

/// Periods at the points of the ray at `ray_angle` on the given levels.
pub fn period_blowup_check(
    fs: &FieldSpec,
    is: &IntegralSpec,
    ray_angle: f64,
    levels: &[f64],
    tol: f64,
) -> Result<Vec<PeriodSample>, FlowError> {
    if levels.iter().any(|l| !(*l > 0.0 && *l <= 1.0)) || levels.windows(2).any(|w| w[1] >= w[0]) {
        return Err(FlowError::BadLevels);
    }
    let cfg = FlowConfig::new(tol)?;
    levels
        .iter()
        .map(|&l| {
            let z = is.ray_point(l, ray_angle).map_err(|e| FlowError::Field(e.to_string()))?;
            period_with(fs, is, z, &cfg)
        })
        .collect()
}

/// Whether a level scan behaves as the center case predicts: strictly
/// increasing periods for degenerate centers, periods within a factor
/// `band` of each other otherwise.
pub fn blowup_consistent(case: CenterCase, samples: &[PeriodSample], band: f64) -> bool {
    if case.is_degenerate() {
        samples.windows(2).all(|w| w[1].theta > w[0].theta)
    } else {
        let lo = samples.iter().map(|s| s.theta).fold(f64::INFINITY, f64::min);
        let hi = samples.iter().map(|s| s.theta).fold(0.0, f64::max);
        samples.is_empty() || hi <= band * lo
    }
}

/// CSV with header `level,x,y,theta,residual`.
pub fn periods_to_csv(samples: &[PeriodSample]) -> String {
    let mut s = String::from("level,x,y,theta,residual\n");
    for p in samples {
        let _ = writeln!(s, "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}", p.level, p.z.x, p.z.y, p.theta, p.residual);
    }
    s
}

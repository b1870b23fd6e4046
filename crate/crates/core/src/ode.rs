//! Dormand–Prince 5(4) integrator for autonomous planar systems with
//! continuous (dense) output.

use std::ops::ControlFlow;

use thiserror::Error;

use crate::geom::Point;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum OdeError {
    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },
    #[error("solution left the domain at t = {t}")]
    LeftDomain { t: f64 },
    #[error("step budget exhausted at t = {t}")]
    TooManySteps { t: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    /// Mixed absolute/relative local error tolerance.
    pub tol: f64,
    /// Step floor relative to the integration span.
    pub min_step_rel: f64,
    pub max_steps: usize,
    pub max_radius: f64,
    /// Overrides the span as the timescale for the step floor.
    pub timescale: Option<f64>,
}

impl OdeOptions {
    pub fn new(tol: f64) -> Self {
        Self { tol, min_step_rel: 1e-14, max_steps: 2_000_000, max_radius: 1e8, timescale: None }
    }
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// One accepted step together with its interpolant.
#[derive(Debug, Clone, Copy)]
pub struct Step {
    pub t0: f64,
    pub t1: f64,
    pub y0: Point,
    pub y1: Point,
    cont: [Point; 5],
}

impl Step {
    /// Fourth-order interpolant, exact at both ends.
    pub fn eval(&self, t: f64) -> Point {
        let s = (t - self.t0) / (self.t1 - self.t0);
        let s1 = 1.0 - s;
        let [r1, r2, r3, r4, r5] = self.cont;
        r1 + s * (r2 + s1 * (r3 + s * (r4 + s1 * r5)))
    }
}

fn err_norm(e: Point, y0: Point, y1: Point, tol: f64) -> f64 {
    let sx = tol + tol * y0.x.abs().max(y1.x.abs());
    let sy = tol + tol * y0.y.abs().max(y1.y.abs());
    (0.5 * ((e.x / sx).powi(2) + (e.y / sy).powi(2))).sqrt()
}

fn initial_step<F: Fn(Point) -> Point>(rhs: &F, y0: Point, f0: Point, span: f64, tol: f64) -> f64 {
    let sc = |v: f64| tol + tol * v.abs();
    let d0 = ((y0.x / sc(y0.x)).powi(2) + (y0.y / sc(y0.y)).powi(2)).sqrt();
    let d1 = ((f0.x / sc(y0.x)).powi(2) + (f0.y / sc(y0.y)).powi(2)).sqrt();
    let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    let h0 = h0.min(span);
    let y1 = y0 + h0 * f0;
    let f1 = rhs(y1);
    let d2 = (((f1.x - f0.x) / sc(y0.x)).powi(2) + ((f1.y - f0.y) / sc(y0.y)).powi(2)).sqrt() / h0;
    let h1 = if d1.max(d2) <= 1e-15 { (h0 * 1e-3).max(1e-6) } else { (0.01 / d1.max(d2)).powf(0.2) };
    (100.0 * h0).min(h1).min(span)
}

/// Integrates `y' = rhs(y)` from `y0` over time `t_end` (negative allowed).
///
/// `on_step` sees every accepted step; returning `Break` stops the
/// integration and yields that step's end state.
pub fn integrate<F, C>(rhs: F, y0: Point, t_end: f64, opts: &OdeOptions, mut on_step: C) -> Result<(f64, Point), OdeError>
where
    F: Fn(Point) -> Point,
    C: FnMut(&Step) -> ControlFlow<()>,
{
    if t_end == 0.0 {
        return Ok((0.0, y0));
    }
    let dir = t_end.signum();
    let span = t_end.abs();
    let tol = opts.tol;
    let h_min = opts.min_step_rel * opts.timescale.unwrap_or(span);
    let mut t = 0.0;
    let mut y = y0;
    let mut k1 = rhs(y);
    let mut h = initial_step(&rhs, y, k1, span.min(opts.timescale.unwrap_or(span)), tol);
    let mut steps = 0usize;
    let mut last_rejected = false;
    loop {
        let remaining = span - t;
        if remaining <= 0.0 {
            return Ok((dir * span, y));
        }
        let mut hs = h.min(remaining);
        let closes = hs >= remaining;
        if remaining - hs < 1e-12 * hs {
            hs = remaining;
        }
        steps += 1;
        if steps > opts.max_steps {
            return Err(OdeError::TooManySteps { t: dir * t });
        }
        let hd = dir * hs;
        let k2 = rhs(y + (hd * A21) * k1);
        let k3 = rhs(y + hd * (A31 * k1 + A32 * k2));
        let k4 = rhs(y + hd * (A41 * k1 + A42 * k2 + A43 * k3));
        let k5 = rhs(y + hd * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4));
        let k6 = rhs(y + hd * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5));
        let y1 = y + hd * (A71 * k1 + A73 * k3 + A74 * k4 + A75 * k5 + A76 * k6);
        let k7 = rhs(y1);
        let e = hd * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6 + E7 * k7);
        let err = err_norm(e, y, y1, tol);
        if !y1.is_finite() || !err.is_finite() {
            if hs <= h_min {
                return Err(OdeError::LeftDomain { t: dir * t });
            }
            h = 0.25 * hs;
            last_rejected = true;
            continue;
        }
        if err <= 1.0 {
            let step = Step {
                t0: dir * t,
                t1: dir * (t + hs),
                y0: y,
                y1,
                cont: [
                    y,
                    y1 - y,
                    hd * k1 - (y1 - y),
                    (y1 - y) - hd * k7 - (hd * k1 - (y1 - y)),
                    hd * (D1 * k1 + D3 * k3 + D4 * k4 + D5 * k5 + D6 * k6 + D7 * k7),
                ],
            };
            t = if closes { span } else { t + hs };
            y = y1;
            k1 = k7;
            if y.norm() > opts.max_radius {
                return Err(OdeError::LeftDomain { t: dir * t });
            }
            if on_step(&step).is_break() {
                return Ok((dir * t, y));
            }
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = if last_rejected { hs * fac.min(1.0) } else { hs * fac };
            last_rejected = false;
        } else {
            h = hs * (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
            last_rejected = true;
            if h < h_min {
                return Err(OdeError::StepUnderflow { t: dir * t });
            }
        }
    }
}

/// State at time `t_end`.
pub fn solve<F: Fn(Point) -> Point>(rhs: F, y0: Point, t_end: f64, opts: &OdeOptions) -> Result<Point, OdeError> {
    integrate(rhs, y0, t_end, opts, |_| ControlFlow::Continue(())).map(|(_, y)| y)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rot(p: Point) -> Point {
        Point::new(-p.y, p.x)
    }

    #[test]
    fn rotation_closed_form() {
        let opts = OdeOptions::new(1e-10);
        for t in [0.3, std::f64::consts::FRAC_PI_2, 5.0, -2.0] {
            let y = solve(rot, Point::new(1.0, 0.0), t, &opts).unwrap();
            assert!(y.dist(Point::new(t.cos(), t.sin())) < 1e-9, "t={t}: {y:?}");
        }
    }

    #[test]
    fn dense_output_is_accurate_inside_steps() {
        let opts = OdeOptions::new(1e-10);
        let mut worst: f64 = 0.0;
        integrate(rot, Point::new(1.0, 0.0), 6.0, &opts, |s| {
            for k in 1..8 {
                let t = s.t0 + (s.t1 - s.t0) * k as f64 / 8.0;
                worst = worst.max(s.eval(t).dist(Point::new(t.cos(), t.sin())));
            }
            assert_eq!(s.eval(s.t1), s.y1);
            ControlFlow::Continue(())
        })
        .unwrap();
        assert!(worst < 1e-8, "{worst}");
    }

    #[test]
    fn exponential_growth_and_blow_up() {
        let opts = OdeOptions::new(1e-11);
        let y = solve(|p| p, Point::new(1.0, -2.0), 1.5, &opts).unwrap();
        let e = 1.5f64.exp();
        assert!((y.x - e).abs() < 1e-9 * e && (y.y + 2.0 * e).abs() < 2e-9 * e);
        // y' = y^2 blows up at t = 1
        let r = solve(|p| Point::new(p.x * p.x, 0.0), Point::new(1.0, 0.0), 2.0, &opts);
        assert!(matches!(r, Err(OdeError::LeftDomain { .. }) | Err(OdeError::StepUnderflow { .. })));
    }

    #[test]
    fn early_stop() {
        let opts = OdeOptions::new(1e-8);
        let (t, _) = integrate(rot, Point::new(1.0, 0.0), 100.0, &opts, |s| {
            if s.t1 > 1.0 { ControlFlow::Break(()) } else { ControlFlow::Continue(()) }
        })
        .unwrap();
        assert!(t > 1.0 && t < 100.0);
    }
}

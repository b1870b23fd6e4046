//! One period of a closed orbit with dense output, used to locate points
//! on the orbit in time.

use std::ops::ControlFlow;

use crate::field::FieldSpec;
use crate::flow::{flow_steps, return_time, FlowConfig};
use crate::geom::Point;
use crate::ode::Step;

use super::ShiftError;

const SAMPLES: usize = 512;
const GOLDEN: f64 = 0.618_033_988_749_894_8;

pub struct OrbitTable {
    pub z0: Point,
    pub theta: f64,
    steps: Vec<Step>,
    samples: Vec<(f64, Point)>,
}

impl OrbitTable {
    pub fn build(fs: &FieldSpec, z0: Point, cfg: &FlowConfig) -> Result<Self, ShiftError> {
        let (theta, _) = return_time(fs, z0, cfg)?;
        let mut steps = Vec::new();
        flow_steps(fs, z0, theta, cfg, |s| {
            steps.push(*s);
            ControlFlow::Continue(())
        })?;
        let mut table = Self { z0, theta, steps, samples: Vec::with_capacity(SAMPLES) };
        for k in 0..SAMPLES {
            let t = theta * k as f64 / SAMPLES as f64;
            let p = table.eval(t);
            table.samples.push((t, p));
        }
        Ok(table)
    }

    /// `Φ(z0, t)` from the interpolant, `t` taken modulo the period.
    pub fn eval(&self, t: f64) -> Point {
        let t = t.rem_euclid(self.theta);
        let i = self.steps.partition_point(|s| s.t1 < t).min(self.steps.len() - 1);
        self.steps[i].eval(t)
    }

    /// Time `s ∈ [0, θ)` with `Φ(z0, s) ≈ w`, and the remaining distance.
    ///
    /// Nearest sample, then golden-section search on the distance, then
    /// Newton on the flow time.
    pub fn time_of(&self, fs: &FieldSpec, w: Point) -> (f64, f64) {
        let (k, _) = self
            .samples
            .iter()
            .enumerate()
            .map(|(k, (_, p))| (k, p.dist(w)))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        let dt = self.theta / SAMPLES as f64;
        let d2 = |t: f64| (self.eval(t) - w).norm2();
        let (mut a, mut b) = (self.samples[k].0 - dt, self.samples[k].0 + dt);
        let mut c = b - GOLDEN * (b - a);
        let mut d = a + GOLDEN * (b - a);
        let (mut fc, mut fd) = (d2(c), d2(d));
        for _ in 0..40 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - GOLDEN * (b - a);
                fc = d2(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + GOLDEN * (b - a);
                fd = d2(d);
            }
        }
        let mut t = 0.5 * (a + b);
        for _ in 0..4 {
            let p = self.eval(t);
            let v = fs.eval(p);
            let step = (w - p).dot(v) / v.norm2();
            t += step;
            if step.abs() <= 1e-14 * self.theta {
                break;
            }
        }
        let t = t.rem_euclid(self.theta);
        (t, self.eval(t).dist(w))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::examples::rotation;

    #[test]
    fn locates_points_on_the_unit_circle() {
        let cfg = FlowConfig::new(1e-10).unwrap();
        let table = OrbitTable::build(&rotation(), Point::new(1.0, 0.0), &cfg).unwrap();
        assert!((table.theta - std::f64::consts::TAU).abs() < 1e-9);
        for s in [0.0, 0.3, 2.0, 3.5, 6.2] {
            let (t, d) = table.time_of(&rotation(), Point::polar(1.0, s));
            assert!(crate::geom::wrap_angle(t - s).abs() < 1e-9, "{t} vs {s}");
            assert!(d < 1e-9);
        }
    }
}

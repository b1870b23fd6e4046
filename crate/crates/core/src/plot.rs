//! SVG phase portraits: closed orbits at chosen levels, optionally with the
//! images of those orbits under a map.

use std::fmt::Write as _;

use crate::field::{FieldSpec, IntegralSpec};
use crate::flow::{orbit_samples, FlowConfig, FlowError};
use crate::geom::Point;
use crate::shift::{MapSpec, ShiftError};

const SIZE: f64 = 480.0;
const MARGIN: f64 = 16.0;

/// A polyline with a stroke colour.
#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    pub points: Vec<Point>,
    pub closed: bool,
    pub stroke: &'static str,
}

/// One orbit per level, starting on the ray at angle `0`.
pub fn orbit_curves(fs: &FieldSpec, is: &IntegralSpec, levels: &[f64], n: usize, tol: f64) -> Result<Vec<Curve>, FlowError> {
    levels
        .iter()
        .map(|&c| {
            let z = is.ray_point(c, 0.0).map_err(|e| FlowError::Field(e.to_string()))?;
            let t = orbit_samples(fs, z, n, tol)?;
            Ok(Curve { points: t.points, closed: true, stroke: "#1f4e99" })
        })
        .collect()
}

/// Images of `curves` under `m`.
pub fn mapped_curves(fs: &FieldSpec, m: &MapSpec, curves: &[Curve], tol: f64) -> Result<Vec<Curve>, ShiftError> {
    let cfg = FlowConfig::new(tol)?;
    curves
        .iter()
        .map(|c| {
            let points = c.points.iter().map(|z| m.apply(fs, *z, &cfg)).collect::<Result<Vec<_>, _>>()?;
            Ok(Curve { points, closed: c.closed, stroke: "#c0392b" })
        })
        .collect()
}

/// Renders the curves in a square viewport fitted to their bounding box,
/// with the singular point marked.
pub fn render_svg(curves: &[Curve]) -> String {
    let mut r: f64 = 1e-12;
    for c in curves {
        for p in &c.points {
            r = r.max(p.x.abs()).max(p.y.abs());
        }
    }
    let scale = (SIZE / 2.0 - MARGIN) / r;
    let map = |p: Point| (SIZE / 2.0 + scale * p.x, SIZE / 2.0 - scale * p.y);
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(s, r#"<rect width="{SIZE}" height="{SIZE}" fill="white"/>"#);
    for c in curves {
        let mut d = String::new();
        for (i, p) in c.points.iter().enumerate() {
            let (x, y) = map(*p);
            let _ = write!(d, "{}{x:.4} {y:.4}", if i == 0 { "M" } else { " L" });
        }
        if c.closed {
            d.push_str(" Z");
        }
        let _ = writeln!(s, r#"<path d="{d}" fill="none" stroke="{}" stroke-width="1.2"/>"#, c.stroke);
    }
    let (ox, oy) = map(Point::default());
    let _ = writeln!(s, r#"<circle cx="{ox:.4}" cy="{oy:.4}" r="2.5" fill="black"/>"#);
    s.push_str("</svg>\n");
    s
}

/// Phase portrait with orbits at `levels`.
pub fn phase_portrait(fs: &FieldSpec, is: &IntegralSpec, levels: &[f64], n: usize, tol: f64) -> Result<String, FlowError> {
    Ok(render_svg(&orbit_curves(fs, is, levels, n, tol)?))
}

//! Shift functions sampled on a (level, angle) grid, their recovery from
//! orbit-preserving maps, and interpolation off the grid.

use std::f64::consts::TAU;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::field::{FieldSpec, IntegralSpec};
use crate::flow::{flow_with, return_time, FlowConfig};
use crate::geom::Point;

use super::map::{MapSpec, ShiftFn};
use super::orbit::OrbitTable;
use super::ShiftError;

/// Levels of `f̂` (increasing, in `(0, 1]`) times equally spaced ray angles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub levels: Vec<f64>,
    pub n_angles: usize,
}

impl GridSpec {
    /// Levels `1/L, 2/L, …, 1`.
    pub fn uniform(n_levels: usize, n_angles: usize) -> Self {
        Self { levels: (1..=n_levels).map(|i| i as f64 / n_levels as f64).collect(), n_angles }
    }

    /// `n_levels` levels equally spaced on `[min_level, 1]`.
    pub fn clipped(n_levels: usize, n_angles: usize, min_level: f64) -> Self {
        let levels = if n_levels == 1 {
            vec![1.0]
        } else {
            (0..n_levels).map(|i| min_level + (1.0 - min_level) * i as f64 / (n_levels - 1) as f64).collect()
        };
        Self { levels, n_angles }
    }

    pub fn angle(&self, j: usize) -> f64 {
        TAU * j as f64 / self.n_angles as f64
    }

    pub fn validate(&self) -> Result<(), ShiftError> {
        if self.levels.is_empty() || self.n_angles < 4 {
            return Err(ShiftError::BadGrid("need at least one level and four angles".into()));
        }
        if self.levels.iter().any(|c| !(*c > 0.0 && *c <= 1.0)) || self.levels.windows(2).any(|w| w[1] <= w[0]) {
            return Err(ShiftError::BadGrid("levels must increase within (0, 1]".into()));
        }
        Ok(())
    }
}

/// Grid nodes `z_ij` on the ray at angle `j` with `f̂ = level i`, and the
/// period of each level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeGrid {
    pub field_id: String,
    pub spec: GridSpec,
    pub nodes: Vec<Vec<Point>>,
    pub thetas: Vec<f64>,
}

impl NodeGrid {
    pub fn build(fs: &FieldSpec, is: &IntegralSpec, spec: &GridSpec, cfg: &FlowConfig) -> Result<Self, ShiftError> {
        spec.validate()?;
        let rows: Vec<(Vec<Point>, f64)> = spec
            .levels
            .par_iter()
            .map(|&c| {
                let row = (0..spec.n_angles)
                    .map(|j| is.ray_point(c, spec.angle(j)))
                    .collect::<Result<Vec<_>, _>>()?;
                let (theta, _) = return_time(fs, row[0], cfg)?;
                Ok((row, theta))
            })
            .collect::<Result<_, ShiftError>>()?;
        let (nodes, thetas) = rows.into_iter().unzip();
        Ok(Self { field_id: fs.id(), spec: spec.clone(), nodes, thetas })
    }

    pub fn n_levels(&self) -> usize {
        self.nodes.len()
    }

    pub fn n_angles(&self) -> usize {
        self.spec.n_angles
    }

    pub fn iter_nodes(&self) -> impl Iterator<Item = (usize, usize, Point)> + '_ {
        self.nodes.iter().enumerate().flat_map(|(i, row)| row.iter().enumerate().map(move |(j, p)| (i, j, *p)))
    }

    pub fn nearest_node(&self, z: Point) -> (usize, usize) {
        let (i, j, _) = self
            .iter_nodes()
            .map(|(i, j, p)| (i, j, p.dist(z)))
            .fold((0, 0, f64::INFINITY), |a, b| if b.2 < a.2 { b } else { a });
        (i, j)
    }

    pub fn min_theta(&self) -> f64 {
        self.thetas.iter().copied().fold(f64::INFINITY, f64::min)
    }

    fn same_as(&self, o: &NodeGrid) -> bool {
        self.spec == o.spec && self.field_id == o.field_id
    }
}

/// Anchor `Λ(z₀) = t₀` fixing the branch of a recovered shift function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub z: Point,
    pub t: f64,
}

/// Values of a shift function `Λ` at the nodes of a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftFunctionSample {
    pub grid: NodeGrid,
    pub values: Vec<Vec<f64>>,
    /// Node whose value was fixed first.
    pub anchor_node: (usize, usize),
    /// `n` with `Λ(anchor node) = β + nθ`, `β` the representative in `[-θ/2, θ/2)`.
    pub branch: i64,
    /// Largest node residual `|Φ(z, Λ(z)) - m(z)|`; zero for computed samples.
    pub residual: f64,
}

impl ShiftFunctionSample {
    /// Samples a function at the nodes.
    pub fn from_fn(grid: &NodeGrid, alpha: &ShiftFn) -> Self {
        let values = grid.nodes.iter().map(|row| row.iter().map(|z| alpha.eval(*z)).collect()).collect();
        Self { grid: grid.clone(), values, anchor_node: (0, 0), branch: 0, residual: 0.0 }
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    /// Largest `|self - other|` over the nodes.
    pub fn sup_diff(&self, other: &ShiftFunctionSample) -> f64 {
        self.values
            .iter()
            .flatten()
            .zip(other.values.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|Λ - α|` over the nodes.
    pub fn sup_diff_fn(&self, alpha: &ShiftFn) -> f64 {
        self.grid
            .iter_nodes()
            .map(|(i, j, z)| (self.values[i][j] - alpha.eval(z)).abs())
            .fold(0.0, f64::max)
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max)
    }

    /// Largest jump between angular neighbours relative to the level period.
    pub fn max_neighbor_jump(&self) -> f64 {
        let a = self.grid.n_angles();
        let mut worst: f64 = 0.0;
        for (i, row) in self.values.iter().enumerate() {
            for j in 0..a {
                worst = worst.max((row[(j + 1) % a] - row[j]).abs() / self.grid.thetas[i]);
            }
            if i > 0 {
                for (v, below) in row.iter().zip(&self.values[i - 1]) {
                    worst = worst.max((v - below).abs() / self.grid.thetas[i]);
                }
            }
        }
        worst
    }

    pub fn map_values(&self, f: impl Fn(usize, usize, Point, f64) -> f64) -> Self {
        let mut out = self.clone();
        for (i, j, z) in self.grid.iter_nodes() {
            out.values[i][j] = f(i, j, z, self.values[i][j]);
        }
        out
    }

    /// CSV with header `level,angle,lambda`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("level,angle,lambda\n");
        for (i, row) in self.values.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                let _ = writeln!(s, "{:.16e},{:.16e},{:.16e}", self.grid.spec.levels[i], self.grid.spec.angle(j), v);
            }
        }
        s
    }
}

fn nearest_branch(base: f64, theta: f64, target: f64) -> (f64, f64) {
    let n = ((target - base) / theta).round();
    let v = base + n * theta;
    (v, (v - target).abs())
}

/// Anchor at the outermost node on the ray at angle `0`: `α(z₀)` for a
/// single flow shift, otherwise the representative in `[-θ/2, θ/2)`.
pub fn default_anchor(fs: &FieldSpec, m: &MapSpec, grid: &NodeGrid, cfg: &FlowConfig) -> Result<Anchor, ShiftError> {
    let z = grid.nodes[grid.n_levels() - 1][0];
    if let Some(a) = m.as_flow_shift() {
        return Ok(Anchor { z, t: a.eval(z) });
    }
    let table = OrbitTable::build(fs, z, cfg)?;
    let (s, _) = table.time_of(fs, m.apply(fs, z, cfg)?);
    let t = if s >= 0.5 * table.theta { s - table.theta } else { s };
    Ok(Anchor { z, t })
}

/// Recovers `Λ` with `Φ(z, Λ(z)) = m(z)` at every node.
///
/// Each node gets its representative in `[-θ/2, θ/2)` from the orbit table
/// of its level; branches are then fixed at the anchor, swept around the
/// anchor's level, and carried level by level outwards and inwards, each
/// time choosing the lift nearest to the continuous prediction.
pub fn recover_shift(
    fs: &FieldSpec,
    is: &IntegralSpec,
    m: &MapSpec,
    anchor: Anchor,
    grid: &NodeGrid,
    cfg: &FlowConfig,
) -> Result<ShiftFunctionSample, ShiftError> {
    let anchor_image = m.apply(fs, anchor.z, cfg)?;
    let orbit_tol = cfg.tol.max(1e-12);
    let anchor_drift = (is.level(anchor_image) - is.level(anchor.z)).abs();
    if !(anchor_drift <= orbit_tol) {
        return Err(ShiftError::NotOrbitPreserving { x: anchor.z.x, y: anchor.z.y, drift: anchor_drift });
    }
    let anchor_gap = flow_with(fs, anchor.z, anchor.t, cfg)?.dist(anchor_image);
    if anchor_gap > 10.0 * cfg.tol * (1.0 + anchor.z.norm()) {
        return Err(ShiftError::AnchorInconsistent { residual: anchor_gap });
    }
    // representatives and node residuals, one level per task
    let rows: Vec<Vec<(f64, f64)>> = grid
        .nodes
        .par_iter()
        .zip(&grid.thetas)
        .map(|(row, &theta)| {
            let table = OrbitTable::build(fs, row[0], cfg)?;
            row.iter()
                .map(|&z| {
                    let w = m.apply(fs, z, cfg)?;
                    let drift = (is.level(w) - is.level(z)).abs();
                    if drift > orbit_tol || !w.is_finite() {
                        return Err(ShiftError::NotOrbitPreserving { x: z.x, y: z.y, drift });
                    }
                    let (sz, _) = table.time_of(fs, z);
                    let (sw, _) = table.time_of(fs, w);
                    let mut lam = (sw - sz + 0.5 * theta).rem_euclid(theta) - 0.5 * theta;
                    let mut p = flow_with(fs, z, lam, cfg)?;
                    for _ in 0..4 {
                        let v = fs.eval(p);
                        let dl = (w - p).dot(v) / v.norm2();
                        if !dl.is_finite() {
                            break;
                        }
                        lam += dl;
                        p = flow_with(fs, z, lam, cfg)?;
                        if dl.abs() <= 1e-13 * theta {
                            break;
                        }
                    }
                    let res = p.dist(w);
                    if res > 1e3 * cfg.tol * (1.0 + z.norm()) {
                        return Err(ShiftError::NotOrbitPreserving { x: z.x, y: z.y, drift: res });
                    }
                    Ok((lam, res))
                })
                .collect()
        })
        .collect::<Result<_, ShiftError>>()?;

    let (nl, na) = (grid.n_levels(), grid.n_angles());
    let base: Vec<Vec<f64>> = rows.iter().map(|r| r.iter().map(|x| x.0).collect()).collect();
    let residual = rows.iter().flatten().map(|x| x.1).fold(0.0, f64::max);
    let mut values = vec![vec![f64::NAN; na]; nl];
    let conflict = |i: usize, j: usize, distance: f64| ShiftError::BranchConflict {
        level: grid.spec.levels[i],
        angle: grid.spec.angle(j),
        distance,
        theta: grid.thetas[i],
    };

    let (i0, j0) = grid.nearest_node(anchor.z);
    let th0 = grid.thetas[i0];
    let (v0, d0) = nearest_branch(base[i0][j0], th0, anchor.t);
    if d0 > 0.25 * th0 {
        return Err(conflict(i0, j0, d0));
    }
    values[i0][j0] = v0;
    let branch = ((v0 - base[i0][j0]) / th0).round() as i64;

    let sweep = |values: &mut Vec<Vec<f64>>, i: usize, start: usize| -> Result<(), ShiftError> {
        let th = grid.thetas[i];
        for step in 1..na {
            let j = (start + step) % na;
            let prev = values[i][(j + na - 1) % na];
            let pred = if step >= 2 { 2.0 * prev - values[i][(j + na - 2) % na] } else { prev };
            let (v, d) = nearest_branch(base[i][j], th, pred);
            if d > 0.25 * th {
                return Err(conflict(i, j, d));
            }
            values[i][j] = v;
        }
        // the lift must close up around the orbit family
        let last = values[i][(start + na - 1) % na];
        let (v, d) = nearest_branch(base[i][start], th, last);
        if (v - values[i][start]).abs() > 0.5 * th {
            return Err(conflict(i, start, d));
        }
        Ok(())
    };
    sweep(&mut values, i0, j0)?;

    let order: Vec<(usize, usize, Option<usize>)> = (i0 + 1..nl)
        .map(|i| (i, i - 1, if i >= i0 + 2 { Some(i - 2) } else { None }))
        .chain((0..i0).rev().map(|i| (i, i + 1, if i + 2 <= i0 { Some(i + 2) } else { None })))
        .collect();
    let levels = &grid.spec.levels;
    for (i, p, pp) in order {
        let th = grid.thetas[i];
        for j in 0..na {
            let pred = match pp {
                Some(q) => {
                    let slope = (values[p][j] - values[q][j]) / (levels[p] - levels[q]);
                    values[p][j] + slope * (levels[i] - levels[p])
                }
                None => values[p][j],
            };
            let (v, d) = nearest_branch(base[i][j], th, pred);
            if d > 0.25 * th {
                return Err(conflict(i, j, d));
            }
            values[i][j] = v;
        }
        for j in 0..na {
            let d = (values[i][(j + 1) % na] - values[i][j]).abs();
            if d >= 0.5 * th {
                return Err(conflict(i, j, d));
            }
        }
    }
    Ok(ShiftFunctionSample { grid: grid.clone(), values, anchor_node: (i0, j0), branch, residual })
}

/// The integer `n` with `s1 - s2 = n θ` at every node.
pub fn branch_difference(s1: &ShiftFunctionSample, s2: &ShiftFunctionSample) -> Result<i64, ShiftError> {
    if !s1.grid.same_as(&s2.grid) {
        return Err(ShiftError::GridMismatch);
    }
    let ratios: Vec<f64> = s1
        .values
        .iter()
        .zip(&s2.values)
        .zip(&s1.grid.thetas)
        .flat_map(|((r1, r2), th)| r1.iter().zip(r2).map(move |(a, b)| (a - b) / th))
        .collect();
    let n = ratios[0].round();
    if let Some(bad) = ratios.iter().find(|r| (*r - n).abs() > 1e-6) {
        return Err(ShiftError::NotMultiple { ratio: *bad });
    }
    Ok(n as i64)
}

/// Trigonometric interpolation in angle, polynomial in `s = level^(1/d)`.
pub struct SampledShift {
    sample: ShiftFunctionSample,
    integral: IntegralSpec,
    coords: Vec<f64>,
    coeffs: Vec<Vec<(f64, f64)>>,
    inv_degree: f64,
}

const WINDOW: usize = 6;

impl SampledShift {
    pub fn new(sample: ShiftFunctionSample, integral: &IntegralSpec) -> Self {
        let inv_degree = integral.f_hat().homogeneous_degree().filter(|d| *d > 0).map_or(1.0, |d| 1.0 / d as f64);
        let coords = sample.grid.spec.levels.iter().map(|c| c.powf(inv_degree)).collect();
        let coeffs = sample.values.iter().map(|row| dft(row)).collect();
        Self { sample, integral: integral.clone(), coords, coeffs, inv_degree }
    }

    pub fn sample(&self) -> &ShiftFunctionSample {
        &self.sample
    }

    fn row_eval(&self, i: usize, phi: f64) -> f64 {
        trig_eval(&self.coeffs[i], self.sample.grid.n_angles(), phi, false)
    }

    pub fn eval(&self, z: Point) -> f64 {
        let s = self.integral.level(z).max(0.0).powf(self.inv_degree);
        let phi = z.angle();
        let n = self.coords.len();
        let w = WINDOW.min(n);
        let k = self.coords.partition_point(|c| *c < s);
        let lo = k.saturating_sub(w / 2).min(n - w);
        let idx: Vec<usize> = (lo..lo + w).collect();
        if let Some(&i) = idx.iter().find(|&&i| self.coords[i] == s) {
            return self.row_eval(i, phi);
        }
        idx.iter()
            .map(|&i| {
                let basis: f64 = idx
                    .iter()
                    .filter(|&&m| m != i)
                    .map(|&m| (s - self.coords[m]) / (self.coords[i] - self.coords[m]))
                    .product();
                basis * self.row_eval(i, phi)
            })
            .sum()
    }

    /// `F(Λ)` at node `(i, j)` from the spectral angular derivative.
    pub fn lie_derivative_at_node(&self, fs: &FieldSpec, i: usize, j: usize) -> f64 {
        let z = self.sample.grid.nodes[i][j];
        let phi = self.sample.grid.spec.angle(j);
        let dphi_dt = z.cross(fs.eval(z)) / z.norm2();
        trig_eval(&self.coeffs[i], self.sample.grid.n_angles(), phi, true) * dphi_dt
    }
}

/// Real DFT coefficients `(a_k, b_k)` for `k = 0..=n/2`.
fn dft(v: &[f64]) -> Vec<(f64, f64)> {
    let n = v.len();
    (0..=n / 2)
        .map(|k| {
            let (mut a, mut b) = (0.0, 0.0);
            for (j, x) in v.iter().enumerate() {
                let ang = TAU * ((k * j) % n) as f64 / n as f64;
                a += x * ang.cos();
                b += x * ang.sin();
            }
            (2.0 * a / n as f64, 2.0 * b / n as f64)
        })
        .collect()
}

fn trig_eval(c: &[(f64, f64)], n: usize, phi: f64, derivative: bool) -> f64 {
    let half = n / 2;
    let mut sum = if derivative { 0.0 } else { 0.5 * c[0].0 };
    for (k, &(a, b)) in c.iter().enumerate().skip(1) {
        let kf = k as f64;
        let (s, co) = (kf * phi).sin_cos();
        let w = if n.is_multiple_of(2) && k == half { 0.5 } else { 1.0 };
        let bk = if n.is_multiple_of(2) && k == half { 0.0 } else { b };
        sum += if derivative { w * kf * (bk * co - a * s) } else { w * (a * co + bk * s) };
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trig_interpolation_is_exact_for_band_limited_data() {
        let n = 16;
        let f = |p: f64| 0.3 + (2.0 * p).cos() - 0.5 * (3.0 * p).sin() + 0.1 * (8.0 * p).cos();
        let df = |p: f64| -2.0 * (2.0 * p).sin() - 1.5 * (3.0 * p).cos() - 0.8 * (8.0 * p).sin();
        let v: Vec<f64> = (0..n).map(|j| f(TAU * j as f64 / n as f64)).collect();
        let c = dft(&v);
        for j in 0..n {
            let p = TAU * j as f64 / n as f64;
            assert!((trig_eval(&c, n, p, false) - f(p)).abs() < 1e-13);
        }
        for p in [0.1, 1.7, 4.0] {
            // the Nyquist term is only determined at the nodes
            let g = |p: f64| f(p) - 0.1 * (8.0 * p).cos();
            let dg = |p: f64| df(p) + 0.8 * (8.0 * p).sin();
            let c2 = dft(&(0..n).map(|j| g(TAU * j as f64 / n as f64)).collect::<Vec<_>>());
            assert!((trig_eval(&c2, n, p, false) - g(p)).abs() < 1e-13);
            assert!((trig_eval(&c2, n, p, true) - dg(p)).abs() < 1e-12);
        }
    }
}

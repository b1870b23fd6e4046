use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::geom::Point;

/// A real 2×2 matrix: a Jacobi matrix at the origin, a linearization, or
/// an exponential of one. Row-major.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Jet2(pub [[f64; 2]; 2]);

impl Jet2 {
    pub const IDENTITY: Jet2 = Jet2([[1.0, 0.0], [0.0, 1.0]]);
    pub const ZERO: Jet2 = Jet2([[0.0, 0.0], [0.0, 0.0]]);

    pub fn new(a11: f64, a12: f64, a21: f64, a22: f64) -> Self {
        Jet2([[a11, a12], [a21, a22]])
    }

    pub fn rotation(angle: f64) -> Self {
        let (s, c) = angle.sin_cos();
        Jet2::new(c, -s, s, c)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[i][j]
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn scale(&self, s: f64) -> Self {
        let m = self.0;
        Jet2([[s * m[0][0], s * m[0][1]], [s * m[1][0], s * m[1][1]]])
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let m = self.0;
        Some(Jet2::new(m[1][1], -m[0][1], -m[1][0], m[0][0]).scale(1.0 / d))
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.0.iter().flatten().fold(0.0, |a: f64, v| a.max(v.abs()))
    }

    /// Frobenius inner product.
    pub fn inner(&self, o: &Jet2) -> f64 {
        (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| self.0[i][j] * o.0[i][j]).sum()
    }

    pub fn dist(&self, o: &Jet2) -> f64 {
        (*self - *o).max_abs()
    }

    pub fn apply(&self, p: Point) -> Point {
        let m = self.0;
        Point::new(m[0][0] * p.x + m[0][1] * p.y, m[1][0] * p.x + m[1][1] * p.y)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        let (a, b) = (self.0, o.0);
        Jet2([[a[0][0] + b[0][0], a[0][1] + b[0][1]], [a[1][0] + b[1][0], a[1][1] + b[1][1]]])
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        self + o.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        let (a, b) = (self.0, o.0);
        let mut c = [[0.0; 2]; 2];
        for (i, row) in c.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = a[i][0] * b[0][j] + a[i][1] * b[1][j];
            }
        }
        Jet2(c)
    }
}

impl fmt::Display for Jet2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.0;
        write!(f, "(({}, {}), ({}, {}))", m[0][0], m[0][1], m[1][0], m[1][1])
    }
}

// Padé(6,6) numerator coefficients; the denominator alternates signs.
const PADE6: [f64; 7] = [
    1.0,
    1.0 / 2.0,
    5.0 / 44.0,
    1.0 / 66.0,
    1.0 / 792.0,
    1.0 / 15840.0,
    1.0 / 665280.0,
];

/// `exp(tau * nabla)`.
///
/// Nilpotent and antisymmetric generators use their closed forms
/// (`I + A` and a rotation). Everything else goes through scaling and
/// squaring around a (6,6) Padé approximant.
pub fn jet_of_flow_map(nabla: &Jet2, tau: f64) -> Jet2 {
    let a = nabla.scale(tau);
    let m = a.0;
    if m[0][0] == 0.0 && m[1][1] == 0.0 && (m[0][1] == 0.0 || m[1][0] == 0.0) {
        // strictly triangular, so A^2 = 0
        return Jet2::IDENTITY + a;
    }
    if m[0][0] == 0.0 && m[1][1] == 0.0 && m[0][1] == -m[1][0] {
        return Jet2::rotation(m[1][0]);
    }
    expm_pade(&a)
}

pub(crate) fn expm_pade(a: &Jet2) -> Jet2 {
    let norm = a.max_abs() * 2.0;
    let s = if norm > 0.5 { (norm / 0.5).log2().ceil() as i32 } else { 0 };
    let b = a.scale(0.5f64.powi(s));
    let mut num = Jet2::ZERO;
    let mut den = Jet2::ZERO;
    let mut pow = Jet2::IDENTITY;
    for (k, c) in PADE6.iter().enumerate() {
        let term = pow.scale(*c);
        num = num + term;
        den = if k % 2 == 0 { den + term } else { den - term };
        pow = pow * b;
    }
    let mut r = den.inverse().expect("Padé denominator is invertible for ‖B‖ ≤ 1/2") * num;
    for _ in 0..s {
        r = r * r;
    }
    r
}

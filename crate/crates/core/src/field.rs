//! Topological-center vector fields with polynomial components.
//!
//! The constructive family is the reduced Hamiltonian field of a product
//! of positive definite quadratic forms `f = ∏ Q_j^{β_j}`: with
//! `D = ∏ Q_j^{β_j - 1}` the field is `F = (-f_y / D, f_x / D)`, and
//! `f / ε` is a first integral normalized to `1` on the boundary of
//! `V = f⁻¹[0, ε]`.

use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{gcd_poly, CompiledPoly, ExprError, Poly2, Rational, Var};
use crate::geom::Point;
use crate::jet::Jet2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FieldError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("quadratic form ({a})x^2 + 2({b})xy + ({c})y^2 is not positive definite")]
    NotPositiveDefinite { a: String, b: String, c: String },
    #[error("factored polynomial needs at least one factor")]
    NoFactors,
    #[error("exponent of factor {index} must be at least 1")]
    BadExponent { index: usize },
    #[error("factors {0} and {1} are proportional")]
    ProportionalFactors(usize, usize),
    #[error("polynomial division by the formula divisor was not exact")]
    DivisionNotExact,
    #[error("formula divisor {formula} disagrees with gcd(f_x, f_y) = {gcd}")]
    GcdMismatch { formula: String, gcd: String },
    #[error("field does not vanish at the origin")]
    NotSingularAtOrigin,
    #[error("integral must vanish at the origin")]
    IntegralNotZeroAtOrigin,
    #[error("level epsilon must be positive")]
    NonPositiveEpsilon,
    #[error("ray root for level {level} at angle {angle} did not converge")]
    NoConvergence { level: f64, angle: f64 },
}

/// `Q(x, y) = a x² + 2b xy + c y²`, positive definite.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadForm {
    a: Rational,
    b: Rational,
    c: Rational,
}

impl QuadForm {
    pub fn new(a: Rational, b: Rational, c: Rational) -> Result<Self, FieldError> {
        if !a.is_positive() || !(&a * &c - &b * &b).is_positive() {
            return Err(FieldError::NotPositiveDefinite { a: a.to_string(), b: b.to_string(), c: c.to_string() });
        }
        Ok(Self { a, b, c })
    }

    pub fn from_ints(a: i64, b: i64, c: i64) -> Result<Self, FieldError> {
        let r = |v: i64| Rational::from_integer(v.into());
        Self::new(r(a), r(b), r(c))
    }

    pub fn coefficients(&self) -> (&Rational, &Rational, &Rational) {
        (&self.a, &self.b, &self.c)
    }

    pub fn to_poly(&self) -> Poly2 {
        let two = Rational::from_integer(2.into());
        Poly2::from_terms([
            ((2, 0), self.a.clone()),
            ((1, 1), &two * &self.b),
            ((0, 2), self.c.clone()),
        ])
    }

    fn proportional_to(&self, o: &QuadForm) -> bool {
        // (a, b, c) ∥ (a', b', c') iff all 2x2 minors vanish
        (&self.a * &o.b == &self.b * &o.a) && (&self.a * &o.c == &self.c * &o.a) && (&self.b * &o.c == &self.c * &o.b)
    }
}

/// `f = ∏ Q_j^{β_j}` with pairwise non-proportional positive definite `Q_j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HomogFactoredPoly {
    factors: Vec<(QuadForm, u32)>,
}

impl HomogFactoredPoly {
    pub fn new(factors: Vec<(QuadForm, u32)>) -> Result<Self, FieldError> {
        if factors.is_empty() {
            return Err(FieldError::NoFactors);
        }
        for (i, (_, beta)) in factors.iter().enumerate() {
            if *beta == 0 {
                return Err(FieldError::BadExponent { index: i });
            }
        }
        for i in 0..factors.len() {
            for j in i + 1..factors.len() {
                if factors[i].0.proportional_to(&factors[j].0) {
                    return Err(FieldError::ProportionalFactors(i, j));
                }
            }
        }
        Ok(Self { factors })
    }

    pub fn factors(&self) -> &[(QuadForm, u32)] {
        &self.factors
    }

    pub fn k(&self) -> usize {
        self.factors.len()
    }

    /// The expanded product `f`.
    pub fn expand(&self) -> Poly2 {
        self.factors.iter().fold(Poly2::one(), |acc, (q, beta)| &acc * &q.to_poly().pow(*beta))
    }

    /// `D = ∏ Q_j^{β_j - 1}`.
    pub fn divisor(&self) -> Poly2 {
        self.factors.iter().fold(Poly2::one(), |acc, (q, beta)| &acc * &q.to_poly().pow(beta - 1))
    }

    pub fn degree(&self) -> u32 {
        2 * self.factors.iter().map(|(_, b)| b).sum::<u32>()
    }
}

/// Normal-form case of the linear part at the singular point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CenterCase {
    #[serde(rename = "NF1_ZeroLinear")]
    Nf1ZeroLinear,
    #[serde(rename = "NF2_NilpotentNonzero")]
    Nf2NilpotentNonzero,
    #[serde(rename = "NF3_NonDegenerate")]
    Nf3NonDegenerate,
    #[serde(rename = "NotTC")]
    NotTc,
}

impl CenterCase {
    pub fn is_degenerate(self) -> bool {
        matches!(self, CenterCase::Nf1ZeroLinear | CenterCase::Nf2NilpotentNonzero)
    }
}

impl fmt::Display for CenterCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CenterCase::Nf1ZeroLinear => "NF1_ZeroLinear",
            CenterCase::Nf2NilpotentNonzero => "NF2_NilpotentNonzero",
            CenterCase::Nf3NonDegenerate => "NF3_NonDegenerate",
            CenterCase::NotTc => "NotTC",
        })
    }
}

/// A polynomial vector field `F = F1 ∂x + F2 ∂y` with `F(O) = 0`.
#[derive(Clone)]
pub struct FieldSpec {
    f1: Poly2,
    f2: Poly2,
    c1: CompiledPoly,
    c2: CompiledPoly,
    nabla: Jet2,
    case: CenterCase,
}

impl fmt::Debug for FieldSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FieldSpec")
            .field("F1", &self.f1.to_string())
            .field("F2", &self.f2.to_string())
            .field("case", &self.case)
            .finish()
    }
}

impl FieldSpec {
    pub fn from_components(f1: Poly2, f2: Poly2) -> Result<Self, FieldError> {
        if !f1.coeff(0, 0).is_zero() || !f2.coeff(0, 0).is_zero() {
            return Err(FieldError::NotSingularAtOrigin);
        }
        let nabla = exact_linear_part(&f1, &f2);
        let case = classify_center(&nabla);
        Ok(Self { c1: f1.compile(), c2: f2.compile(), f1, f2, nabla, case })
    }

    pub fn parse(f1: &str, f2: &str) -> Result<Self, FieldError> {
        Self::from_components(crate::expr::parse_poly(f1)?, crate::expr::parse_poly(f2)?)
    }

    /// Textual identity `(F1, F2)`.
    pub fn id(&self) -> String {
        format!("({}, {})", self.f1, self.f2)
    }

    pub fn f1(&self) -> &Poly2 {
        &self.f1
    }

    pub fn f2(&self) -> &Poly2 {
        &self.f2
    }

    pub fn nabla(&self) -> Jet2 {
        self.nabla
    }

    pub fn case(&self) -> CenterCase {
        self.case
    }

    #[inline]
    pub fn eval(&self, z: Point) -> Point {
        Point::new(self.c1.eval(z.x, z.y), self.c2.eval(z.x, z.y))
    }

    /// Common total degree when both components are homogeneous of it.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        match (self.f1.homogeneous_degree(), self.f2.homogeneous_degree()) {
            (Some(a), Some(b)) if a == b => Some(a),
            (Some(a), None) if self.f2.is_zero() => Some(a),
            (None, Some(b)) if self.f1.is_zero() => Some(b),
            _ => None,
        }
    }

    /// Lie derivative `F1 ∂p/∂x + F2 ∂p/∂y` of a polynomial.
    pub fn lie_derivative_poly(&self, p: &Poly2) -> Poly2 {
        &(&self.f1 * &p.diff(Var::X)) + &(&self.f2 * &p.diff(Var::Y))
    }

    /// Whether `p` is a first integral, decided symbolically.
    pub fn is_first_integral(&self, p: &Poly2) -> bool {
        self.lie_derivative_poly(p).is_zero()
    }

    /// Whether the components share no non-constant factor.
    pub fn components_coprime(&self) -> Result<bool, FieldError> {
        Ok(gcd_poly(&self.f1, &self.f2)?.is_constant())
    }
}

fn exact_linear_part(f1: &Poly2, f2: &Poly2) -> Jet2 {
    let v = |p: &Poly2, a, b| p.coeff(a, b).to_f64().unwrap_or(f64::NAN);
    Jet2::new(v(f1, 1, 0), v(f1, 0, 1), v(f2, 1, 0), v(f2, 0, 1))
}

/// Reduced Hamiltonian field of a factored homogeneous polynomial.
pub fn reduced_hamiltonian(hp: &HomogFactoredPoly) -> Result<FieldSpec, FieldError> {
    let f = hp.expand();
    let (fx, fy) = (f.diff(Var::X), f.diff(Var::Y));
    let d = hp.divisor();
    let g = gcd_poly(&fx, &fy)?;
    if !g.is_associate(&d) {
        return Err(FieldError::GcdMismatch { formula: d.to_string(), gcd: g.to_string() });
    }
    let f1 = -fy.div_exact(&d)?.ok_or(FieldError::DivisionNotExact)?;
    let f2 = fx.div_exact(&d)?.ok_or(FieldError::DivisionNotExact)?;
    FieldSpec::from_components(f1, f2)
}

/// Exact 2×2 matrix of degree-one coefficients.
pub fn linearization(fs: &FieldSpec) -> Jet2 {
    fs.nabla()
}

/// Tolerance-free classification is unusable for conjugated float jets,
/// so comparisons are relative to the jet's magnitude.
pub fn classify_center(nabla: &Jet2) -> CenterCase {
    classify_center_with_tol(nabla, 1e-12)
}

pub fn classify_center_with_tol(nabla: &Jet2, rel_tol: f64) -> CenterCase {
    let scale = nabla.max_abs();
    if scale == 0.0 {
        return CenterCase::Nf1ZeroLinear;
    }
    let tr = nabla.trace();
    let det = nabla.det();
    if tr.abs() > rel_tol * scale {
        return CenterCase::NotTc;
    }
    if det.abs() <= rel_tol * scale * scale {
        CenterCase::Nf2NilpotentNonzero
    } else if det > 0.0 {
        CenterCase::Nf3NonDegenerate
    } else {
        CenterCase::NotTc
    }
}

/// Normalized first strong integral `f̂ = f / ε` on `V = f⁻¹[0, ε]`.
#[derive(Clone)]
pub struct IntegralSpec {
    f_hat: Poly2,
    epsilon: Rational,
    level: CompiledPoly,
    dx: CompiledPoly,
    dy: CompiledPoly,
    degree: Option<u32>,
}

impl fmt::Debug for IntegralSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("IntegralSpec")
            .field("f_hat", &self.f_hat.to_string())
            .field("epsilon", &self.epsilon.to_string())
            .finish()
    }
}

impl IntegralSpec {
    /// Wraps an already normalized integral (`f̂ = 1` on the domain boundary).
    pub fn new(f_hat: Poly2) -> Result<Self, FieldError> {
        Self::with_epsilon(f_hat, Rational::one())
    }

    fn with_epsilon(f_hat: Poly2, epsilon: Rational) -> Result<Self, FieldError> {
        if !f_hat.coeff(0, 0).is_zero() {
            return Err(FieldError::IntegralNotZeroAtOrigin);
        }
        Ok(Self {
            level: f_hat.compile(),
            dx: f_hat.diff(Var::X).compile(),
            dy: f_hat.diff(Var::Y).compile(),
            degree: f_hat.homogeneous_degree(),
            f_hat,
            epsilon,
        })
    }

    pub fn f_hat(&self) -> &Poly2 {
        &self.f_hat
    }

    pub fn epsilon(&self) -> &Rational {
        &self.epsilon
    }

    #[inline]
    pub fn level(&self, z: Point) -> f64 {
        self.level.eval(z.x, z.y)
    }

    #[inline]
    pub fn gradient(&self, z: Point) -> Point {
        Point::new(self.dx.eval(z.x, z.y), self.dy.eval(z.x, z.y))
    }

    pub fn contains(&self, z: Point) -> bool {
        self.level(z) <= 1.0
    }

    /// Point on the ray at `angle` where `f̂ = level`.
    pub fn ray_point(&self, level: f64, angle: f64) -> Result<Point, FieldError> {
        let fail = || FieldError::NoConvergence { level, angle };
        if level == 0.0 {
            return Ok(Point::default());
        }
        if !(level > 0.0) || !level.is_finite() {
            return Err(fail());
        }
        let u = Point::polar(1.0, angle);
        let g = |r: f64| self.level(r * u) - level;
        let dg = |r: f64| self.gradient(r * u).dot(u);
        // homogeneous integrals give the root directly
        let mut r = match self.degree {
            Some(d) if d > 0 && self.level(u) > 0.0 => (level / self.level(u)).powf(1.0 / d as f64),
            _ => 1.0,
        };
        let (mut lo, mut hi) = (0.0, r);
        let mut expand = 0;
        while g(hi) < 0.0 {
            lo = hi;
            hi *= 2.0;
            expand += 1;
            if expand > 80 {
                return Err(fail());
            }
        }
        if g(r) > 0.0 {
            hi = r;
        } else {
            lo = lo.max(r);
        }
        for _ in 0..200 {
            let (gr, dgr) = (g(r), dg(r));
            if gr == 0.0 {
                break;
            }
            if gr < 0.0 {
                lo = lo.max(r);
            } else {
                hi = hi.min(r);
            }
            let mut next = r - gr / dgr;
            if !(next > lo && next < hi) || !next.is_finite() {
                next = 0.5 * (lo + hi);
            }
            let done = (next - r).abs() <= 2.0 * f64::EPSILON * r;
            r = next;
            if done {
                break;
            }
        }
        if g(r).abs() > 1e-12 * level.max(1.0) {
            return Err(fail());
        }
        Ok(r * u)
    }

    /// Smallest `|∇f̂|` over the given points, skipping the origin.
    pub fn min_gradient_norm(&self, points: &[Point]) -> f64 {
        points
            .iter()
            .filter(|p| !p.is_origin())
            .map(|p| self.gradient(*p).norm())
            .fold(f64::INFINITY, f64::min)
    }
}

pub fn strong_integral(hp: &HomogFactoredPoly, epsilon: &Rational) -> Result<IntegralSpec, FieldError> {
    if !epsilon.is_positive() {
        return Err(FieldError::NonPositiveEpsilon);
    }
    let f_hat = hp.expand().scale(&epsilon.recip());
    IntegralSpec::with_epsilon(f_hat, epsilon.clone())
}

/// Point of `f⁻¹(ε)` on the ray at `angle`.
pub fn boundary_point(hp: &HomogFactoredPoly, epsilon: &Rational, angle: f64) -> Result<Point, FieldError> {
    strong_integral(hp, epsilon)?.ray_point(1.0, angle)
}

/// Canonical example fields, shared by tests, the CLI bundle and the
/// verification suite.
pub mod examples {
    use super::*;

    /// `x² + y²`, `β = 1`: reduced field `(-2y, 2x)`, case NF3.
    pub fn circle() -> HomogFactoredPoly {
        HomogFactoredPoly::new(vec![(QuadForm::from_ints(1, 0, 1).unwrap(), 1)]).unwrap()
    }

    /// `(x² + y²)²`: reduced field `(-4y, 4x)`.
    pub fn circle_squared() -> HomogFactoredPoly {
        HomogFactoredPoly::new(vec![(QuadForm::from_ints(1, 0, 1).unwrap(), 2)]).unwrap()
    }

    /// `(x² + y²)(x² + 2y²)`: `k = 2`, cubic reduced field, case NF1.
    pub fn two_ellipses() -> HomogFactoredPoly {
        HomogFactoredPoly::new(vec![
            (QuadForm::from_ints(1, 0, 1).unwrap(), 1),
            (QuadForm::from_ints(1, 0, 2).unwrap(), 1),
        ])
        .unwrap()
    }

    /// Unit-speed rotation `(-y, x)`.
    pub fn rotation() -> FieldSpec {
        FieldSpec::parse("-y", "x").unwrap()
    }

    /// Formal nilpotent linear part `(a y, 0)`; not a center, used for jet-level checks.
    pub fn formal_nilpotent(a: i64) -> FieldSpec {
        FieldSpec::parse(&format!("{a}*y"), "0").unwrap()
    }

    /// `x² + y²` as a normalized integral of the unit disk.
    pub fn unit_disk() -> IntegralSpec {
        strong_integral(&circle(), &Rational::one()).unwrap()
    }
}

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ExprError;

pub type Rational = BigRational;

/// Variable selector for partial derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Var {
    X,
    Y,
}

/// Exponent pair `(deg_x, deg_y)` of a monomial.
pub type Monomial = (u32, u32);

/// Graded-lex comparison with `x > y`.
pub fn grlex_cmp(a: &Monomial, b: &Monomial) -> Ordering {
    (a.0 + a.1).cmp(&(b.0 + b.1)).then(a.0.cmp(&b.0))
}

/// Exact bivariate polynomial with rational coefficients.
///
/// Zero coefficients are never stored, so structural equality is
/// polynomial equality.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Poly2 {
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Self::monomial(c, 0, 0)
    }

    pub fn from_int(c: i64) -> Self {
        Self::constant(Rational::from_integer(BigInt::from(c)))
    }

    pub fn x() -> Self {
        Self::monomial(Rational::one(), 1, 0)
    }

    pub fn y() -> Self {
        Self::monomial(Rational::one(), 0, 1)
    }

    pub fn monomial(c: Rational, dx: u32, dy: u32) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert((dx, dy), c);
        }
        Self { terms }
    }

    /// Builds a polynomial from arbitrary (possibly repeated, possibly zero) terms.
    pub fn from_terms<I>(it: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, Rational)>,
    {
        let mut p = Self::zero();
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(m).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|&(a, b)| a == 0 && b == 0)
    }

    pub fn coeff(&self, dx: u32, dy: u32) -> Rational {
        self.terms.get(&(dx, dy)).cloned().unwrap_or_else(Rational::zero)
    }

    /// Total degree; `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|&(a, b)| a + b).max()
    }

    pub fn degree_in(&self, var: Var) -> Option<u32> {
        self.terms
            .keys()
            .map(|&(a, b)| match var {
                Var::X => a,
                Var::Y => b,
            })
            .max()
    }

    /// True when every term has the same total degree `d`.
    pub fn homogeneous_degree(&self) -> Option<u32> {
        let d = self.degree()?;
        self.terms
            .keys()
            .all(|&(a, b)| a + b == d)
            .then_some(d)
    }

    /// Leading term under graded-lex order.
    pub fn leading_term(&self) -> Option<(Monomial, &Rational)> {
        self.terms
            .iter()
            .max_by(|a, b| grlex_cmp(a.0, b.0))
            .map(|(m, c)| (*m, c))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Self {
            terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect(),
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Formal partial derivative.
    pub fn diff(&self, var: Var) -> Self {
        let it = self.terms.iter().filter_map(|(&(a, b), c)| {
            let (k, m) = match var {
                Var::X => (a, (a.wrapping_sub(1), b)),
                Var::Y => (b, (a, b.wrapping_sub(1))),
            };
            (k > 0).then(|| (m, c * Rational::from_integer(BigInt::from(k))))
        });
        Self::from_terms(it)
    }

    /// Exact value at a rational point.
    pub fn eval_exact(&self, x: &Rational, y: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for (&(a, b), c) in &self.terms {
            acc += c * num_traits::pow(x.clone(), a as usize) * num_traits::pow(y.clone(), b as usize);
        }
        acc
    }

    /// Floating-point evaluation (nested Horner in y then x).
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        CompiledPoly::new(self).eval(x, y)
    }

    /// Rational content: gcd of numerators over lcm of denominators, positive.
    pub fn content(&self) -> Rational {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for c in self.terms.values() {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
        if num.is_zero() {
            return Rational::one();
        }
        Rational::new(num, den)
    }

    /// Associate with content 1 and positive graded-lex leading coefficient.
    pub fn primitive(&self) -> Self {
        let Some((_, lc)) = self.leading_term() else {
            return Self::zero();
        };
        let mut c = self.content();
        if lc.is_negative() {
            c = -c;
        }
        self.scale(&c.recip())
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly2) -> Result<Option<Poly2>, ExprError> {
        let Some((dm, dc)) = d.leading_term() else {
            return Err(ExprError::DivisionByZero);
        };
        let dc = dc.clone();
        let mut q = Poly2::zero();
        let mut r = self.clone();
        while let Some((rm, rc)) = r.leading_term() {
            if rm.0 < dm.0 || rm.1 < dm.1 {
                return Ok(None);
            }
            let t = Poly2::monomial(rc / &dc, rm.0 - dm.0, rm.1 - dm.1);
            r = &r - &(&t * d);
            q = &q + &t;
        }
        Ok(Some(q))
    }

    pub fn divides(&self, p: &Poly2) -> bool {
        matches!(p.div_exact(self), Ok(Some(_)))
    }

    /// Whether `self` equals `other` up to a nonzero rational factor.
    pub fn is_associate(&self, other: &Poly2) -> bool {
        self.primitive() == other.primitive()
    }

    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly::new(self)
    }
}

impl fmt::Debug for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Poly2({self})")
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, a: u32, b: u32) -> fmt::Result {
    let mut first = true;
    for (name, e) in [("x", a), ("y", b)] {
        if e == 0 {
            continue;
        }
        if !first {
            f.write_str("*")?;
        }
        first = false;
        if e == 1 {
            f.write_str(name)?;
        } else {
            write!(f, "{name}^{e}")?;
        }
    }
    Ok(())
}

/// Canonical printer: terms in descending graded-lex order, output is
/// accepted by [`parse_poly`](super::parse_poly).
impl fmt::Display for Poly2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        let mut ms: Vec<_> = self.terms.iter().collect();
        ms.sort_by(|a, b| grlex_cmp(b.0, a.0));
        for (i, (&(a, b), c)) in ms.into_iter().enumerate() {
            let neg = c.is_negative();
            match (i, neg) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let mag = c.abs();
            let constant = a == 0 && b == 0;
            if constant || !mag.is_one() {
                if mag.is_integer() {
                    write!(f, "{}", mag.numer())?;
                } else {
                    write!(f, "{}/{}", mag.numer(), mag.denom())?;
                }
                if !constant {
                    f.write_str("*")?;
                }
            }
            write_monomial(f, a, b)?;
        }
        Ok(())
    }
}

impl<'a> Add<&'a Poly2> for &'a Poly2 {
    type Output = Poly2;
    fn add(self, rhs: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, c.clone());
        }
        out
    }
}

impl<'a> Sub<&'a Poly2> for &'a Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: &Poly2) -> Poly2 {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(*m, -c.clone());
        }
        out
    }
}

impl<'a> Mul<&'a Poly2> for &'a Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: &Poly2) -> Poly2 {
        let mut out = Poly2::zero();
        for (&(a1, b1), c1) in &self.terms {
            for (&(a2, b2), c2) in &rhs.terms {
                out.add_term((a1 + a2, b1 + b2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        Poly2 {
            terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $f:ident) => {
        impl $tr<Poly2> for Poly2 {
            type Output = Poly2;
            fn $f(self, rhs: Poly2) -> Poly2 {
                (&self).$f(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        -&self
    }
}

/// Dense `f64` copy of a [`Poly2`] for repeated numeric evaluation.
///
/// `rows[i][j]` is the coefficient of `x^i y^j`.
#[derive(Debug, Clone, Default)]
pub struct CompiledPoly {
    rows: Vec<Vec<f64>>,
}

impl CompiledPoly {
    pub fn new(p: &Poly2) -> Self {
        let nx = p.degree_in(Var::X).map_or(0, |d| d as usize + 1);
        let mut rows = vec![Vec::new(); nx];
        for (&(a, b), c) in p.terms() {
            let row = &mut rows[a as usize];
            if row.len() <= b as usize {
                row.resize(b as usize + 1, 0.0);
            }
            row[b as usize] = c.to_f64().unwrap_or(f64::NAN);
        }
        Self { rows }
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let mut acc = 0.0;
        for row in self.rows.iter().rev() {
            let mut inner = 0.0;
            for c in row.iter().rev() {
                inner = inner * y + c;
            }
            acc = acc * x + inner;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse_poly;

    fn p(s: &str) -> Poly2 {
        parse_poly(s).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(p("x^2+y^2").eval(3.0, 4.0), 25.0);
        assert_eq!(Poly2::zero().eval(1.7, -2.0), 0.0);
        assert_eq!(p("x^2*y - y^3").eval(1.0, 2.0), -6.0);
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(p("x^2*y").diff(Var::X), p("2*x*y"));
        assert!(p("x^2").diff(Var::Y).is_zero());
        assert_eq!(p("(x^2+y^2)^2").diff(Var::X), p("4*x*(x^2+y^2)"));
    }

    #[test]
    fn printer_is_canonical() {
        assert_eq!(p("-1/3 + y^2*4*x").to_string(), "4*x*y^2 - 1/3");
        assert_eq!(p("y - x").to_string(), "-x + y");
        assert_eq!(p("x - x").to_string(), "0");
        assert_eq!(p("-(x^2*y^3)").to_string(), "-x^2*y^3");
    }

    #[test]
    fn exact_division() {
        let f = p("(x^2+y^2)*(x - 2*y)");
        assert_eq!(f.div_exact(&p("x^2+y^2")).unwrap(), Some(p("x - 2*y")));
        assert_eq!(f.div_exact(&p("x + y")).unwrap(), None);
        assert!(f.div_exact(&Poly2::zero()).is_err());
    }

    #[test]
    fn primitive_normalizes_sign_and_content() {
        assert_eq!(p("-6*x + 4/3*y").primitive(), p("9*x - 2*y"));
        assert_eq!(p("-2").primitive(), Poly2::one());
    }

    #[test]
    fn homogeneity() {
        assert_eq!(p("x^3 + x*y^2").homogeneous_degree(), Some(3));
        assert_eq!(p("x^3 + y").homogeneous_degree(), None);
    }
}

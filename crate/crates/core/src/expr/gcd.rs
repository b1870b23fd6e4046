//! Bivariate GCD over the rationals.
//!
//! A polynomial in `x, y` is viewed as a polynomial in `y` whose
//! coefficients live in `Q[x]`. The content (gcd of the `Q[x]`
//! coefficients) is handled with the univariate Euclidean algorithm; the
//! primitive parts go through a subresultant pseudo-remainder sequence so
//! that every division along the way is exact.

use num_traits::{One, Zero};

use super::poly::{Poly2, Rational};
use super::ExprError;

/// Dense univariate polynomial over Q, little-endian, no trailing zeros.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
struct UPoly(Vec<Rational>);

impl UPoly {
    fn trim(mut self) -> Self {
        while self.0.last().is_some_and(Zero::is_zero) {
            self.0.pop();
        }
        self
    }

    fn one() -> Self {
        UPoly(vec![Rational::one()])
    }

    fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    fn deg(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    fn lc(&self) -> &Rational {
        self.0.last().expect("nonzero polynomial")
    }

    fn sub(&self, o: &Self) -> Self {
        let n = self.0.len().max(o.0.len());
        let z = Rational::zero();
        UPoly((0..n).map(|i| self.0.get(i).unwrap_or(&z) - o.0.get(i).unwrap_or(&z)).collect()).trim()
    }

    fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return UPoly::default();
        }
        let mut out = vec![Rational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UPoly(out).trim()
    }

    fn scale(&self, c: &Rational) -> Self {
        UPoly(self.0.iter().map(|a| a * c).collect()).trim()
    }

    fn pow(&self, e: usize) -> Self {
        (0..e).fold(UPoly::one(), |acc, _| acc.mul(self))
    }

    fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let mut r = self.clone();
        if r.0.len() < d.0.len() {
            return (UPoly::default(), r);
        }
        let mut q = vec![Rational::zero(); r.0.len() - d.0.len() + 1];
        let inv = d.lc().recip();
        while !r.is_zero() && r.0.len() >= d.0.len() {
            let shift = r.deg() - d.deg();
            let c = r.lc() * &inv;
            for (i, b) in d.0.iter().enumerate() {
                let t = &c * b;
                r.0[shift + i] -= t;
            }
            q[shift] = c;
            r = r.trim();
        }
        (UPoly(q).trim(), r)
    }

    fn div_exact(&self, d: &Self) -> Self {
        let (q, r) = self.div_rem(d);
        debug_assert!(r.is_zero(), "inexact division in subresultant sequence");
        q
    }

    fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.lc().recip())
    }

    fn gcd(a: &Self, b: &Self) -> Self {
        let (mut a, mut b) = (a.clone(), b.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r;
        }
        a.monic()
    }
}

/// Polynomial in `y` with `Q[x]` coefficients; index is the `y` degree.
type RPoly = Vec<UPoly>;

fn to_rpoly(p: &Poly2) -> RPoly {
    let ny = p.degree_in(super::Var::Y).map_or(0, |d| d as usize + 1);
    let mut out = vec![UPoly::default(); ny];
    for (&(a, b), c) in p.terms() {
        let u = &mut out[b as usize].0;
        if u.len() <= a as usize {
            u.resize(a as usize + 1, Rational::zero());
        }
        u[a as usize] = c.clone();
    }
    out.into_iter().map(UPoly::trim).collect()
}

fn from_rpoly(r: &RPoly) -> Poly2 {
    Poly2::from_terms(r.iter().enumerate().flat_map(|(b, u)| {
        u.0.iter().enumerate().map(move |(a, c)| ((a as u32, b as u32), c.clone()))
    }))
}

fn rtrim(mut r: RPoly) -> RPoly {
    while r.last().is_some_and(UPoly::is_zero) {
        r.pop();
    }
    r
}

fn rdeg(r: &RPoly) -> usize {
    r.len().saturating_sub(1)
}

fn content(r: &RPoly) -> UPoly {
    r.iter().fold(UPoly::default(), |g, c| UPoly::gcd(&g, c))
}

fn div_coeffs(r: &RPoly, d: &UPoly) -> RPoly {
    r.iter().map(|c| c.div_exact(d)).collect()
}

/// `lc(b)^(deg a - deg b + 1) * a  mod  b` computed without leaving `Q[x][y]`.
fn prem(a: &RPoly, b: &RPoly) -> RPoly {
    let lcb = b.last().expect("nonzero divisor").clone();
    let mut r = a.clone();
    let mut k = (rdeg(a) + 1).saturating_sub(rdeg(b));
    while !r.is_empty() && rdeg(&r) >= rdeg(b) {
        let shift = rdeg(&r) - rdeg(b);
        let lcr = r.last().expect("nonempty").clone();
        for c in r.iter_mut() {
            *c = c.mul(&lcb);
        }
        for (i, bc) in b.iter().enumerate() {
            let t = lcr.mul(bc);
            r[shift + i] = r[shift + i].sub(&t);
        }
        r = rtrim(r);
        k -= 1;
    }
    let f = lcb.pow(k);
    rtrim(r.into_iter().map(|c| c.mul(&f)).collect())
}

/// Primitive part over `Q[x]` of the last nonzero subresultant remainder.
fn subresultant_gcd(a: RPoly, b: RPoly) -> RPoly {
    let (mut a, mut b) = if rdeg(&a) >= rdeg(&b) { (a, b) } else { (b, a) };
    let mut g = UPoly::one();
    let mut h = UPoly::one();
    loop {
        let delta = rdeg(&a) - rdeg(&b);
        let r = prem(&a, &b);
        if r.is_empty() {
            break;
        }
        if rdeg(&r) == 0 {
            return vec![UPoly::one()];
        }
        let denom = g.mul(&h.pow(delta));
        a = std::mem::replace(&mut b, div_coeffs(&r, &denom));
        g = a.last().expect("nonzero").clone();
        h = if delta == 0 {
            h
        } else {
            g.pow(delta).div_exact(&h.pow(delta - 1))
        };
    }
    let c = content(&b);
    div_coeffs(&b, &c)
}

/// Greatest common divisor, normalized to content 1 with a positive
/// graded-lex leading coefficient.
pub fn gcd_poly(p: &Poly2, q: &Poly2) -> Result<Poly2, ExprError> {
    match (p.is_zero(), q.is_zero()) {
        (true, true) => return Err(ExprError::BothZero),
        (true, false) => return Ok(q.primitive()),
        (false, true) => return Ok(p.primitive()),
        _ => {}
    }
    let (a, b) = (to_rpoly(p), to_rpoly(q));
    let (ca, cb) = (content(&a), content(&b));
    let cont = UPoly::gcd(&ca, &cb);
    let pa = div_coeffs(&a, &ca);
    let pb = div_coeffs(&b, &cb);
    let g = subresultant_gcd(pa, pb);
    let g: RPoly = g.iter().map(|c| c.mul(&cont)).collect();
    Ok(from_rpoly(&g).primitive())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse_poly, Var};
    use proptest::prelude::*;

    fn p(s: &str) -> Poly2 {
        parse_poly(s).unwrap()
    }

    #[test]
    fn gcd_examples() {
        assert_eq!(gcd_poly(&p("x^2*y"), &p("x*y^2")).unwrap(), p("x*y"));
        assert_eq!(gcd_poly(&p("x^2+y^2"), &p("x-y")).unwrap(), Poly2::one());
        let f = p("(x^2+y^2)^2");
        let g = gcd_poly(&f.diff(Var::X), &f.diff(Var::Y)).unwrap();
        assert_eq!(g, p("x^2+y^2"));
        assert!(matches!(gcd_poly(&Poly2::zero(), &Poly2::zero()), Err(ExprError::BothZero)));
        assert_eq!(gcd_poly(&Poly2::zero(), &p("-2*x")).unwrap(), p("x"));
    }

    #[test]
    fn gcd_of_factored_derivatives() {
        // f = Q1^2 Q2^3 so the formula divisor is Q1 Q2^2
        let q1 = p("x^2 + y^2");
        let q2 = p("x^2 + 2*y^2");
        let f = &q1.pow(2) * &q2.pow(3);
        let g = gcd_poly(&f.diff(Var::X), &f.diff(Var::Y)).unwrap();
        assert_eq!(g, (&q1 * &q2.pow(2)).primitive());
    }

    #[test]
    fn gcd_with_pure_x_content() {
        let a = p("x^2*(y + 1)*(x - y)");
        let b = p("x*(x + 3)*(x - y)^2");
        assert_eq!(gcd_poly(&a, &b).unwrap(), p("x^2 - x*y"));
    }

    fn small_poly() -> impl Strategy<Value = Poly2> {
        prop::collection::vec(((0u32..3, 0u32..3), -4i64..5), 1..4).prop_map(|ts| {
            Poly2::from_terms(ts.into_iter().map(|(m, c)| (m, Rational::from_integer(c.into()))))
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn gcd_divides_both(a in small_poly(), b in small_poly()) {
            prop_assume!(!(a.is_zero() && b.is_zero()));
            let g = gcd_poly(&a, &b).unwrap();
            prop_assert!(g.divides(&a));
            prop_assert!(g.divides(&b));
        }

        #[test]
        fn gcd_extracts_common_factor(a in small_poly(), b in small_poly(),
                                      ea in (0u32..3, 0u32..3), eb in (0u32..3, 0u32..3)) {
            prop_assume!(!a.is_zero() && !b.is_zero());
            let g = p("x^2 + x*y + 3*y^2 - y");
            let ma = Poly2::monomial(Rational::one(), ea.0, ea.1);
            let mb = Poly2::monomial(Rational::one(), eb.0, eb.1);
            let lhs = gcd_poly(&(&(&ma * &a) * &g), &(&(&mb * &b) * &g)).unwrap();
            let rhs = &g * &gcd_poly(&(&ma * &a), &(&mb * &b)).unwrap();
            prop_assert!(lhs.is_associate(&rhs), "{lhs} vs {rhs}");
        }
    }
}

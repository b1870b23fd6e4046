//! Exact bivariate polynomials over the rationals, their text syntax, and
//! the smooth scalar expressions used for shift functions.

mod gcd;
mod parse;
mod poly;
mod scalar;

pub use gcd::gcd_poly;
pub use parse::{parse_poly, Func};
pub use poly::{grlex_cmp, CompiledPoly, Monomial, Poly2, Rational, Var};
pub use scalar::ScalarExpr;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {position}: expected {}, found `{found}`", expected.join(" or "))]
    Syntax { position: usize, expected: Vec<&'static str>, found: String },
    #[error("not a polynomial (offset {position}): {reason}")]
    NonPolynomial { position: usize, reason: String },
    #[error("gcd of two zero polynomials is undefined")]
    BothZero,
    #[error("division by the zero polynomial")]
    DivisionByZero,
    #[error("`{0}` is not a rational number")]
    BadRational(String),
}

/// Parses `"p/q"`, `"p"` or a decimal like `"0.25"` into an exact rational.
pub fn parse_rational(text: &str) -> Result<Rational, ExprError> {
    let p = parse_poly(text.trim()).or_else(|_| {
        ScalarExpr::parse(text.trim())
            .ok()
            .and_then(|e| e.as_poly().cloned())
            .ok_or_else(|| ExprError::BadRational(text.to_string()))
    })?;
    if !p.is_constant() {
        return Err(ExprError::BadRational(text.to_string()));
    }
    Ok(p.coeff(0, 0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_poly() -> impl Strategy<Value = Poly2> {
        prop::collection::vec(((0u32..4, 0u32..4), -9i64..10, 1i64..5), 0..6).prop_map(|ts| {
            Poly2::from_terms(ts.into_iter().map(|(m, n, d)| (m, Rational::new(n.into(), d.into()))))
        })
    }

    #[test]
    fn rational_strings() {
        assert_eq!(parse_rational("3/4").unwrap().to_string(), "3/4");
        assert_eq!(parse_rational(" -2 ").unwrap().to_string(), "-2");
        assert_eq!(parse_rational("0.25").unwrap().to_string(), "1/4");
        assert!(parse_rational("x").is_err());
    }

    proptest! {
        #[test]
        fn print_parse_round_trip(p in arb_poly()) {
            prop_assert_eq!(parse_poly(&p.to_string()).unwrap(), p);
        }

        #[test]
        fn ring_axioms(a in arb_poly(), b in arb_poly(), c in arb_poly()) {
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
            prop_assert!((&a - &a).is_zero());
        }

        #[test]
        fn leibniz_rule(a in arb_poly(), b in arb_poly()) {
            for v in [Var::X, Var::Y] {
                let lhs = (&a * &b).diff(v);
                let rhs = &(&a.diff(v) * &b) + &(&a * &b.diff(v));
                prop_assert_eq!(lhs, rhs);
            }
        }

        #[test]
        fn numeric_eval_matches_exact(a in arb_poly(), x in -3i64..4, y in -3i64..4) {
            let (xr, yr) = (Rational::from_integer(x.into()), Rational::from_integer(y.into()));
            let exact = num_traits::ToPrimitive::to_f64(&a.eval_exact(&xr, &yr)).unwrap();
            let approx = a.eval(x as f64, y as f64);
            prop_assert!((exact - approx).abs() <= 1e-12 * (1.0 + exact.abs()));
        }
    }
}

//! Recursive-descent parser shared by the polynomial and scalar-expression
//! languages.
//!
//! Precedence, tightest first: `^`, unary `-`, `*` (and `/` for scalars),
//! binary `+`/`-`. In the polynomial language `/` only appears inside a
//! rational literal `p/q`.

use num_bigint::BigInt;
use num_traits::{ToPrimitive, Zero};

use super::poly::{Poly2, Rational};
use super::ExprError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Dialect {
    Poly,
    Scalar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Atan2,
}

impl Func {
    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sqrt" => Func::Sqrt,
            "atan2" => Func::Atan2,
            _ => return None,
        })
    }

    fn arity(self) -> usize {
        match self {
            Func::Atan2 => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Num(Rational),
    /// Decimal literal: exact value and its f64 reading.
    Dec(Rational, f64),
    X,
    Y,
    Pi,
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Neg(Box<Node>),
    Pow(Box<Node>, i32),
    Call(Func, Vec<Node>),
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(BigInt),
    /// Decimal or exponent-notation literal, exact value plus the f64 reading.
    Dec(Rational, f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Int(i) => i.to_string(),
            Tok::Dec(_, f) => f.to_string(),
            Tok::Ident(s) => s.clone(),
            Tok::Plus => "+".into(),
            Tok::Minus => "-".into(),
            Tok::Star => "*".into(),
            Tok::Slash => "/".into(),
            Tok::Caret => "^".into(),
            Tok::LParen => "(".into(),
            Tok::RParen => ")".into(),
            Tok::Comma => ",".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ExprError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let tok = match c {
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '*' => Tok::Star,
            '/' => Tok::Slash,
            '^' => Tok::Caret,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            ',' => Tok::Comma,
            '0'..='9' | '.' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let mut is_dec = false;
                if i < bytes.len() && bytes[i] == b'.' {
                    is_dec = true;
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        is_dec = true;
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let s = &text[start..i];
                if !is_dec {
                    out.push((start, Tok::Int(s.parse().expect("digits"))));
                } else {
                    let f: f64 = s.parse().map_err(|_| ExprError::Syntax {
                        position: start,
                        expected: vec!["number"],
                        found: s.to_string(),
                    })?;
                    out.push((start, Tok::Dec(decimal_to_rational(s), f)));
                }
                continue;
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            other => {
                return Err(ExprError::Syntax {
                    position: start,
                    expected: vec!["expression"],
                    found: other.to_string(),
                })
            }
        };
        out.push((start, tok));
        i += 1;
    }
    out.push((text.len(), Tok::End));
    Ok(out)
}

fn decimal_to_rational(s: &str) -> Rational {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(k) => (&s[..k], s[k + 1..].parse::<i32>().unwrap_or(0)),
        None => (s, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    let digits = format!("{int_part}{frac_part}");
    let n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().expect("digits") };
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    if scale >= 0 {
        Rational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        Rational::new(n, num_traits::pow(ten, (-scale) as usize))
    }
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    dialect: Dialect,
}

const TERM_START: &[&str] = &["number", "x", "y", "(", "-"];

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &[&'static str]) -> ExprError {
        ExprError::Syntax {
            position: self.offset(),
            expected: expected.to_vec(),
            found: self.peek().describe(),
        }
    }

    fn expect(&mut self, tok: Tok, name: &'static str) -> Result<(), ExprError> {
        if *self.peek() == tok {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&[name]))
        }
    }

    fn parse_all(&mut self) -> Result<Node, ExprError> {
        let n = self.expr()?;
        if *self.peek() != Tok::End {
            let mut expected = vec!["+", "-", "*"];
            if self.dialect == Dialect::Scalar {
                expected.push("/");
            }
            expected.push("end of input");
            return Err(self.unexpected(&expected));
        }
        Ok(n)
    }

    fn expr(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Node::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Node::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Node::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash if self.dialect == Dialect::Scalar => {
                    self.bump();
                    lhs = Node::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Slash => {
                    return Err(ExprError::NonPolynomial {
                        position: self.offset(),
                        reason: "division is only allowed inside a rational literal p/q".into(),
                    })
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ExprError> {
        if *self.peek() == Tok::Minus {
            self.bump();
            return Ok(Node::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ExprError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let at = self.offset();
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let e = match self.peek().clone() {
            Tok::Int(i) => {
                self.bump();
                i
            }
            Tok::Dec(..) => {
                return Err(ExprError::NonPolynomial { position: at, reason: "exponent must be an integer".into() })
            }
            _ => return Err(self.unexpected(&["integer exponent"])),
        };
        if negative && self.dialect == Dialect::Poly {
            return Err(ExprError::NonPolynomial { position: at, reason: "negative exponent".into() });
        }
        let e = e.to_i32().filter(|v| *v <= 4096).ok_or_else(|| ExprError::NonPolynomial {
            position: at,
            reason: "exponent too large".into(),
        })?;
        Ok(Node::Pow(Box::new(base), if negative { -e } else { e }))
    }

    fn primary(&mut self) -> Result<Node, ExprError> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                if self.dialect == Dialect::Poly && *self.peek() == Tok::Slash {
                    self.bump();
                    let at = self.offset();
                    match self.peek().clone() {
                        Tok::Int(d) if !d.is_zero() => {
                            self.bump();
                            Ok(Node::Num(Rational::new(n, d)))
                        }
                        Tok::Int(_) => Err(ExprError::Syntax {
                            position: at,
                            expected: vec!["nonzero denominator"],
                            found: "0".into(),
                        }),
                        _ => Err(self.unexpected(&["integer denominator"])),
                    }
                } else {
                    Ok(Node::Num(Rational::from_integer(n)))
                }
            }
            Tok::Dec(r, f) => {
                if self.dialect == Dialect::Poly {
                    return Err(self.unexpected(&["integer", "rational literal p/q"]));
                }
                self.bump();
                Ok(Node::Dec(r, f))
            }
            Tok::Ident(name) => {
                match name.as_str() {
                    "x" => {
                        self.bump();
                        return Ok(Node::X);
                    }
                    "y" => {
                        self.bump();
                        return Ok(Node::Y);
                    }
                    _ => {}
                }
                if self.dialect == Dialect::Poly {
                    return Err(self.unexpected(&["x", "y"]));
                }
                if name == "pi" {
                    self.bump();
                    return Ok(Node::Pi);
                }
                let Some(func) = Func::from_name(&name) else {
                    return Err(self.unexpected(&["x", "y", "pi", "function name"]));
                };
                self.bump();
                self.expect(Tok::LParen, "(")?;
                let mut args = vec![self.expr()?];
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.expr()?);
                }
                self.expect(Tok::RParen, ")")?;
                if args.len() != func.arity() {
                    return Err(ExprError::Syntax {
                        position: self.offset(),
                        expected: vec!["matching argument count"],
                        found: format!("{} arguments", args.len()),
                    });
                }
                Ok(Node::Call(func, args))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen, ")")?;
                Ok(inner)
            }
            _ => Err(self.unexpected(TERM_START)),
        }
    }
}

pub(crate) fn parse(text: &str, dialect: Dialect) -> Result<Node, ExprError> {
    let toks = lex(text)?;
    Parser { toks, pos: 0, dialect }.parse_all()
}

pub(crate) fn lower_poly(n: &Node) -> Result<Poly2, ExprError> {
    let bad = |reason: &str| ExprError::NonPolynomial { position: 0, reason: reason.into() };
    Ok(match n {
        Node::Num(r) | Node::Dec(r, _) => Poly2::constant(r.clone()),
        Node::X => Poly2::x(),
        Node::Y => Poly2::y(),
        Node::Add(a, b) => lower_poly(a)? + lower_poly(b)?,
        Node::Sub(a, b) => lower_poly(a)? - lower_poly(b)?,
        Node::Mul(a, b) => lower_poly(a)? * lower_poly(b)?,
        Node::Neg(a) => -lower_poly(a)?,
        Node::Pow(a, e) if *e >= 0 => lower_poly(a)?.pow(*e as u32),
        Node::Pow(..) => return Err(bad("negative exponent")),
        Node::Div(a, b) => {
            // constant denominators keep the result polynomial
            let den = lower_poly(b)?;
            if !den.is_constant() || den.is_zero() {
                return Err(bad("division by a non-constant"));
            }
            lower_poly(a)?.scale(&den.coeff(0, 0).recip())
        }
        Node::Pi | Node::Call(..) => return Err(bad("not a polynomial expression")),
    })
}

/// Parses the polynomial language: `x`, `y`, integer and `p/q` literals,
/// `+ - * ^`, parentheses.
pub fn parse_poly(text: &str) -> Result<Poly2, ExprError> {
    lower_poly(&parse(text, Dialect::Poly)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn terms(p: &Poly2) -> Vec<((u32, u32), String)> {
        p.terms().map(|(m, c)| (*m, c.to_string())).collect()
    }

    #[test]
    fn parse_examples() {
        assert_eq!(terms(&parse_poly("x^2+y^2").unwrap()), vec![((0, 2), "1".into()), ((2, 0), "1".into())]);
        assert!(parse_poly("0").unwrap().is_zero());
        assert_eq!(terms(&parse_poly("(x+y)^2 - x^2 - 2*x*y").unwrap()), vec![((0, 2), "1".into())]);
    }

    #[test]
    fn rational_literals_and_precedence() {
        let p = parse_poly("-1/3*x^2 + 2/4").unwrap();
        assert_eq!(p.coeff(2, 0).to_string(), "-1/3");
        assert_eq!(p.coeff(0, 0).to_string(), "1/2");
        // unary minus binds looser than ^
        assert_eq!(parse_poly("-x^2").unwrap(), parse_poly("-(x^2)").unwrap());
        assert_eq!(parse_poly("2*-y").unwrap(), parse_poly("-2*y").unwrap());
    }

    #[test]
    fn syntax_errors_carry_position_and_expectation() {
        match parse_poly("x + * y") {
            Err(ExprError::Syntax { position, expected, .. }) => {
                assert_eq!(position, 4);
                assert!(expected.contains(&"x"));
            }
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse_poly("(x + y"), Err(ExprError::Syntax { position: 6, .. })));
        assert!(matches!(parse_poly("x y"), Err(ExprError::Syntax { position: 2, .. })));
        assert!(matches!(parse_poly("z"), Err(ExprError::Syntax { position: 0, .. })));
        assert!(matches!(parse_poly("1/0"), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse_poly("0.5*x"), Err(ExprError::Syntax { .. })));
        assert!(matches!(parse_poly(""), Err(ExprError::Syntax { position: 0, .. })));
    }

    #[test]
    fn non_polynomial_inputs_are_rejected() {
        assert!(matches!(parse_poly("x^-1"), Err(ExprError::NonPolynomial { .. })));
        assert!(matches!(parse_poly("x/y"), Err(ExprError::NonPolynomial { .. })));
        assert!(matches!(parse_poly("x^1.5"), Err(ExprError::NonPolynomial { .. })));
    }

    #[test]
    fn decimal_reading_is_exact() {
        assert_eq!(decimal_to_rational("0.125").to_string(), "1/8");
        assert_eq!(decimal_to_rational("2.5e2").to_string(), "250");
        assert_eq!(decimal_to_rational("1e-3").to_string(), "1/1000");
    }
}

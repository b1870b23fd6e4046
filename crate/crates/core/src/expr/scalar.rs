use std::fmt;

use num_traits::ToPrimitive;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::parse::{lower_poly, parse, Dialect, Func, Node};
use super::poly::Poly2;
use super::ExprError;

#[derive(Debug, Clone)]
enum Code {
    C(f64),
    X,
    Y,
    Add(Box<Code>, Box<Code>),
    Sub(Box<Code>, Box<Code>),
    Mul(Box<Code>, Box<Code>),
    Div(Box<Code>, Box<Code>),
    Neg(Box<Code>),
    Pow(Box<Code>, i32),
    Call(Func, Vec<Code>),
}

fn compile(n: &Node) -> Code {
    let b = |n: &Node| Box::new(compile(n));
    match n {
        Node::Num(r) => Code::C(r.to_f64().unwrap_or(f64::NAN)),
        Node::Dec(_, f) => Code::C(*f),
        Node::Pi => Code::C(std::f64::consts::PI),
        Node::X => Code::X,
        Node::Y => Code::Y,
        Node::Add(l, r) => Code::Add(b(l), b(r)),
        Node::Sub(l, r) => Code::Sub(b(l), b(r)),
        Node::Mul(l, r) => Code::Mul(b(l), b(r)),
        Node::Div(l, r) => Code::Div(b(l), b(r)),
        Node::Neg(a) => match compile(a) {
            Code::C(c) => Code::C(-c),
            inner => Code::Neg(Box::new(inner)),
        },
        Node::Pow(a, e) => Code::Pow(b(a), *e),
        Node::Call(f, args) => Code::Call(*f, args.iter().map(compile).collect()),
    }
}

impl Code {
    fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Code::C(c) => *c,
            Code::X => x,
            Code::Y => y,
            Code::Add(a, b) => a.eval(x, y) + b.eval(x, y),
            Code::Sub(a, b) => a.eval(x, y) - b.eval(x, y),
            Code::Mul(a, b) => a.eval(x, y) * b.eval(x, y),
            Code::Div(a, b) => a.eval(x, y) / b.eval(x, y),
            Code::Neg(a) => -a.eval(x, y),
            Code::Pow(a, e) => a.eval(x, y).powi(*e),
            Code::Call(f, args) => {
                let u = args[0].eval(x, y);
                match f {
                    Func::Sin => u.sin(),
                    Func::Cos => u.cos(),
                    Func::Tan => u.tan(),
                    Func::Exp => u.exp(),
                    Func::Log => u.ln(),
                    Func::Sqrt => u.sqrt(),
                    Func::Atan2 => u.atan2(args[1].eval(x, y)),
                }
            }
        }
    }
}

/// A smooth real function of `(x, y)` given as text, used for shift
/// functions `α` in map specifications.
///
/// The language extends the polynomial grammar with `/`, decimal
/// literals, `pi` and `sin cos tan exp log sqrt atan2`.
#[derive(Clone)]
pub struct ScalarExpr {
    text: String,
    code: Code,
    poly: Option<Poly2>,
}

impl ScalarExpr {
    pub fn parse(text: &str) -> Result<Self, ExprError> {
        let node = parse(text, Dialect::Scalar)?;
        let poly = lower_poly(&node).ok();
        Ok(Self { text: text.trim().to_string(), code: compile(&node), poly })
    }

    /// A constant function; the text uses the shortest round-trip decimal form.
    pub fn constant(c: f64) -> Self {
        let text = if c.is_finite() { format!("{c:?}") } else { "0".into() };
        Self::parse(&text).expect("float literal parses")
    }

    pub fn from_poly(p: &Poly2) -> Self {
        Self::parse(&p.to_string()).expect("canonical printer output parses")
    }

    pub fn text(&self) -> &str {
        &self.text
    }

    /// The exact polynomial this expression denotes, when it is one.
    pub fn as_poly(&self) -> Option<&Poly2> {
        self.poly.as_ref()
    }

    pub fn constant_value(&self) -> Option<f64> {
        match &self.code {
            Code::C(c) => Some(*c),
            _ => self.poly.as_ref().filter(|p| p.is_constant()).map(|_| self.eval(0.0, 0.0)),
        }
    }

    #[inline]
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.code.eval(x, y)
    }
}

impl fmt::Debug for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ScalarExpr({})", self.text)
    }
}

impl fmt::Display for ScalarExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.text)
    }
}

impl PartialEq for ScalarExpr {
    fn eq(&self, other: &Self) -> bool {
        self.text == other.text
    }
}

impl Serialize for ScalarExpr {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.text)
    }
}

impl<'de> Deserialize<'de> for ScalarExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        ScalarExpr::parse(&s).map_err(serde::de::Error::custom)
    }
}

use std::fmt;
use std::sync::Arc;

use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::expr::{parse_poly, parse_rational, CompiledPoly, Poly2, Rational, ScalarExpr};
use crate::field::{FieldSpec, IntegralSpec};
use crate::flow::{flow_with, FlowConfig};
use crate::geom::Point;

use super::sample::SampledShift;
use super::ShiftError;

/// A real function `α` on the domain, used as a shift function.
#[derive(Clone)]
pub enum ShiftFn {
    Expr(ScalarExpr),
    Sampled(Arc<SampledShift>),
    Func(Arc<dyn Fn(Point) -> f64 + Send + Sync>),
}

impl ShiftFn {
    pub fn parse(text: &str) -> Result<Self, ShiftError> {
        Ok(ShiftFn::Expr(ScalarExpr::parse(text)?))
    }

    pub fn constant(c: f64) -> Self {
        ShiftFn::Expr(ScalarExpr::constant(c))
    }

    pub fn func(f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        ShiftFn::Func(Arc::new(f))
    }

    /// The integral `f̂` itself.
    pub fn level(is: &IntegralSpec) -> Self {
        ShiftFn::Expr(ScalarExpr::from_poly(is.f_hat()))
    }

    #[inline]
    pub fn eval(&self, z: Point) -> f64 {
        match self {
            ShiftFn::Expr(e) => e.eval(z.x, z.y),
            ShiftFn::Sampled(s) => s.eval(z),
            ShiftFn::Func(f) => f(z),
        }
    }

    pub fn constant_value(&self) -> Option<f64> {
        match self {
            ShiftFn::Expr(e) => e.constant_value(),
            _ => None,
        }
    }
}

impl fmt::Debug for ShiftFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShiftFn::Expr(e) => write!(f, "Expr({e})"),
            ShiftFn::Sampled(_) => write!(f, "Sampled"),
            ShiftFn::Func(_) => write!(f, "Func"),
        }
    }
}

type CustomFn = Arc<dyn Fn(&FieldSpec, Point, &FlowConfig) -> Result<Point, ShiftError> + Send + Sync>;

/// One factor of a composite map.
#[derive(Clone)]
pub enum Primitive {
    /// `Sh(α)`: `z ↦ Φ(z, α(z))`.
    FlowShift(ShiftFn),
    Linear { m: [[Rational; 2]; 2], mf: [[f64; 2]; 2] },
    Poly { h1: Poly2, h2: Poly2, c1: CompiledPoly, c2: CompiledPoly },
    /// Any other origin-fixing map, evaluated by a closure.
    Custom { name: String, f: CustomFn },
}

impl Primitive {
    pub fn flow_shift(alpha: ShiftFn) -> Self {
        Primitive::FlowShift(alpha)
    }

    pub fn linear(m: [[Rational; 2]; 2]) -> Self {
        let mf = [
            [m[0][0].to_f64().unwrap_or(f64::NAN), m[0][1].to_f64().unwrap_or(f64::NAN)],
            [m[1][0].to_f64().unwrap_or(f64::NAN), m[1][1].to_f64().unwrap_or(f64::NAN)],
        ];
        Primitive::Linear { m, mf }
    }

    pub fn linear_ints(a: i64, b: i64, c: i64, d: i64) -> Self {
        let r = |v: i64| Rational::from_integer(v.into());
        Self::linear([[r(a), r(b)], [r(c), r(d)]])
    }

    pub fn poly(h1: Poly2, h2: Poly2) -> Result<Self, ShiftError> {
        if !h1.coeff(0, 0).is_zero() || !h2.coeff(0, 0).is_zero() {
            return Err(ShiftError::OriginNotFixed);
        }
        Ok(Primitive::Poly { c1: h1.compile(), c2: h2.compile(), h1, h2 })
    }

    pub fn custom(
        name: impl Into<String>,
        f: impl Fn(&FieldSpec, Point, &FlowConfig) -> Result<Point, ShiftError> + Send + Sync + 'static,
    ) -> Self {
        Primitive::Custom { name: name.into(), f: Arc::new(f) }
    }

    pub fn apply(&self, fs: &FieldSpec, z: Point, cfg: &FlowConfig) -> Result<Point, ShiftError> {
        match self {
            Primitive::FlowShift(a) => Ok(flow_with(fs, z, a.eval(z), cfg)?),
            Primitive::Linear { mf, .. } => {
                Ok(Point::new(mf[0][0] * z.x + mf[0][1] * z.y, mf[1][0] * z.x + mf[1][1] * z.y))
            }
            Primitive::Poly { c1, c2, .. } => Ok(Point::new(c1.eval(z.x, z.y), c2.eval(z.x, z.y))),
            Primitive::Custom { f, .. } => f(fs, z, cfg),
        }
    }
}

impl fmt::Debug for Primitive {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Primitive::FlowShift(a) => write!(f, "FlowShift({a:?})"),
            Primitive::Linear { m, .. } => {
                write!(f, "Linear(({}, {}), ({}, {}))", m[0][0], m[0][1], m[1][0], m[1][1])
            }
            Primitive::Poly { h1, h2, .. } => write!(f, "Poly({h1}, {h2})"),
            Primitive::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

/// A composite map; primitives apply in list order.
#[derive(Clone, Debug, Default)]
pub struct MapSpec {
    pub name: String,
    pub primitives: Vec<Primitive>,
}

impl MapSpec {
    pub fn identity() -> Self {
        Self { name: "identity".into(), primitives: vec![] }
    }

    pub fn new(name: impl Into<String>, primitives: Vec<Primitive>) -> Self {
        Self { name: name.into(), primitives }
    }

    pub fn flow_shift(alpha: ShiftFn) -> Self {
        Self::new("flow_shift", vec![Primitive::FlowShift(alpha)])
    }

    /// `Φ_τ`, the time-`τ` map of the flow.
    pub fn flow_map(tau: f64) -> Self {
        Self::new(format!("flow_map({tau:?})"), vec![Primitive::FlowShift(ShiftFn::constant(tau))])
    }

    /// `self` followed by `next`.
    pub fn then(&self, next: &MapSpec) -> Self {
        let mut primitives = self.primitives.clone();
        primitives.extend(next.primitives.iter().cloned());
        Self { name: format!("{} ; {}", self.name, next.name), primitives }
    }

    /// `α` when the map is a single flow shift by an expression.
    pub fn as_flow_shift(&self) -> Option<&ShiftFn> {
        match self.primitives.as_slice() {
            [Primitive::FlowShift(a @ ShiftFn::Expr(_))] => Some(a),
            _ => None,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.primitives.is_empty()
    }

    pub fn apply(&self, fs: &FieldSpec, z: Point, cfg: &FlowConfig) -> Result<Point, ShiftError> {
        self.primitives.iter().try_fold(z, |p, prim| prim.apply(fs, p, cfg))
    }

    pub fn from_json(text: &str) -> Result<Self, ShiftError> {
        let doc: MapDoc = serde_json::from_str(text).map_err(|e| ShiftError::BadMapSpec(e.to_string()))?;
        let (name, prims) = match doc {
            MapDoc::List(p) => (String::from("map"), p),
            MapDoc::Named { name, primitives } => (name.unwrap_or_else(|| "map".into()), primitives),
        };
        let primitives = prims.into_iter().map(PrimitiveDoc::build).collect::<Result<_, _>>()?;
        Ok(Self { name, primitives })
    }

    /// JSON form; fails for sampled or closure-based primitives.
    pub fn to_json(&self) -> Result<String, ShiftError> {
        let primitives = self.primitives.iter().map(PrimitiveDoc::from_primitive).collect::<Result<Vec<_>, _>>()?;
        let doc = MapDoc::Named { name: Some(self.name.clone()), primitives };
        serde_json::to_string_pretty(&doc).map_err(|e| ShiftError::BadMapSpec(e.to_string()))
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum MapDoc {
    List(Vec<PrimitiveDoc>),
    Named { name: Option<String>, primitives: Vec<PrimitiveDoc> },
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum PrimitiveDoc {
    FlowShift { alpha: String },
    Linear { m: [[String; 2]; 2] },
    Poly { h1: String, h2: String },
}

impl PrimitiveDoc {
    fn build(self) -> Result<Primitive, ShiftError> {
        match self {
            PrimitiveDoc::FlowShift { alpha } => Ok(Primitive::FlowShift(ShiftFn::parse(&alpha)?)),
            PrimitiveDoc::Linear { m } => {
                let r = |s: &str| parse_rational(s).map_err(ShiftError::from);
                Ok(Primitive::linear([[r(&m[0][0])?, r(&m[0][1])?], [r(&m[1][0])?, r(&m[1][1])?]]))
            }
            PrimitiveDoc::Poly { h1, h2 } => Primitive::poly(parse_poly(&h1)?, parse_poly(&h2)?),
        }
    }

    fn from_primitive(p: &Primitive) -> Result<Self, ShiftError> {
        match p {
            Primitive::FlowShift(ShiftFn::Expr(e)) => Ok(PrimitiveDoc::FlowShift { alpha: e.text().to_string() }),
            Primitive::Linear { m, .. } => Ok(PrimitiveDoc::Linear {
                m: [
                    [m[0][0].to_string(), m[0][1].to_string()],
                    [m[1][0].to_string(), m[1][1].to_string()],
                ],
            }),
            Primitive::Poly { h1, h2, .. } => Ok(PrimitiveDoc::Poly { h1: h1.to_string(), h2: h2.to_string() }),
            other => Err(ShiftError::NotSerializable(format!("{other:?}"))),
        }
    }
}

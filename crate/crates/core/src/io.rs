//! Field specification files.
//!
//! Factored form: `{"factors": [{"a": .., "b": .., "c": .., "beta": ..}], "epsilon": "p/q"}`
//! with `Q = a x² + 2b xy + c y²`. Direct form: `{"F1": "<poly>", "F2": "<poly>"}`,
//! optionally with `"integral": "<poly>"` giving a normalized first integral.
//! Rationals are strings `"p/q"` or JSON integers.

use num_traits::{One, Signed};
use serde_json::Value;
use thiserror::Error;

use crate::expr::{gcd_poly, parse_poly, parse_rational, ExprError, Rational};
use crate::field::{reduced_hamiltonian, strong_integral, FieldError, FieldSpec, HomogFactoredPoly, IntegralSpec, QuadForm};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IoError {
    #[error("malformed JSON: {0}")]
    Json(String),
    #[error("missing or invalid key `{0}`")]
    Key(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Field(#[from] FieldError),
}

/// A parsed field file.
#[derive(Debug, Clone)]
pub struct FieldInput {
    pub field: FieldSpec,
    pub integral: Option<IntegralSpec>,
    pub factored: Option<HomogFactoredPoly>,
}

impl FieldInput {
    /// Whether `gcd(F1, F2)` is a constant.
    pub fn coprime(&self) -> Result<bool, IoError> {
        let g = gcd_poly(self.field.f1(), self.field.f2())?;
        Ok(g.degree().unwrap_or(0) == 0)
    }

    pub fn require_integral(&self) -> Result<&IntegralSpec, IoError> {
        self.integral.as_ref().ok_or_else(|| IoError::Key("integral".into()))
    }
}

fn rational(v: &Value, key: &str) -> Result<Rational, IoError> {
    match v {
        Value::String(s) => Ok(parse_rational(s)?),
        Value::Number(n) if n.is_i64() => Ok(Rational::from_integer(n.as_i64().unwrap_or_default().into())),
        _ => Err(IoError::Key(key.into())),
    }
}

fn text<'a>(obj: &'a Value, key: &str) -> Result<&'a str, IoError> {
    obj.get(key).and_then(Value::as_str).ok_or_else(|| IoError::Key(key.into()))
}

pub fn parse_field_json(src: &str) -> Result<FieldInput, IoError> {
    let v: Value = serde_json::from_str(src).map_err(|e| IoError::Json(e.to_string()))?;
    if let Some(factors) = v.get("factors") {
        let arr = factors.as_array().ok_or_else(|| IoError::Key("factors".into()))?;
        let mut fs = Vec::with_capacity(arr.len());
        for f in arr {
            let get = |k: &str| f.get(k).ok_or_else(|| IoError::Key(k.into())).and_then(|x| rational(x, k));
            let beta = get("beta")?;
            if !beta.is_integer() || !beta.is_positive() || beta > Rational::from_integer(u32::MAX.into()) {
                return Err(IoError::Key("beta".into()));
            }
            let beta: u32 = beta.to_integer().try_into().map_err(|_| IoError::Key("beta".into()))?;
            fs.push((QuadForm::new(get("a")?, get("b")?, get("c")?)?, beta));
        }
        let hp = HomogFactoredPoly::new(fs)?;
        let eps = match v.get("epsilon") {
            Some(e) => rational(e, "epsilon")?,
            None => Rational::one(),
        };
        let integral = strong_integral(&hp, &eps)?;
        let field = reduced_hamiltonian(&hp)?;
        return Ok(FieldInput { field, integral: Some(integral), factored: Some(hp) });
    }
    let field = FieldSpec::parse(text(&v, "F1")?, text(&v, "F2")?)?;
    let integral = match v.get("integral") {
        Some(Value::String(s)) => Some(IntegralSpec::new(parse_poly(s)?)?),
        Some(_) => return Err(IoError::Key("integral".into())),
        None => None,
    };
    Ok(FieldInput { field, integral, factored: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::CenterCase;
    use crate::geom::Point;

    #[test]
    fn factored_inputs() {
        let k2 = parse_field_json(r#"{"factors":[{"a":1,"b":0,"c":1,"beta":1},{"a":"1","b":"0","c":"2","beta":1}],"epsilon":"1"}"#)
            .unwrap();
        assert_eq!(k2.field.case(), CenterCase::Nf1ZeroLinear);
        assert!(k2.coprime().unwrap());
        let circle = parse_field_json(r#"{"factors":[{"a":1,"b":0,"c":1,"beta":1}]}"#).unwrap();
        assert_eq!(circle.field.case(), CenterCase::Nf3NonDegenerate);
        let is = circle.require_integral().unwrap();
        assert!(is.ray_point(1.0, 0.0).unwrap().dist(Point::new(1.0, 0.0)) < 1e-14);
        let half = parse_field_json(r#"{"factors":[{"a":1,"b":0,"c":1,"beta":1}],"epsilon":"1/4"}"#).unwrap();
        assert!(half.require_integral().unwrap().ray_point(1.0, 0.0).unwrap().dist(Point::new(0.5, 0.0)) < 1e-14);
    }

    #[test]
    fn direct_inputs() {
        let f = parse_field_json(r#"{"F1":"-y","F2":"x","integral":"x^2 + y^2"}"#).unwrap();
        assert_eq!(f.field.case(), CenterCase::Nf3NonDegenerate);
        assert!(f.integral.is_some() && f.factored.is_none());
        let bad = parse_field_json(r#"{"F1":"x","F2":"y"}"#).unwrap();
        assert_eq!(bad.field.case(), CenterCase::NotTc);
        assert!(bad.require_integral().is_err());
    }

    #[test]
    fn rejects_malformed_inputs() {
        assert!(matches!(parse_field_json("{"), Err(IoError::Json(_))));
        assert!(matches!(parse_field_json(r#"{"F1":"-y"}"#), Err(IoError::Key(_))));
        assert!(parse_field_json(r#"{"F1":"-y +","F2":"x"}"#).is_err());
        assert!(parse_field_json(r#"{"factors":[{"a":1,"b":2,"c":1,"beta":1}]}"#).is_err());
        assert!(parse_field_json(r#"{"factors":[{"a":1,"b":0,"c":1,"beta":0}]}"#).is_err());
        assert!(parse_field_json(r#"{"factors":[{"a":1,"b":0,"c":1,"beta":"1/2"}]}"#).is_err());
        assert!(parse_field_json(r#"{"F1":"-y + 1","F2":"x"}"#).is_err());
    }
}

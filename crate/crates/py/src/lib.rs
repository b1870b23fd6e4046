//! Python bindings: fields, maps, flows, shift recovery, jets, boundary
//! fixing and the verification suite.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use orbitshift::deform::{fix_boundary as fix_boundary_rs, BumpProfile};
use orbitshift::field::examples;
use orbitshift::field::{reduced_hamiltonian, strong_integral, FieldSpec, IntegralSpec};
use orbitshift::flow::{flow_with, period_with, FlowConfig};
use orbitshift::geom::Point;
use orbitshift::io::parse_field_json;
use orbitshift::jet::{classify_jet, jet_at_origin as jet_rs, DEFAULT_CLASS_TOL};
use orbitshift::plot::phase_portrait as portrait_rs;
use orbitshift::shift::{
    default_anchor, lie_derivative as lie_rs, recover_shift as recover_rs, GridSpec, MapSpec, NodeGrid, ShiftFn,
};
use orbitshift::verify::{run_verify, VerifyConfig};

fn value_err<E: ToString>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err<E: ToString>(e: E) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

fn cfg(tol: f64) -> PyResult<FlowConfig> {
    FlowConfig::new(tol).map_err(value_err)
}

/// A polynomial vector field, optionally with its normalized first integral.
#[pyclass(name = "Field", module = "orbitshift", skip_from_py_object)]
#[derive(Clone)]
pub struct PyField {
    inner: FieldSpec,
    integral: Option<IntegralSpec>,
}

impl PyField {
    fn integral(&self) -> PyResult<&IntegralSpec> {
        self.integral.as_ref().ok_or_else(|| PyValueError::new_err("field has no first integral"))
    }
}

#[pymethods]
impl PyField {
    /// `F = (F1, F2)` from polynomial text, with an optional integral `f̂`.
    #[new]
    #[pyo3(signature = (f1, f2, integral = None))]
    fn new(f1: &str, f2: &str, integral: Option<&str>) -> PyResult<Self> {
        let inner = FieldSpec::parse(f1, f2).map_err(value_err)?;
        let integral = integral
            .map(|s| orbitshift::expr::parse_poly(s).map_err(value_err).and_then(|p| IntegralSpec::new(p).map_err(value_err)))
            .transpose()?;
        Ok(Self { inner, integral })
    }

    /// Parses a field file (factored or direct form).
    #[staticmethod]
    fn from_json(src: &str) -> PyResult<Self> {
        let f = parse_field_json(src).map_err(value_err)?;
        Ok(Self { inner: f.field, integral: f.integral })
    }

    #[staticmethod]
    fn circle() -> PyResult<Self> {
        Self::from_factored(examples::circle())
    }

    #[staticmethod]
    fn two_ellipses() -> PyResult<Self> {
        Self::from_factored(examples::two_ellipses())
    }

    #[getter]
    fn f1(&self) -> String {
        self.inner.f1().to_string()
    }

    #[getter]
    fn f2(&self) -> String {
        self.inner.f2().to_string()
    }

    #[getter]
    fn case(&self) -> String {
        self.inner.case().to_string()
    }

    #[getter]
    fn nabla(&self) -> [[f64; 2]; 2] {
        self.inner.nabla().0
    }

    fn eval(&self, x: f64, y: f64) -> (f64, f64) {
        let p = self.inner.eval(Point::new(x, y));
        (p.x, p.y)
    }

    fn level(&self, x: f64, y: f64) -> PyResult<f64> {
        Ok(self.integral()?.level(Point::new(x, y)))
    }

    /// Point with `f̂ = level` on the ray at `angle`.
    fn ray_point(&self, level: f64, angle: f64) -> PyResult<(f64, f64)> {
        let p = self.integral()?.ray_point(level, angle).map_err(value_err)?;
        Ok((p.x, p.y))
    }

    /// `Φ((x, y), t)`.
    #[pyo3(signature = (x, y, t, tol = 1e-10))]
    fn flow(&self, x: f64, y: f64, t: f64, tol: f64) -> PyResult<(f64, f64)> {
        let p = flow_with(&self.inner, Point::new(x, y), t, &cfg(tol)?).map_err(runtime_err)?;
        Ok((p.x, p.y))
    }

    /// Period of the orbit through `(x, y)`.
    #[pyo3(signature = (x, y, tol = 1e-10))]
    fn period(&self, x: f64, y: f64, tol: f64) -> PyResult<f64> {
        let s = period_with(&self.inner, self.integral()?, Point::new(x, y), &cfg(tol)?).map_err(runtime_err)?;
        Ok(s.theta)
    }

    fn __repr__(&self) -> String {
        format!("Field(F1={}, F2={}, case={})", self.inner.f1(), self.inner.f2(), self.inner.case())
    }
}

impl PyField {
    fn from_factored(hp: orbitshift::field::HomogFactoredPoly) -> PyResult<Self> {
        let one = orbitshift::expr::Rational::from_integer(1.into());
        Ok(Self {
            inner: reduced_hamiltonian(&hp).map_err(value_err)?,
            integral: Some(strong_integral(&hp, &one).map_err(value_err)?),
        })
    }
}

/// A composite map built from flow shifts, linear and polynomial maps.
#[pyclass(name = "Map", module = "orbitshift", skip_from_py_object)]
#[derive(Clone)]
pub struct PyMap {
    inner: MapSpec,
}

#[pymethods]
impl PyMap {
    #[staticmethod]
    fn from_json(src: &str) -> PyResult<Self> {
        Ok(Self { inner: MapSpec::from_json(src).map_err(value_err)? })
    }

    #[staticmethod]
    fn identity() -> Self {
        Self { inner: MapSpec::identity() }
    }

    /// `Sh(α)` for an expression `α` in `x`, `y`.
    #[staticmethod]
    fn flow_shift(alpha: &str) -> PyResult<Self> {
        Ok(Self { inner: MapSpec::flow_shift(ShiftFn::parse(alpha).map_err(value_err)?) })
    }

    #[staticmethod]
    fn flow_map(tau: f64) -> Self {
        Self { inner: MapSpec::flow_map(tau) }
    }

    /// `self` followed by `other`.
    fn then(&self, other: &PyMap) -> Self {
        Self { inner: self.inner.then(&other.inner) }
    }

    #[pyo3(signature = (field, x, y, tol = 1e-10))]
    fn apply(&self, field: &PyField, x: f64, y: f64, tol: f64) -> PyResult<(f64, f64)> {
        let p = self.inner.apply(&field.inner, Point::new(x, y), &cfg(tol)?).map_err(runtime_err)?;
        Ok((p.x, p.y))
    }

    fn to_json(&self) -> PyResult<String> {
        self.inner.to_json().map_err(value_err)
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }
}

/// Recovered shift function on a `levels × angles` grid: `(levels, angles, values, branch)`.
#[pyfunction]
#[pyo3(signature = (field, map, levels = 16, angles = 16, anchor_t = None, tol = 1e-10))]
#[allow(clippy::type_complexity)]
fn recover_shift(
    field: &PyField,
    map: &PyMap,
    levels: usize,
    angles: usize,
    anchor_t: Option<f64>,
    tol: f64,
) -> PyResult<(Vec<f64>, Vec<f64>, Vec<Vec<f64>>, i64)> {
    let (fs, is, c) = (&field.inner, field.integral()?, cfg(tol)?);
    let spec = GridSpec::uniform(levels, angles);
    let grid = NodeGrid::build(fs, is, &spec, &c).map_err(value_err)?;
    let mut anchor = default_anchor(fs, &map.inner, &grid, &c).map_err(runtime_err)?;
    if let Some(t) = anchor_t {
        anchor.t = t;
    }
    let s = recover_rs(fs, is, &map.inner, anchor, &grid, &c).map_err(runtime_err)?;
    let ang = (0..angles).map(|j| spec.angle(j)).collect();
    Ok((spec.levels.clone(), ang, s.values, s.branch))
}

/// `F(α)` at `(x, y)` with its error estimate.
#[pyfunction]
#[pyo3(signature = (field, alpha, x, y, tol = 1e-10))]
fn lie_derivative(field: &PyField, alpha: &str, x: f64, y: f64, tol: f64) -> PyResult<(f64, f64)> {
    let a = ShiftFn::parse(alpha).map_err(value_err)?;
    let d = lie_rs(&field.inner, &a, Point::new(x, y), 1e-2, &cfg(tol)?).map_err(runtime_err)?;
    Ok((d.value, d.error))
}

/// Jacobi matrix of the map at the origin and its error estimate.
#[pyfunction]
fn jet_at_origin(map: &PyMap, field: &PyField) -> PyResult<([[f64; 2]; 2], f64)> {
    let e = jet_rs(&map.inner, &field.inner).map_err(runtime_err)?;
    Ok((e.jet.0, e.error))
}

/// Class tag of a 2×2 jet and its upper-right entry when in a family.
#[pyfunction]
#[pyo3(signature = (matrix, tol = DEFAULT_CLASS_TOL))]
fn classify(matrix: [[f64; 2]; 2], tol: f64) -> (String, Option<f64>) {
    let c = classify_jet(&orbitshift::jet::Jet2(matrix), tol);
    (c.tag.to_string(), c.d)
}

/// `fix_boundary` for `Sh(α)`: `(a, b, inner_residual, boundary_residual, min_lie)`.
#[pyfunction]
#[pyo3(signature = (field, alpha, a = None, b = None, levels = 16, angles = 16, tol = 1e-10))]
#[allow(clippy::too_many_arguments)]
fn fix_boundary(
    field: &PyField,
    alpha: &str,
    a: Option<f64>,
    b: Option<f64>,
    levels: usize,
    angles: usize,
    tol: f64,
) -> PyResult<(f64, f64, f64, f64, f64)> {
    let (fs, is, c) = (&field.inner, field.integral()?, cfg(tol)?);
    let lambda = ShiftFn::parse(alpha).map_err(value_err)?;
    let profile = match (a, b) {
        (Some(a), Some(b)) => Some(BumpProfile::new(a, b).map_err(value_err)?),
        (None, None) => None,
        _ => return Err(PyValueError::new_err("give both a and b, or neither")),
    };
    let grid = NodeGrid::build(fs, is, &GridSpec::uniform(levels, angles), &c).map_err(value_err)?;
    let m = MapSpec::flow_shift(lambda.clone());
    let r = fix_boundary_rs(fs, is, &m, &lambda, &grid, profile, &c).map_err(runtime_err)?;
    Ok((r.profile.a, r.profile.b, r.inner_residual, r.boundary_residual, r.min_lie))
}

/// SVG phase portrait with one orbit per level.
#[pyfunction]
#[pyo3(signature = (field, levels, points = 128, tol = 1e-10))]
fn phase_portrait(field: &PyField, levels: Vec<f64>, points: usize, tol: f64) -> PyResult<String> {
    portrait_rs(&field.inner, field.integral()?, &levels, points, tol).map_err(runtime_err)
}

/// Verification suite summary as JSON.
#[pyfunction]
#[pyo3(signature = (seed = 0, tol = 1e-10))]
fn verify(seed: u64, tol: f64) -> PyResult<String> {
    let s = run_verify(&VerifyConfig { seed, tol, ..Default::default() }).map_err(value_err)?;
    Ok(s.to_json())
}

#[pymodule(name = "orbitshift")]
fn orbitshift_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyField>()?;
    m.add_class::<PyMap>()?;
    m.add_function(wrap_pyfunction!(recover_shift, m)?)?;
    m.add_function(wrap_pyfunction!(lie_derivative, m)?)?;
    m.add_function(wrap_pyfunction!(jet_at_origin, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(fix_boundary, m)?)?;
    m.add_function(wrap_pyfunction!(phase_portrait, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    Ok(())
}

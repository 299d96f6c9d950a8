//! Python bindings: expression jets, metric curvature, verification reports
//! and the case-(iv) profile ODE.

use std::sync::Arc;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

use toric_core::config::parse_config;
use toric_core::expr::{compile_expression, compile_profile, CompiledField};
use toric_core::fd::{compare_with_fd, DEFAULT_STEP, DEFAULT_STEP_THIRD};
use toric_core::field::ScalarField2;
use toric_core::grid::{Box2, Grid};
use toric_core::ode::{self, IntegratorConfig, OdeForm, OdeParamsIV, OdeStateIV};
use toric_core::soliton::einstein_residual;
use toric_core::tensor::{BaseVectorField, Geometry, MetricField};
use toric_core::verify::run_verification;
use toric_core::zoo::{build_general, ToricMetricSpec};
use toric_core::Error;

fn py_err(e: Error) -> PyErr {
    if e.is_configuration() {
        PyValueError::new_err(e.to_string())
    } else {
        PyRuntimeError::new_err(e.to_string())
    }
}

/// A compiled expression in `x` and `y`.
#[pyclass(frozen)]
struct Expression {
    field: CompiledField,
}

#[pymethods]
impl Expression {
    #[new]
    fn new(source: &str) -> PyResult<Self> {
        Ok(Expression {
            field: compile_expression(source).map_err(py_err)?,
        })
    }

    /// `[f, f_x, f_y, f_xx, f_xy, f_yy, f_xxx, f_xxy, f_xyy, f_yyy]` at `(x, y)`.
    fn jet(&self, x: f64, y: f64) -> PyResult<Vec<f64>> {
        Ok(self.field.eval(x, y).map_err(py_err)?.to_array().to_vec())
    }

    fn __call__(&self, x: f64, y: f64) -> PyResult<f64> {
        Ok(self.field.eval(x, y).map_err(py_err)?.value)
    }

    /// AD-vs-FD comparison rows `(entry, jet, fd, rel_err, ok)`.
    #[pyo3(signature = (x, y, h=None))]
    fn check(&self, x: f64, y: f64, h: Option<f64>) -> PyResult<Vec<(String, f64, f64, f64, bool)>> {
        let h = h.unwrap_or(DEFAULT_STEP);
        let rows = compare_with_fd(&self.field, (x, y), h, h * DEFAULT_STEP_THIRD / DEFAULT_STEP).map_err(py_err)?;
        Ok(rows.into_iter().map(|r| (r.name, r.ad, r.fd, r.rel_err, r.ok)).collect())
    }

    fn __repr__(&self) -> String {
        format!("Expression({:?})", self.field.source())
    }
}

/// The toric metric built from `q(x, y)`, `A(t)`, `B(t)` and the angle.
#[pyclass(frozen)]
struct ToricMetric {
    metric: MetricField<4>,
}

type Mat4 = [[f64; 4]; 4];

#[pymethods]
impl ToricMetric {
    #[new]
    #[pyo3(signature = (q, a, b, theta, domain))]
    fn new(q: &str, a: &str, b: &str, theta: f64, domain: (f64, f64, f64, f64)) -> PyResult<Self> {
        let domain = Box2::new(domain.0, domain.1, domain.2, domain.3).map_err(py_err)?;
        let spec = ToricMetricSpec::new(
            Arc::new(compile_expression(q).map_err(py_err)?),
            Arc::new(compile_profile(a).map_err(py_err)?),
            Arc::new(compile_profile(b).map_err(py_err)?),
            theta,
        )
        .map_err(py_err)?;
        Ok(ToricMetric {
            metric: build_general(&spec, domain).map_err(py_err)?,
        })
    }

    fn metric(&self, x: f64, y: f64) -> PyResult<Mat4> {
        Ok(self.geometry(x, y)?.g)
    }

    fn ricci(&self, x: f64, y: f64) -> PyResult<Mat4> {
        Ok(self.geometry(x, y)?.ricci)
    }

    fn scalar_curvature(&self, x: f64, y: f64) -> PyResult<f64> {
        Ok(self.geometry(x, y)?.scalar)
    }

    /// `g⁻¹ Ric` (the soliton tensor with zero vector field).
    fn lambda_tensor(&self, x: f64, y: f64) -> PyResult<Mat4> {
        let v = BaseVectorField::zero().eval(x, y).map_err(py_err)?;
        Ok(self.geometry(x, y)?.lambda(&v))
    }

    /// Largest Weyl component.
    fn weyl_norm(&self, x: f64, y: f64) -> PyResult<f64> {
        let w = self.geometry(x, y)?.weyl();
        Ok(w.iter().flatten().flatten().flatten().fold(0.0f64, |m, v| m.max(v.abs())))
    }

    /// `(lambda, max_residual)` of the Einstein test on an `nx × ny` grid.
    fn einstein_residual(&self, nx: usize, ny: usize) -> PyResult<(f64, f64)> {
        let grid = Grid::new(self.metric.domain(), nx, ny).map_err(py_err)?;
        let r = einstein_residual(&self.metric, &grid).map_err(py_err)?;
        Ok((r.lambda, r.max_residual))
    }
}

impl ToricMetric {
    fn geometry(&self, x: f64, y: f64) -> PyResult<Geometry<4>> {
        Geometry::at(&self.metric, x, y).map_err(py_err)
    }
}

/// Runs a verification config given as TOML text; returns the report as a
/// JSON string.
#[pyfunction]
fn verify(config: &str) -> PyResult<String> {
    let cfg = parse_config(config).map_err(py_err)?;
    let report = run_verification(&cfg).map_err(py_err)?;
    serde_json::to_string(&report).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

fn ode_form(form: &str) -> PyResult<OdeForm> {
    match form {
        "consistent" => Ok(OdeForm::Consistent),
        "as_printed" => Ok(OdeForm::AsPrinted),
        other => Err(PyValueError::new_err(format!("unknown ODE form `{other}`"))),
    }
}

/// Residual of the case-(iv) ODE in the requested form.
#[pyfunction]
#[pyo3(signature = (a0, b0, lam, z, f, f1, f2, f3, form="consistent"))]
#[allow(clippy::too_many_arguments)]
fn ode_iv_residual(a0: f64, b0: f64, lam: f64, z: f64, f: f64, f1: f64, f2: f64, f3: f64, form: &str) -> PyResult<f64> {
    let p = OdeParamsIV::new(a0, b0, lam).with_form(ode_form(form)?);
    Ok(ode::ode_residual(&p, z, f, f1, f2, f3))
}

/// Integrates the case-(iv) ODE; returns a dict with the node columns and
/// the termination reason.
#[pyfunction]
#[pyo3(signature = (a0, b0, lam, init, z_end, form="consistent", tol=None))]
#[allow(clippy::too_many_arguments)]
fn solve_ode_iv<'py>(
    py: Python<'py>,
    a0: f64,
    b0: f64,
    lam: f64,
    init: (f64, f64, f64, f64),
    z_end: f64,
    form: &str,
    tol: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let p = OdeParamsIV::new(a0, b0, lam).with_form(ode_form(form)?);
    let state = OdeStateIV {
        z: init.0,
        f: init.1,
        f1: init.2,
        f2: init.3,
    };
    let mut cfg = IntegratorConfig::default();
    if let Some(t) = tol {
        cfg.tol = t;
    }
    let t = ode::integrate_iv(&p, &state, z_end, &cfg).map_err(py_err)?;
    let out = PyDict::new(py);
    out.set_item("z", t.nodes.iter().map(|n| n.z).collect::<Vec<_>>())?;
    out.set_item("f", t.nodes.iter().map(|n| n.f).collect::<Vec<_>>())?;
    out.set_item("f1", t.nodes.iter().map(|n| n.f1).collect::<Vec<_>>())?;
    out.set_item("f2", t.nodes.iter().map(|n| n.f2).collect::<Vec<_>>())?;
    out.set_item("f3", t.nodes.iter().map(|n| n.f3).collect::<Vec<_>>())?;
    out.set_item("termination", format!("{:?}", t.termination))?;
    out.set_item("complete", t.is_complete())?;
    Ok(out)
}

#[pymodule]
fn toric(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Expression>()?;
    m.add_class::<ToricMetric>()?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(ode_iv_residual, m)?)?;
    m.add_function(wrap_pyfunction!(solve_ode_iv, m)?)?;
    Ok(())
}

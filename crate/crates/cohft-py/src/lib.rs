//! Python bindings for the cohft verification engine.
//!
//! The module exposes three layers:
//!
//! - `Theory`: the builtin theory definitions (fields, bidegrees, which
//!   suites apply),
//! - `verify(...)`: run the named identity suites and get the reports
//!   back as plain JSON-shaped dictionaries,
//! - the `S²` localization toy model (`euler_characteristic`,
//!   `index_sum`, `t_sweep`, `aj_projection_check`).
//!
//! Reports are converted through `json.loads` so downstream code sees
//! ordinary lists and dicts rather than wrapper types.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use cohft_core::checks;
use cohft_core::field_calculus::TheoryDef;
use cohft_core::toy_model::{self, SurfaceModel, VectorField};
use cohft_core::verifier::run_suite;

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_py_json(py: Python<'_>, json: String) -> PyResult<PyObject> {
    let m = py.import_bound("json")?;
    Ok(m.call_method1("loads", (json,))?.unbind())
}

/// A builtin theory and its field content.
#[pyclass]
struct Theory {
    inner: TheoryDef,
}

#[pymethods]
impl Theory {
    /// Accepts canonical names (`dw`, `sw_u1`, `gsw_so3`, `kw`) and the
    /// aliases `sw` and `gsw`.
    #[new]
    fn new(name: &str) -> PyResult<Self> {
        let canon = checks::canonical_theory(name).map_err(err)?;
        Ok(Theory {
            inner: TheoryDef::builtin(canon).map_err(err)?,
        })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    /// `(name, ghost number, form degree)` for every field, in
    /// declaration order.
    fn fields(&self) -> Vec<(String, i64, usize)> {
        self.inner
            .fields
            .iter()
            .map(|f| (f.name.clone(), f.ghost, f.form))
            .collect()
    }

    /// Names of the suites that apply to this theory.
    fn suites(&self) -> PyResult<Vec<String>> {
        let specs = checks::standard_suites(&self.inner.name, "all").map_err(err)?;
        Ok(specs.into_iter().map(|s| s.suite).collect())
    }

    fn __repr__(&self) -> String {
        format!(
            "Theory('{}', {} fields)",
            self.inner.name,
            self.inner.fields.len()
        )
    }
}

/// Run the named suites for a theory and return the list of reports.
///
/// `suite` is one of `nilpotency`, `action`, `vector-susy`, `descent`,
/// `brst`, `kw`, or `all` (skip the non-applicable ones). Durations are
/// zeroed so the output is deterministic for a fixed seed.
#[pyfunction]
#[pyo3(signature = (theory, suite="all", trials=None, seed=None))]
fn verify(
    py: Python<'_>,
    theory: &str,
    suite: &str,
    trials: Option<usize>,
    seed: Option<u64>,
) -> PyResult<PyObject> {
    let specs = checks::standard_suites(theory, suite).map_err(err)?;
    let mut reports = Vec::new();
    for mut spec in specs {
        if let Some(n) = trials {
            spec = spec.with_trials(n);
        }
        if let Some(s) = seed {
            spec = spec.with_seed(s);
        }
        let mut rep = run_suite(&spec).map_err(err)?;
        rep.duration_ms = 0;
        reports.push(rep);
    }
    let json = serde_json::to_string(&reports).map_err(err)?;
    to_py_json(py, json)
}

/// The convention audit: every assignment of the four sign/normalization
/// toggles, with a pass flag and the first failing identity.
#[pyfunction]
#[pyo3(signature = (trials=1, seed=11))]
fn convention_audit(trials: usize, seed: u64) -> PyResult<Vec<(String, bool, Option<String>)>> {
    let rows = checks::convention_audit(trials, seed).map_err(err)?;
    Ok(rows
        .into_iter()
        .map(|r| (r.conventions.describe(), r.passed, r.failure))
        .collect())
}

/// `∫_{S²} e(t)` for the interpolating Euler form; returns
/// `(value, convergence_estimate)`.
#[pyfunction]
#[pyo3(signature = (t=0.0, vf="zero", n_polar=64, n_azimuth=128, ift=false))]
fn euler_characteristic(
    t: f64,
    vf: &str,
    n_polar: usize,
    n_azimuth: usize,
    ift: bool,
) -> PyResult<(f64, f64)> {
    let vf = VectorField::by_name(vf).map_err(err)?;
    let grid = SurfaceModel::new(n_polar, n_azimuth).map_err(err)?;
    let i = toy_model::euler_characteristic(vf, t, &grid, ift);
    Ok((i.value, i.convergence_estimate))
}

/// Sum of the Poincaré–Hopf indices over the zeros of a named vector
/// field.
#[pyfunction]
fn index_sum(vf: &str) -> PyResult<i64> {
    let vf = VectorField::by_name(vf).map_err(err)?;
    toy_model::index_sum(vf).map_err(err)
}

/// Evaluate the interpolating integral at several `t` values; returns
/// `(rows, spread)` with one `(t, value, convergence_estimate)` row per
/// input.
#[pyfunction]
#[pyo3(signature = (ts, vf="height", n_polar=64, n_azimuth=128, ift=false))]
fn t_sweep(
    ts: Vec<f64>,
    vf: &str,
    n_polar: usize,
    n_azimuth: usize,
    ift: bool,
) -> PyResult<(Vec<(f64, f64, f64)>, f64)> {
    let vf = VectorField::by_name(vf).map_err(err)?;
    let grid = SurfaceModel::new(n_polar, n_azimuth).map_err(err)?;
    let rows = toy_model::t_sweep(vf, &ts, &grid, ift);
    let spread = toy_model::sweep_spread(&rows);
    let out = rows
        .into_iter()
        .map(|r| (r.t, r.value, r.convergence_estimate))
        .collect();
    Ok((out, spread))
}

/// Compare `∫_{SO(3)} π*e(t) ∧ γ` against the base integral; returns a
/// dict with `lhs`, `rhs`, `relative_error`, `fiber_normalization`.
#[pyfunction]
#[pyo3(signature = (t=0.0, vf="double", n_polar=32, n_azimuth=64, n_fiber=16, ift=false))]
fn aj_projection_check(
    py: Python<'_>,
    t: f64,
    vf: &str,
    n_polar: usize,
    n_azimuth: usize,
    n_fiber: usize,
    ift: bool,
) -> PyResult<PyObject> {
    let vf = VectorField::by_name(vf).map_err(err)?;
    let grid = SurfaceModel::new(n_polar, n_azimuth).map_err(err)?;
    let rep = toy_model::aj_projection_check(vf, t, &grid, n_fiber, ift);
    let json = serde_json::to_string(&rep).map_err(err)?;
    to_py_json(py, json)
}

#[pymodule]
fn cohft(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Theory>()?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(convention_audit, m)?)?;
    m.add_function(wrap_pyfunction!(euler_characteristic, m)?)?;
    m.add_function(wrap_pyfunction!(index_sum, m)?)?;
    m.add_function(wrap_pyfunction!(t_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(aj_projection_check, m)?)?;
    Ok(())
}

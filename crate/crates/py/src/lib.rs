//! Python bindings. Structured results cross the boundary as JSON and are
//! decoded with the standard `json` module, so Python sees plain dicts and
//! lists.

use msclimate::bifurcation::{self, Axis, SweepModel, TraceConfig};
use msclimate::equilibria::{self, EquilibriumLabel, Region3Thresholds, Variant};
use msclimate::integrate::{self, CensusConfig, CycleConfig, Direction, IntegratorConfig, XbarConfig};
use msclimate::melnikov;
use msclimate::models::{AsymParams, ModelSpec};
use msclimate::Error;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

fn py_err(e: Error) -> PyErr {
    match e {
        Error::InvalidParams(_) | Error::InvalidConfig(_) | Error::BoundaryPoint { .. } => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn to_py<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

fn from_py<T: serde::de::DeserializeOwned>(obj: &Bound<'_, PyAny>) -> PyResult<T> {
    let text: String = obj.py().import("json")?.call_method1("dumps", (obj,))?.extract()?;
    serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))
}

/// `{"model": "ms", "p": .., "q": .., "r": .., "s": ..}` and the like.
fn spec(model: &Bound<'_, PyAny>) -> PyResult<ModelSpec> {
    let spec: ModelSpec = from_py(model)?;
    spec.validate().map_err(py_err)?;
    Ok(spec)
}

fn variant(name: &str) -> PyResult<Variant> {
    match name {
        "sym" => Ok(Variant::Sym),
        "asym" => Ok(Variant::Asym),
        other => Err(PyValueError::new_err(format!("unknown variant {other}"))),
    }
}

fn label(name: &str) -> PyResult<EquilibriumLabel> {
    match name {
        "P0" => Ok(EquilibriumLabel::P0),
        "P1" => Ok(EquilibriumLabel::P1),
        "P2" => Ok(EquilibriumLabel::P2),
        other => Err(PyValueError::new_err(format!("unknown equilibrium {other}"))),
    }
}

/// Trajectory as `{"times": [...], "states": [[...], ...], ...}`.
#[pyfunction]
#[pyo3(signature = (model, x0, t_end=200.0, abs_tol=1e-9, rel_tol=1e-9))]
fn simulate<'py>(
    py: Python<'py>,
    model: &Bound<'py, PyAny>,
    x0: Vec<f64>,
    t_end: f64,
    abs_tol: f64,
    rel_tol: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let spec = spec(model)?;
    let cfg = IntegratorConfig::rk45(abs_tol, rel_tol, t_end);
    let rec = py
        .detach(|| integrate::integrate_model(&spec, &x0, &cfg, None))
        .map_err(py_err)?;
    to_py(py, &rec)
}

/// Limit cycle reached from `x0` (reverse time when `reverse`).
#[pyfunction]
#[pyo3(signature = (model, x0, reverse=false))]
fn estimate_cycle<'py>(py: Python<'py>, model: &Bound<'py, PyAny>, x0: Vec<f64>, reverse: bool) -> PyResult<Bound<'py, PyAny>> {
    let spec = spec(model)?;
    let dir = if reverse { Direction::Reverse } else { Direction::Forward };
    let c = py
        .detach(|| integrate::estimate_cycle_model(&spec, &x0, dir, &CycleConfig::default()))
        .map_err(py_err)?;
    to_py(py, &c)
}

/// `lim sup x(t)` from `x0`.
#[pyfunction]
fn xbar<'py>(py: Python<'py>, model: &Bound<'py, PyAny>, x0: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    let spec = spec(model)?;
    let e = py
        .detach(|| integrate::xbar_model(&spec, &x0, &XbarConfig::default()))
        .map_err(py_err)?;
    to_py(py, &e)
}

#[pyfunction]
fn find_equilibria<'py>(py: Python<'py>, model: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let eqs = equilibria::find_equilibria(&spec(model)?).map_err(py_err)?;
    to_py(py, &eqs)
}

/// Region label of `(p, r)`; raises `ValueError` on a boundary.
#[pyfunction]
#[pyo3(signature = (variant_name, p, r, s=0.0, subregions=false))]
fn region_classify(variant_name: &str, p: f64, r: f64, s: f64, subregions: bool) -> PyResult<String> {
    let params = AsymParams::new(p, r, s).map_err(py_err)?;
    let thresholds = if subregions {
        Some(Region3Thresholds {
            homoclinic: melnikov::HOMOCLINIC_THRESHOLD,
            fold: melnikov::find_fold().map_err(py_err)?.1,
        })
    } else {
        None
    };
    let l = equilibria::region_classify(&params, variant(variant_name)?, thresholds.as_ref()).map_err(py_err)?;
    Ok(l.to_string())
}

#[pyfunction]
fn census_attractors<'py>(py: Python<'py>, model: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
    let spec = spec(model)?;
    let s = py
        .detach(|| integrate::census_attractors(&spec, &CensusConfig::default()))
        .map_err(py_err)?;
    to_py(py, &s)
}

/// `R(x) = I₂/I₀` for `μ = mu_sign`.
#[pyfunction]
#[pyo3(signature = (x, mu_sign=1))]
fn r_of_x(x: f64, mu_sign: i32) -> PyResult<f64> {
    melnikov::r_of_x(x, mu_sign).map_err(py_err)
}

/// `(x*, λ*)`.
#[pyfunction]
fn find_fold() -> PyResult<(f64, f64)> {
    melnikov::find_fold().map_err(py_err)
}

#[pyfunction]
#[pyo3(signature = (lambda_, mu_sign=1))]
fn cycle_census_unfolded<'py>(py: Python<'py>, lambda_: f64, mu_sign: i32) -> PyResult<Bound<'py, PyAny>> {
    let c = melnikov::cycle_census_unfolded(lambda_, mu_sign).map_err(py_err)?;
    to_py(py, &c)
}

/// Sweep grid with `values` row-major, rows indexed by `r`.
#[pyfunction]
#[pyo3(signature = (model, p_axis, r_axis, seed=0))]
fn sweep_xbar<'py>(
    py: Python<'py>,
    model: &Bound<'py, PyAny>,
    p_axis: (f64, f64, usize),
    r_axis: (f64, f64, usize),
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let model: SweepModel = from_py(model)?;
    let pa = Axis::new(p_axis.0, p_axis.1, p_axis.2).map_err(py_err)?;
    let ra = Axis::new(r_axis.0, r_axis.1, r_axis.2).map_err(py_err)?;
    let g = py
        .detach(|| bifurcation::sweep_xbar(model, pa, ra, seed, &XbarConfig::default()))
        .map_err(py_err)?;
    to_py(py, &g)
}

#[pyfunction]
#[pyo3(signature = (variant_name, p_from, p_to, step, s=0.0, focus="P1"))]
fn trace_homoclinic<'py>(
    py: Python<'py>,
    variant_name: &str,
    p_from: f64,
    p_to: f64,
    step: f64,
    s: f64,
    focus: &str,
) -> PyResult<Bound<'py, PyAny>> {
    let (v, f) = (variant(variant_name)?, label(focus)?);
    let c = py
        .detach(|| bifurcation::trace_homoclinic(v, s, (p_from, p_to), step, f, &TraceConfig::default()))
        .map_err(py_err)?;
    to_py(py, &c)
}

#[pyfunction]
#[pyo3(signature = (variant_name, p_from, p_to, step, s=0.0))]
fn trace_cycle_fold<'py>(
    py: Python<'py>,
    variant_name: &str,
    p_from: f64,
    p_to: f64,
    step: f64,
    s: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let v = variant(variant_name)?;
    let c = py
        .detach(|| bifurcation::trace_cycle_fold(v, s, (p_from, p_to), step, &TraceConfig::default()))
        .map_err(py_err)?;
    to_py(py, &c)
}

/// Runs the command-line tool with `argv` (subcommand first) and returns the
/// exit code.
#[pyfunction]
fn cli(argv: Vec<String>) -> i32 {
    let full = std::iter::once("msclimate".to_string()).chain(argv).collect();
    msclimate::cli::run(full)
}

#[pymodule]
fn msclimate_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_cycle, m)?)?;
    m.add_function(wrap_pyfunction!(xbar, m)?)?;
    m.add_function(wrap_pyfunction!(find_equilibria, m)?)?;
    m.add_function(wrap_pyfunction!(region_classify, m)?)?;
    m.add_function(wrap_pyfunction!(census_attractors, m)?)?;
    m.add_function(wrap_pyfunction!(r_of_x, m)?)?;
    m.add_function(wrap_pyfunction!(find_fold, m)?)?;
    m.add_function(wrap_pyfunction!(cycle_census_unfolded, m)?)?;
    m.add_function(wrap_pyfunction!(sweep_xbar, m)?)?;
    m.add_function(wrap_pyfunction!(trace_homoclinic, m)?)?;
    m.add_function(wrap_pyfunction!(trace_cycle_fold, m)?)?;
    m.add_function(wrap_pyfunction!(cli, m)?)?;
    m.add("HOMOCLINIC_THRESHOLD", melnikov::HOMOCLINIC_THRESHOLD)?;
    Ok(())
}

//! Python bindings: model points, bound reports and the core formulas.

use gausshcrb::bounds::{self, FisherMatrix};
use gausshcrb::fock::{self, TruncationPolicy};
use gausshcrb::hcrb::{self, MinimizerConfig, SubspaceFreeParams};
use gausshcrb::{Error, Model};
use nalgebra::Matrix3;
use num_complex::Complex64;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

type Matrix = Vec<Vec<f64>>;

fn to_py(e: Error) -> PyErr {
    match e {
        Error::NonConvergence(_) | Error::TruncationBudget { .. } => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn rows(m: &Matrix3<f64>) -> Matrix {
    (0..3).map(|i| (0..3).map(|j| m[(i, j)]).collect()).collect()
}

fn fisher_rows(f: &FisherMatrix) -> Matrix {
    rows(f.entries())
}

/// A point `(θ₁, θ₂, r)` of the single- or two-mode model.
#[pyclass(name = "ModelPoint", frozen, from_py_object)]
#[derive(Clone)]
struct PyModelPoint(gausshcrb::ModelPoint);

#[pymethods]
impl PyModelPoint {
    #[new]
    #[pyo3(signature = (model, r, theta1 = 0.0, theta2 = 0.0))]
    fn new(model: &str, r: f64, theta1: f64, theta2: f64) -> PyResult<Self> {
        let model: Model = model.parse().map_err(to_py)?;
        Ok(Self(gausshcrb::ModelPoint::new(model, [theta1, theta2, r]).map_err(to_py)?))
    }

    #[getter]
    fn model(&self) -> &'static str {
        self.0.model().name()
    }

    #[getter]
    fn theta(&self) -> (f64, f64, f64) {
        let [a, b, c] = self.0.theta();
        (a, b, c)
    }

    #[getter]
    fn r(&self) -> f64 {
        self.0.r()
    }

    fn __repr__(&self) -> String {
        let [a, b, c] = self.0.theta();
        format!("ModelPoint(model='{}', r={c}, theta1={a}, theta2={b})", self.0.model().name())
    }
}

/// Bounds at one model point.
#[pyclass(name = "BoundsReport", frozen)]
struct PyBoundsReport(gausshcrb::BoundsReport);

#[pymethods]
impl PyBoundsReport {
    #[getter]
    fn c_s(&self) -> f64 {
        self.0.c_s
    }
    #[getter]
    fn c_h(&self) -> f64 {
        self.0.c_h
    }
    #[getter]
    fn c_h_closed(&self) -> f64 {
        self.0.c_h_closed
    }
    #[getter]
    fn r_quantumness(&self) -> f64 {
        self.0.r_quantumness
    }
    #[getter]
    fn gendyne_best(&self) -> Option<(f64, f64)> {
        self.0.gendyne_best.map(|g| (g.z_opt, g.f_opt))
    }
    #[getter]
    fn heterodyne(&self) -> Option<f64> {
        self.0.heterodyne
    }
    #[getter]
    fn double_homodyne(&self) -> Option<f64> {
        self.0.double_homodyne
    }

    fn __repr__(&self) -> String {
        format!("BoundsReport(c_s={}, c_h={}, r_quantumness={})", self.0.c_s, self.0.c_h, self.0.r_quantumness)
    }
}

fn config(restarts: usize, tol: f64, seed: u64) -> MinimizerConfig {
    MinimizerConfig { restarts, tol, seed, ..Default::default() }
}

#[pyfunction]
#[pyo3(signature = (point, restarts = 24, tol = 1e-10, seed = 0))]
fn bounds_report(point: &PyModelPoint, restarts: usize, tol: f64, seed: u64) -> PyResult<PyBoundsReport> {
    gausshcrb::bounds_report(&point.0, &config(restarts, tol, seed)).map(PyBoundsReport).map_err(to_py)
}

/// Closed-form QFI matrix.
#[pyfunction]
fn qfi_matrix(point: &PyModelPoint) -> Matrix {
    fisher_rows(&bounds::qfi_matrix(&point.0))
}

#[pyfunction]
fn uhlmann_matrix(point: &PyModelPoint) -> Matrix {
    rows(bounds::uhlmann_matrix(&point.0).entries())
}

#[pyfunction]
fn sld_crb(point: &PyModelPoint) -> f64 {
    bounds::sld_crb(&point.0)
}

#[pyfunction]
fn quantumness(point: &PyModelPoint) -> PyResult<f64> {
    bounds::quantumness(&bounds::qfi_matrix(&point.0), &bounds::uhlmann_matrix(&point.0)).map_err(to_py)
}

#[pyfunction]
fn gendyne_fisher_single(r: f64, z: f64) -> PyResult<Matrix> {
    bounds::gendyne_fisher_single(r, z).map(|f| fisher_rows(&f)).map_err(to_py)
}

#[pyfunction]
fn gendyne_precision_single(r: f64, z: f64) -> PyResult<f64> {
    bounds::gendyne_precision_single(r, z).map_err(to_py)
}

#[pyfunction]
fn heterodyne_precision(r: f64) -> f64 {
    bounds::heterodyne_precision(r)
}

#[pyfunction]
fn double_homodyne_fisher_two(r: f64) -> PyResult<Matrix> {
    bounds::double_homodyne_fisher_two(r).map(|f| fisher_rows(&f)).map_err(to_py)
}

#[pyfunction]
fn hcrb_closed(point: &PyModelPoint) -> f64 {
    hcrb::hcrb_closed(&point.0)
}

/// Numerical Holevo bound; returns the minimum and its free parameters.
#[pyfunction]
#[pyo3(signature = (point, restarts = 24, tol = 1e-10, seed = 0))]
fn minimize_h(point: &PyModelPoint, restarts: usize, tol: f64, seed: u64) -> PyResult<(f64, Vec<f64>)> {
    let est = hcrb::minimize_h(&point.0, &config(restarts, tol, seed)).map_err(to_py)?;
    Ok((est.value, est.argmin.values().to_vec()))
}

/// `Z` for the free parameters `values` (3 single-mode, 15 two-mode).
#[pyfunction]
fn z_matrix(model: &str, r: f64, values: Vec<f64>) -> PyResult<Vec<Vec<Complex64>>> {
    let model: Model = model.parse().map_err(to_py)?;
    let fp = SubspaceFreeParams::new(model, values).map_err(to_py)?;
    let z = hcrb::z_matrix(r, &fp).map_err(to_py)?;
    Ok((0..3).map(|i| (0..3).map(|j| z.entries()[(i, j)]).collect()).collect())
}

#[pyfunction]
fn h_value(model: &str, r: f64, values: Vec<f64>) -> PyResult<f64> {
    let model: Model = model.parse().map_err(to_py)?;
    let fp = SubspaceFreeParams::new(model, values).map_err(to_py)?;
    Ok(hcrb::h_value(&hcrb::z_matrix(r, &fp).map_err(to_py)?))
}

#[pyfunction]
fn locally_unbiased_residual(point: &PyModelPoint, values: Vec<f64>) -> PyResult<f64> {
    let fp = SubspaceFreeParams::new(point.0.model(), values).map_err(to_py)?;
    hcrb::locally_unbiased_residual(&point.0, &fp).map_err(to_py)
}

#[pyfunction]
fn gendyne_gap(z: f64, r: f64) -> PyResult<f64> {
    hcrb::gendyne_gap(z, r).map_err(to_py)
}

/// `(z_opt, f_opt)` at squeezing `r`.
#[pyfunction]
fn optimal_gendyne(r: f64) -> PyResult<(f64, f64)> {
    hcrb::optimal_gendyne(r).map(|o| (o.z_opt, o.f_opt)).map_err(to_py)
}

fn policy(model: Model, trunc: Option<usize>) -> PyResult<TruncationPolicy> {
    match trunc {
        Some(n) => TruncationPolicy::with_n(n).map_err(to_py),
        None => Ok(TruncationPolicy::for_model(model)),
    }
}

/// Fock-space oracle `(Q, D)` from finite differences.
#[pyfunction]
#[pyo3(signature = (point, trunc = None))]
fn oracle_qfi_uhlmann(point: &PyModelPoint, trunc: Option<usize>) -> PyResult<(Matrix, Matrix)> {
    let pol = policy(point.0.model(), trunc)?;
    let (q, d) = fock::oracle_qfi_uhlmann(&point.0, &pol).map_err(to_py)?;
    Ok((rows(&q), rows(&d)))
}

#[pyfunction]
#[pyo3(signature = (point, trunc = None))]
fn bs_factorization_check(point: &PyModelPoint, trunc: Option<usize>) -> PyResult<f64> {
    let pol = match trunc {
        Some(n) => TruncationPolicy::with_n(n).map_err(to_py)?,
        None => TruncationPolicy::factorization_default(),
    };
    fock::bs_factorization_check(&point.0, &pol).map_err(to_py)
}

#[pymodule]
fn gausshcrb_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyModelPoint>()?;
    m.add_class::<PyBoundsReport>()?;
    m.add_function(wrap_pyfunction!(bounds_report, m)?)?;
    m.add_function(wrap_pyfunction!(qfi_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(uhlmann_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(sld_crb, m)?)?;
    m.add_function(wrap_pyfunction!(quantumness, m)?)?;
    m.add_function(wrap_pyfunction!(gendyne_fisher_single, m)?)?;
    m.add_function(wrap_pyfunction!(gendyne_precision_single, m)?)?;
    m.add_function(wrap_pyfunction!(heterodyne_precision, m)?)?;
    m.add_function(wrap_pyfunction!(double_homodyne_fisher_two, m)?)?;
    m.add_function(wrap_pyfunction!(hcrb_closed, m)?)?;
    m.add_function(wrap_pyfunction!(minimize_h, m)?)?;
    m.add_function(wrap_pyfunction!(z_matrix, m)?)?;
    m.add_function(wrap_pyfunction!(h_value, m)?)?;
    m.add_function(wrap_pyfunction!(locally_unbiased_residual, m)?)?;
    m.add_function(wrap_pyfunction!(gendyne_gap, m)?)?;
    m.add_function(wrap_pyfunction!(optimal_gendyne, m)?)?;
    m.add_function(wrap_pyfunction!(oracle_qfi_uhlmann, m)?)?;
    m.add_function(wrap_pyfunction!(bs_factorization_check, m)?)?;
    Ok(())
}

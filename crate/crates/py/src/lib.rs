//! Python bindings. Matrices cross the boundary as [`Matrix`] and
//! [`Density`] objects built from nested lists of Python `complex`; results
//! come back as plain dictionaries.

use std::collections::HashMap;

use ncmoment::dilations::halmos_dilation;
use ncmoment::geometry::{chebyshev_radius, smallest_enclosing_circle, spread, ChebyshevOptions};
use ncmoment::harness::{lemma1_bruteforce, run_examples, verify_suite, VerifyOptions};
use ncmoment::json;
use ncmoment::linalg::{self, ComplexMatrix, RankOneProjection};
use ncmoment::moments;
use ncmoment::pinching::{self, Partition};
use ncmoment::states::{self, MuOptions};
use ncmoment::ToleranceConfig;
use num_complex::Complex64;
use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use serde::Serialize;

fn err(e: ncmoment::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Round-trips a serializable result through `json.loads`.
fn to_py<'py, T: Serialize + ?Sized>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = json::to_string(value).map_err(err)?;
    py.import("json")?.call_method1("loads", (text,))
}

fn tolerances(overrides: Option<HashMap<String, f64>>) -> PyResult<ToleranceConfig> {
    ToleranceConfig::default()
        .with_overrides(overrides.iter().flatten().map(|(k, v)| (k.as_str(), *v)))
        .map_err(err)
}

/// Square complex matrix.
#[pyclass(frozen, skip_from_py_object, module = "pyncmoment")]
#[derive(Clone)]
pub struct Matrix {
    inner: ComplexMatrix,
}

#[pymethods]
impl Matrix {
    #[new]
    fn new(rows: Vec<Vec<Complex64>>) -> PyResult<Self> {
        Ok(Self {
            inner: ComplexMatrix::from_rows(rows).map_err(err)?,
        })
    }

    #[staticmethod]
    fn identity(n: usize) -> Self {
        Self {
            inner: ComplexMatrix::identity(n),
        }
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(Self {
            inner: json::matrix_from_str(text).map_err(err)?,
        })
    }

    fn to_json(&self) -> PyResult<String> {
        json::matrix_to_string(&self.inner).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn rows(&self) -> Vec<Vec<Complex64>> {
        self.inner.rows()
    }

    fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint(),
        }
    }

    fn trace(&self) -> Complex64 {
        self.inner.trace()
    }

    fn operator_norm(&self) -> PyResult<f64> {
        linalg::operator_norm(&self.inner).map_err(err)
    }

    fn eigenvalues(&self) -> PyResult<Vec<Complex64>> {
        linalg::eig_general(&self.inner).map_err(err)
    }

    fn __repr__(&self) -> String {
        format!("Matrix(n={})", self.inner.n())
    }
}

/// Positive semidefinite matrix of unit trace.
#[pyclass(frozen, skip_from_py_object, module = "pyncmoment")]
#[derive(Clone)]
pub struct Density {
    inner: linalg::Density,
}

#[pymethods]
impl Density {
    #[new]
    #[pyo3(signature = (rows, tolerances=None))]
    fn new(rows: Vec<Vec<Complex64>>, tolerances: Option<HashMap<String, f64>>) -> PyResult<Self> {
        let tol = self::tolerances(tolerances)?;
        let m = ComplexMatrix::from_rows(rows).map_err(err)?;
        Ok(Self {
            inner: linalg::Density::new(m, &tol).map_err(err)?,
        })
    }

    #[staticmethod]
    fn maximally_mixed(n: usize) -> Self {
        Self {
            inner: linalg::Density::maximally_mixed(n),
        }
    }

    /// `x x*` for the normalized `vector`.
    #[staticmethod]
    fn pure(vector: Vec<Complex64>) -> PyResult<Self> {
        Ok(Self {
            inner: RankOneProjection::normalized(vector).map_err(err)?.to_density(),
        })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    fn matrix(&self) -> Matrix {
        Matrix {
            inner: self.inner.as_matrix().clone(),
        }
    }

    fn expectation(&self, a: PyRef<'_, Matrix>) -> Complex64 {
        self.inner.expectation(&a.inner)
    }

    fn __repr__(&self) -> String {
        format!("Density(n={})", self.inner.n())
    }
}

#[pyfunction]
#[pyo3(signature = (d, a, p, tolerances=None))]
fn central_moment<'py>(
    py: Python<'py>,
    d: PyRef<'py, Density>,
    a: PyRef<'py, Matrix>,
    p: f64,
    tolerances: Option<HashMap<String, f64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let tol = self::tolerances(tolerances)?;
    to_py(py, &moments::central_moment_with(&d.inner, &a.inner, p, &tol).map_err(err)?)
}

#[pyfunction]
fn tracial_central_moment<'py>(py: Python<'py>, a: PyRef<'py, Matrix>, p: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &moments::tracial_central_moment(&a.inner, p).map_err(err)?)
}

#[pyfunction]
fn bernoulli_b<'py>(py: Python<'py>, p: f64) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &moments::bernoulli_b(p).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (a, p, restarts=64, seed=0))]
fn mu_p<'py>(py: Python<'py>, a: PyRef<'py, Matrix>, p: f64, restarts: usize, seed: u64) -> PyResult<Bound<'py, PyAny>> {
    let opts = MuOptions {
        restarts,
        seed,
        ..Default::default()
    };
    to_py(py, &states::mu_p(&a.inner, p, &opts).map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (d, a, p, tolerances=None))]
fn reduce_to_projection<'py>(
    py: Python<'py>,
    d: PyRef<'py, Density>,
    a: PyRef<'py, Matrix>,
    p: f64,
    tolerances: Option<HashMap<String, f64>>,
) -> PyResult<Bound<'py, PyAny>> {
    let tol = self::tolerances(tolerances)?;
    to_py(py, &states::reduce_to_projection(&d.inner, &a.inner, p, &tol).map_err(err)?)
}

#[pyfunction(name = "chebyshev_radius")]
fn py_chebyshev_radius<'py>(py: Python<'py>, a: PyRef<'py, Matrix>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &chebyshev_radius(&a.inner, &ChebyshevOptions::default()).map_err(err)?)
}

#[pyfunction(name = "spread")]
fn py_spread<'py>(py: Python<'py>, a: PyRef<'py, Matrix>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &spread(&a.inner).map_err(err)?)
}

#[pyfunction(name = "smallest_enclosing_circle")]
fn py_smallest_enclosing_circle<'py>(py: Python<'py>, points: Vec<Complex64>) -> PyResult<Bound<'py, PyAny>> {
    to_py(py, &smallest_enclosing_circle(&points).map_err(err)?)
}

#[pyfunction(name = "halmos_dilation")]
fn py_halmos_dilation(a: PyRef<'_, Matrix>) -> PyResult<Matrix> {
    let pair = halmos_dilation(&a.inner, &ToleranceConfig::default()).map_err(err)?;
    Ok(Matrix { inner: pair.dilated })
}

/// `blocks` uses the 1-based `"1,2|3"` syntax; `None` means singletons.
#[pyfunction]
#[pyo3(signature = (a, blocks=None))]
fn conditional_expectation(a: PyRef<'_, Matrix>, blocks: Option<&str>) -> PyResult<Matrix> {
    let n = a.inner.n();
    let part = match blocks {
        Some(spec) => Partition::parse(n, spec).map_err(err)?,
        None => Partition::singletons(n),
    };
    Ok(Matrix {
        inner: pinching::conditional_expectation(&a.inner, &part).map_err(err)?,
    })
}

#[pyfunction]
#[pyo3(signature = (suite="all", trials=1000, dims=vec![2, 4, 8], ps=vec![1.0, 2.0, 4.0], seed=0))]
fn verify<'py>(
    py: Python<'py>,
    suite: &str,
    trials: usize,
    dims: Vec<usize>,
    ps: Vec<f64>,
    seed: u64,
) -> PyResult<Bound<'py, PyAny>> {
    let reports = verify_suite(
        suite,
        trials,
        &dims,
        &ps,
        seed,
        &ToleranceConfig::default(),
        &VerifyOptions::default(),
    )
    .map_err(err)?;
    to_py(py, &reports)
}

#[pyfunction]
fn examples(py: Python<'_>) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &run_examples().map_err(err)?)
}

#[pyfunction]
#[pyo3(signature = (resolution=200))]
fn lemma1(py: Python<'_>, resolution: usize) -> PyResult<Bound<'_, PyAny>> {
    to_py(py, &lemma1_bruteforce(resolution).map_err(err)?)
}

#[pymodule]
pub fn pyncmoment(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Matrix>()?;
    m.add_class::<Density>()?;
    m.add_function(wrap_pyfunction!(central_moment, m)?)?;
    m.add_function(wrap_pyfunction!(tracial_central_moment, m)?)?;
    m.add_function(wrap_pyfunction!(bernoulli_b, m)?)?;
    m.add_function(wrap_pyfunction!(mu_p, m)?)?;
    m.add_function(wrap_pyfunction!(reduce_to_projection, m)?)?;
    m.add_function(wrap_pyfunction!(py_chebyshev_radius, m)?)?;
    m.add_function(wrap_pyfunction!(py_spread, m)?)?;
    m.add_function(wrap_pyfunction!(py_smallest_enclosing_circle, m)?)?;
    m.add_function(wrap_pyfunction!(py_halmos_dilation, m)?)?;
    m.add_function(wrap_pyfunction!(conditional_expectation, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(examples, m)?)?;
    m.add_function(wrap_pyfunction!(lemma1, m)?)?;
    Ok(())
}

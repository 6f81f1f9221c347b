//! Python module `pyacdg`: run configurations, forward solves and the diagnostics, with
//! results handed back as plain dicts and lists.

use std::path::PathBuf;

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use serde::Serialize;

use acdg::diagnostics::compute_norms;
use acdg::experiments::{self, Refine, RunConfig};
use acdg::time::characteristic::discrete_characteristic;
use acdg::{DgSolution, Error};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Config(_) => PyValueError::new_err(experiments::error_json(&e)),
        _ => PyRuntimeError::new_err(experiments::error_json(&e)),
    }
}

/// Serialize to JSON and parse with the `json` module.
fn to_object<'py, T: Serialize>(py: Python<'py>, value: &T) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A validated run configuration (same JSON schema as the CLI).
#[pyclass(name = "RunConfig", from_py_object)]
#[derive(Clone)]
struct PyRunConfig {
    inner: RunConfig,
}

#[pymethods]
impl PyRunConfig {
    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyRunConfig {
            inner: RunConfig::from_json(text).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_path(path: PathBuf) -> PyResult<Self> {
        Ok(PyRunConfig {
            inner: RunConfig::from_path(&path).map_err(to_py)?,
        })
    }

    fn to_json(&self) -> String {
        self.inner.to_json()
    }

    fn hash(&self) -> String {
        self.inner.hash()
    }

    /// Copy with a different ε.
    fn with_epsilon(&self, epsilon: f64) -> PyResult<Self> {
        let mut inner = self.inner.clone();
        inner.epsilon = epsilon;
        inner.validate().map_err(to_py)?;
        Ok(PyRunConfig { inner })
    }

    fn __repr__(&self) -> String {
        format!("RunConfig(hash={})", self.inner.hash())
    }
}

/// A forward dG solution.
#[pyclass(name = "Solution")]
struct PySolution {
    inner: DgSolution,
}

#[pymethods]
impl PySolution {
    #[getter]
    fn n_slabs(&self) -> usize {
        self.inner.n_slabs()
    }

    #[getter]
    fn free_dofs(&self) -> usize {
        self.inner.space.free_count()
    }

    #[getter]
    fn time_degree(&self) -> usize {
        self.inner.basis.degree()
    }

    /// Slab endpoints `t_0 < … < t_N`.
    fn times(&self) -> Vec<f64> {
        self.inner.partition.endpoints().to_vec()
    }

    /// Coordinates of the free (interior) dofs.
    fn dof_coordinates(&self) -> Vec<(f64, f64)> {
        let sp = &self.inner.space;
        sp.free_dofs().iter().map(|&d| (sp.dof_coordinates()[d][0], sp.dof_coordinates()[d][1])).collect()
    }

    /// Free-dof coefficients of `u_h(t)`; left-continuous at slab endpoints.
    fn value_at(&self, t: f64) -> PyResult<Vec<f64>> {
        let p = &self.inner.partition;
        if !(p.initial_time()..=p.final_time()).contains(&t) {
            return Err(PyValueError::new_err(format!("t = {t} outside the time interval")));
        }
        Ok(self.inner.value_at_time(t))
    }

    /// Node coefficients `[j][dof]` of slab `n`.
    fn slab_coefficients(&self, n: usize) -> PyResult<Vec<Vec<f64>>> {
        if n >= self.inner.n_slabs() {
            return Err(PyValueError::new_err(format!("slab {n} out of range")));
        }
        Ok(self.inner.slabs[n].coefficients.clone())
    }

    /// Norms of `u_h` (no reference).
    fn norms<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        to_object(py, &compute_norms(&self.inner, None).map_err(to_py)?)
    }
}

/// Forward solve. Returns `(solution, norms)`; norms are error norms when the problem is manufactured.
#[pyfunction]
fn solve<'py>(py: Python<'py>, config: &PyRunConfig) -> PyResult<(PySolution, Bound<'py, PyAny>)> {
    let (sol, norms) = py.detach(|| experiments::run_solve(&config.inner)).map_err(to_py)?;
    Ok((PySolution { inner: sol }, to_object(py, &norms)?))
}

/// Identity checks; a dict with `checks`, `identities` and `dual_stability`.
#[pyfunction]
fn verify<'py>(py: Python<'py>, config: &PyRunConfig) -> PyResult<Bound<'py, PyAny>> {
    let report = py.detach(|| experiments::run_verify(&config.inner)).map_err(to_py)?;
    to_object(py, &report)
}

/// Refinement ladder; `refine` is "time", "space" or "both".
#[pyfunction]
#[pyo3(signature = (config, levels = 4, refine = "both"))]
fn convergence<'py>(py: Python<'py>, config: &PyRunConfig, levels: usize, refine: &str) -> PyResult<Bound<'py, PyAny>> {
    let refine = match refine {
        "time" => Refine::Time,
        "space" => Refine::Space,
        "both" => Refine::Both,
        other => return Err(PyValueError::new_err(format!("refine must be time, space or both (got {other:?})"))),
    };
    let table = py
        .detach(|| experiments::run_convergence(&config.inner, levels, refine, |_| Ok(())))
        .map_err(to_py)?;
    to_object(py, &table)
}

#[pyfunction]
fn stability_sweep<'py>(py: Python<'py>, config: &PyRunConfig, epsilons: Vec<f64>) -> PyResult<Bound<'py, PyAny>> {
    let out = py
        .detach(|| experiments::run_stability_sweep(&config.inner, &epsilons))
        .map_err(to_py)?;
    to_object(py, &out)
}

/// `λ_min` of the linearized operator at every slab endpoint.
#[pyfunction]
fn spectrum<'py>(py: Python<'py>, config: &PyRunConfig) -> PyResult<Bound<'py, PyAny>> {
    let trace = py.detach(|| experiments::run_spectrum(&config.inner)).map_err(to_py)?;
    to_object(py, &trace)
}

/// Monomial coefficients of the discrete characteristic polynomial `ρ(·; t̂)` of degree `k`.
#[pyfunction]
fn characteristic(k: usize, t_hat: f64) -> PyResult<Vec<f64>> {
    Ok(discrete_characteristic(k, t_hat).map_err(to_py)?.coefficients)
}

/// Ids of the built-in problems.
#[pyfunction]
fn problems() -> Vec<&'static str> {
    experiments::REGISTRY.iter().map(|e| e.id).collect()
}

#[pymodule]
fn pyacdg(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRunConfig>()?;
    m.add_class::<PySolution>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add_function(wrap_pyfunction!(convergence, m)?)?;
    m.add_function(wrap_pyfunction!(stability_sweep, m)?)?;
    m.add_function(wrap_pyfunction!(spectrum, m)?)?;
    m.add_function(wrap_pyfunction!(characteristic, m)?)?;
    m.add_function(wrap_pyfunction!(problems, m)?)?;
    Ok(())
}

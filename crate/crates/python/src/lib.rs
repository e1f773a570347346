//! Python bindings: simulation, detection and analysis of run manifests.

use std::path::PathBuf;

use oos_core::cli::{self, RunInputs};
use oos_core::detect::{run_suite, SuiteConfig};
use oos_core::simcore::{self, Scenario, Trajectory as CoreTrajectory};
use oos_core::NetworkCase;
use pyo3::exceptions::{PyIOError, PyValueError};
use pyo3::prelude::*;

fn py_err(e: oos_core::Error) -> PyErr {
    match e {
        oos_core::Error::Io(e) => PyIOError::new_err(e.to_string()),
        e => PyValueError::new_err(e.to_string()),
    }
}

fn json_to_py<'py>(py: Python<'py>, text: &str) -> PyResult<Bound<'py, PyAny>> {
    py.import("json")?.call_method1("loads", (text,))
}

/// Simulated trajectory.
#[pyclass(module = "oos", frozen)]
struct Trajectory {
    inner: CoreTrajectory,
}

#[pymethods]
impl Trajectory {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Sample times [s].
    #[getter]
    fn t(&self) -> Vec<f64> {
        self.inner.times()
    }

    /// Rotor angles [rad] in the centre-of-inertia frame, one row per sample.
    #[getter]
    fn delta(&self) -> Vec<Vec<f64>> {
        self.inner.samples.iter().map(|s| s.delta.clone()).collect()
    }

    /// Rotor speed deviations [rad/s], one row per sample.
    #[getter]
    fn omega(&self) -> Vec<Vec<f64>> {
        self.inner.samples.iter().map(|s| s.omega.clone()).collect()
    }

    /// Generator buses in column order.
    #[getter]
    fn generators(&self) -> Vec<usize> {
        self.inner.case.generators.iter().map(|g| g.bus).collect()
    }

    #[getter]
    fn termination(&self) -> String {
        format!("{:?}", self.inner.termination)
    }

    #[getter]
    fn clearing_index(&self) -> usize {
        self.inner.clearing_index()
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv()
    }

    /// Run metadata as a dict.
    fn meta<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        let text = serde_json::to_string(&self.inner.meta()).map_err(|e| PyValueError::new_err(e.to_string()))?;
        json_to_py(py, &text)
    }

    /// Run the detection suite given as a dict or JSON string.
    fn detect<'py>(&self, py: Python<'py>, suite: &Bound<'py, PyAny>) -> PyResult<Bound<'py, PyAny>> {
        let text: String = match suite.extract::<String>() {
            Ok(s) => s,
            Err(_) => py.import("json")?.call_method1("dumps", (suite,))?.extract()?,
        };
        let suite: SuiteConfig = serde_json::from_str(&text).map_err(|e| PyValueError::new_err(e.to_string()))?;
        let rep = py.detach(|| run_suite(&self.inner, &suite)).map_err(py_err)?;
        json_to_py(py, &rep.to_json())
    }

    fn __repr__(&self) -> String {
        format!("Trajectory(samples={}, termination={:?})", self.inner.len(), self.inner.termination)
    }
}

/// Simulate a scenario on a case, both given as file paths.
#[pyfunction]
fn simulate(py: Python<'_>, case: PathBuf, scenario: PathBuf) -> PyResult<Trajectory> {
    let case = NetworkCase::load(case).map_err(py_err)?;
    let scn = Scenario::load(scenario).map_err(py_err)?;
    let inner = py.detach(|| simcore::simulate(&case, &scn)).map_err(py_err)?;
    Ok(Trajectory { inner })
}

/// Simulate the run described by a manifest and return the detection report
/// as a dict. Report and figure files are written when `out` is given.
#[pyfunction]
#[pyo3(signature = (manifest, out = None))]
fn detect<'py>(py: Python<'py>, manifest: PathBuf, out: Option<PathBuf>) -> PyResult<Bound<'py, PyAny>> {
    let text = py
        .detach(|| -> oos_core::Result<String> {
            let inputs = RunInputs::from_manifest(&manifest)?;
            let rep = match &out {
                Some(dir) => cli::cmd_detect(&inputs, None, dir)?,
                None => {
                    let suite = inputs
                        .suite
                        .as_ref()
                        .ok_or_else(|| oos_core::Error::InvalidManifest("no suite configured".into()))?;
                    run_suite(&simcore::simulate(&inputs.case, &inputs.scenario)?, suite)?
                }
            };
            Ok(rep.to_json())
        })
        .map_err(py_err)?;
    json_to_py(py, &text)
}

/// Analytic cutset models, ranking and reduction check of a manifest's run.
/// Writes the analysis JSON into `out`.
#[pyfunction]
fn analyze<'py>(py: Python<'py>, manifest: PathBuf, out: PathBuf) -> PyResult<Bound<'py, PyAny>> {
    let text = py
        .detach(|| -> oos_core::Result<String> {
            let inputs = RunInputs::from_manifest(&manifest)?;
            Ok(cli::cmd_analyze(&inputs, &out)?.to_json())
        })
        .map_err(py_err)?;
    json_to_py(py, &text)
}

#[pymodule]
fn oos(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Trajectory>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(detect, m)?)?;
    m.add_function(wrap_pyfunction!(analyze, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

//! Python module `ucsm`: cases, datasets, SVM models and TSUC solves.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ucsm::grid::{fixtures, parse_case, SystemCase};
use ucsm::scenario::{build_scenarios, generate_dataset, Dataset as CoreDataset};
use ucsm::svm::{read_model, train_on_dataset, write_model, ModelFile, SvmConfig};
use ucsm::tsuc::{self, solution_report, Mode, SolveOptions, TsucInstance, TsucSolution};

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn runtime_err(e: impl std::fmt::Display) -> PyErr {
    PyRuntimeError::new_err(e.to_string())
}

#[pyclass(name = "Case", frozen)]
struct Case {
    inner: SystemCase,
}

#[pymethods]
impl Case {
    /// Parses case-file text.
    #[new]
    fn new(text: &str) -> PyResult<Self> {
        parse_case(text).map(|inner| Self { inner }).map_err(value_err)
    }

    /// One of `three_bus`, `six_bus`, `twentyfour_bus`.
    #[staticmethod]
    fn fixture(name: &str) -> PyResult<Self> {
        let text = fixtures::by_name(name).ok_or_else(|| value_err(format!("unknown fixture {name}")))?;
        Self::new(text)
    }

    #[getter]
    fn num_buses(&self) -> usize {
        self.inner.num_buses()
    }

    #[getter]
    fn num_lines(&self) -> usize {
        self.inner.num_lines()
    }

    #[getter]
    fn num_generators(&self) -> usize {
        self.inner.num_generators()
    }

    #[getter]
    fn feature_names(&self) -> Vec<String> {
        self.inner.feature_names()
    }

    fn to_text(&self) -> String {
        self.inner.to_case_text()
    }
}

#[pyclass(name = "Dataset", frozen)]
struct Dataset {
    inner: CoreDataset,
}

#[pymethods]
impl Dataset {
    #[staticmethod]
    #[pyo3(signature = (case, samples=1000, seed=1))]
    fn generate(case: &Case, samples: usize, seed: u64) -> PyResult<Self> {
        generate_dataset(&case.inner, samples, seed).map(|inner| Self { inner }).map_err(runtime_err)
    }

    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        CoreDataset::from_csv_str(text).map(|inner| Self { inner }).map_err(value_err)
    }

    fn to_csv(&self) -> String {
        self.inner.to_csv_string()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// `(infeasible, feasible)` sample counts.
    fn class_counts(&self) -> (usize, usize) {
        self.inner.class_counts()
    }

    #[getter]
    fn feature_names(&self) -> Vec<String> {
        self.inner.feature_names.clone()
    }
}

#[pyclass(name = "Model", frozen)]
struct Model {
    inner: ModelFile,
    test_accuracy: Option<f64>,
    test_false_positive_rate: Option<f64>,
}

#[pymethods]
impl Model {
    /// Trains on the dataset's training split and scores its test split.
    #[staticmethod]
    #[pyo3(signature = (dataset, c_positive=1.0, cneg_ratio=10.0, seed=0))]
    fn train(dataset: &Dataset, c_positive: f64, cneg_ratio: f64, seed: u64) -> PyResult<Self> {
        let cfg = SvmConfig {
            c_positive,
            c_negative: c_positive * cneg_ratio,
            seed,
            ..SvmConfig::default()
        };
        let t = train_on_dataset(&dataset.inner, &cfg).map_err(runtime_err)?;
        Ok(Self {
            test_accuracy: Some(t.test_confusion.accuracy()),
            test_false_positive_rate: Some(t.test_confusion.false_positive_rate()),
            inner: t.model,
        })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        read_model(text).map(|inner| Self { inner, test_accuracy: None, test_false_positive_rate: None }).map_err(value_err)
    }

    fn to_text(&self) -> String {
        write_model(&self.inner)
    }

    /// Signed distance proxy `w . phi + b` in physical units; `>= 0` predicts feasible.
    fn decision(&self, features: Vec<f64>) -> PyResult<f64> {
        let h = &self.inner.hyperplane;
        if features.len() != h.feature_names.len() {
            return Err(value_err(format!("expected {} features, got {}", h.feature_names.len(), features.len())));
        }
        Ok(h.decision(&features))
    }

    #[getter]
    fn margin(&self) -> f64 {
        self.inner.margin
    }

    #[getter]
    fn feature_names(&self) -> Vec<String> {
        self.inner.hyperplane.feature_names.clone()
    }

    #[getter]
    fn test_accuracy(&self) -> Option<f64> {
        self.test_accuracy
    }

    #[getter]
    fn test_false_positive_rate(&self) -> Option<f64> {
        self.test_false_positive_rate
    }

    fn __repr__(&self) -> String {
        format!("Model({})", self.inner.hyperplane.describe())
    }
}

#[pyclass(name = "Solution", frozen)]
struct Solution {
    inner: TsucSolution,
}

#[pymethods]
impl Solution {
    #[getter]
    fn objective(&self) -> f64 {
        self.inner.objective
    }

    #[getter]
    fn mode(&self) -> &'static str {
        self.inner.mode
    }

    /// `u[g][t]`.
    #[getter]
    fn commitment(&self) -> Vec<Vec<bool>> {
        self.inner.schedule.u.clone()
    }

    /// `dispatch[s][t][g]` in MW.
    #[getter]
    fn dispatch(&self) -> Vec<Vec<Vec<f64>>> {
        self.inner.dispatch.clone()
    }

    #[getter]
    fn gap(&self) -> f64 {
        self.inner.stats.gap
    }

    #[getter]
    fn nodes(&self) -> usize {
        self.inner.stats.nodes
    }

    #[getter]
    fn wall_time_ms(&self) -> f64 {
        self.inner.stats.wall_time_ms
    }

    /// `(flow_rows, surrogate_rows, total_rows, variables)`.
    #[getter]
    fn counts(&self) -> (usize, usize, usize, usize) {
        let c = &self.inner.counts;
        (c.flow_rows, c.surrogate_rows, c.total_rows, c.variables)
    }

    fn report(&self) -> String {
        solution_report(&self.inner)
    }
}

/// Solves one TSUC instance; surrogate mode when `model` is given.
#[pyfunction]
#[allow(clippy::too_many_arguments)]
#[pyo3(signature = (case, scenarios=3, horizon=4, seed=1, model=None, gap_tol=1e-6, node_limit=100_000))]
fn solve(
    py: Python<'_>,
    case: &Case,
    scenarios: usize,
    horizon: usize,
    seed: u64,
    model: Option<&Model>,
    gap_tol: f64,
    node_limit: usize,
) -> PyResult<Solution> {
    let sc = build_scenarios(&case.inner, scenarios, horizon, seed).map_err(value_err)?;
    let mode = match model {
        Some(m) => Mode::Surrogate(m.inner.hyperplane.clone()),
        None => Mode::FullNetwork,
    };
    let inst = TsucInstance::new(case.inner.clone(), sc, horizon, mode);
    let opts = SolveOptions { gap_tol, node_limit, ..SolveOptions::default() };
    py.detach(|| tsuc::solve_tsuc(&inst, &opts))
        .map(|inner| Solution { inner })
        .map_err(|e| match e {
            tsuc::TsucError::FeatureMismatch(_) => value_err(e),
            _ => runtime_err(e),
        })
}

/// `(full_rows, surrogate_rows, reduction_pct)` for a network of `lines` lines.
#[pyfunction]
fn constraint_counts(lines: usize, scenarios: usize, horizon: usize) -> (usize, usize, f64) {
    tsuc::constraint_counts(lines, scenarios, horizon)
}

#[pymodule]
#[pyo3(name = "ucsm")]
fn ucsm_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Case>()?;
    m.add_class::<Dataset>()?;
    m.add_class::<Model>()?;
    m.add_class::<Solution>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(constraint_counts, m)?)?;
    Ok(())
}

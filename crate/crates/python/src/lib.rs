//! Python module `gridshift`.
//!
//! Hours are zero-based lists of 24 floats. Costs are in cents, as in the
//! core crate.

use chrono::NaiveDate;
use gridshift_core::de::{self, DeConfig};
use gridshift_core::forecaster::{self, MlpModel, TrainConfig, DEFAULT_HIDDEN};
use gridshift_core::ingest::{
    build_windows, fit_normalizer, load_dataset, LoadOptions, DEFAULT_LAG,
};
use gridshift_core::oracle::{self, ReducedProblem};
use gridshift_core::pso::{self, PsoConfig};
use gridshift_core::{report, seed, synth};
use gridshift_core::{HourlyProfile, OptimizationResult, PeakCap, ProblemOptions, ProfileKind};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyOSError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(gridshift, GridshiftError, PyException);

fn to_py(e: gridshift_core::Error) -> PyErr {
    match e {
        gridshift_core::Error::Io { .. } => PyOSError::new_err(e.to_string()),
        other => GridshiftError::new_err(other.to_string()),
    }
}

fn profile(values: &[f64], kind: ProfileKind) -> PyResult<HourlyProfile> {
    HourlyProfile::from_slice(values, kind).map_err(to_py)
}

/// A day-ahead demand-response problem.
#[pyclass(frozen, module = "gridshift")]
struct Problem {
    inner: gridshift_core::DrProblem,
}

#[pymethods]
impl Problem {
    #[new]
    #[pyo3(signature = (predicted, prices, w1=0.4, w2=0.6, alpha=100.0, gamma_lo=0.5, gamma_hi=1.5, peak_cap=None, peak_cap_fraction=None))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        predicted: Vec<f64>,
        prices: Vec<f64>,
        w1: f64,
        w2: f64,
        alpha: f64,
        gamma_lo: f64,
        gamma_hi: f64,
        peak_cap: Option<f64>,
        peak_cap_fraction: Option<f64>,
    ) -> PyResult<Self> {
        let cap = match (peak_cap, peak_cap_fraction) {
            (Some(_), Some(_)) => {
                return Err(PyValueError::new_err(
                    "give peak_cap or peak_cap_fraction, not both",
                ))
            }
            (Some(kwh), None) => Some(PeakCap::Absolute(kwh)),
            (None, Some(f)) => Some(PeakCap::FractionOfPeak(f)),
            (None, None) => None,
        };
        let options = ProblemOptions {
            gamma_lo,
            gamma_hi,
            peak_cap: cap,
            alpha,
            ..Default::default()
        };
        let inner = gridshift_core::build_problem(
            &profile(&predicted, ProfileKind::Load)?,
            &profile(&prices, ProfileKind::Price)?,
            w1,
            w2,
            &options,
        )
        .map_err(to_py)?;
        Ok(Self { inner })
    }

    /// Objective breakdown of a 24-hour schedule as a dict.
    fn evaluate<'py>(&self, py: Python<'py>, schedule: Vec<f64>) -> PyResult<Bound<'py, PyDict>> {
        let b = gridshift_core::objective::evaluate_slice(&self.inner, &schedule).map_err(to_py)?;
        let d = PyDict::new(py);
        d.set_item("objective", b.objective)?;
        d.set_item("cost", b.cost)?;
        d.set_item("load_shift", b.load_shift)?;
        d.set_item("violation", b.violation)?;
        Ok(d)
    }

    #[getter]
    fn lower_bounds(&self) -> Vec<f64> {
        self.inner.lower_bounds().to_vec()
    }

    #[getter]
    fn upper_bounds(&self) -> Vec<f64> {
        self.inner.upper_bounds().to_vec()
    }

    #[getter]
    fn e_cmax(&self) -> f64 {
        self.inner.e_cmax()
    }

    #[getter]
    fn l_shmax(&self) -> f64 {
        self.inner.l_shmax()
    }

    fn __repr__(&self) -> String {
        format!(
            "Problem(w1={}, w2={}, alpha={})",
            self.inner.w1(),
            self.inner.w2(),
            self.inner.alpha()
        )
    }
}

/// Outcome of `optimize_pso` or `optimize_de`.
#[pyclass(frozen, module = "gridshift")]
struct Result {
    inner: OptimizationResult,
}

#[pymethods]
impl Result {
    #[getter]
    fn algorithm(&self) -> &str {
        &self.inner.algorithm
    }
    #[getter]
    fn best_schedule(&self) -> Vec<f64> {
        self.inner.best_schedule.values().to_vec()
    }
    #[getter]
    fn objective(&self) -> f64 {
        self.inner.objective
    }
    #[getter]
    fn cost(&self) -> f64 {
        self.inner.cost
    }
    #[getter]
    fn load_shift(&self) -> f64 {
        self.inner.load_shift
    }
    #[getter]
    fn violation(&self) -> f64 {
        self.inner.violation
    }
    #[getter]
    fn violation_flagged(&self) -> bool {
        self.inner.violation_flagged
    }
    #[getter]
    fn peak_before(&self) -> f64 {
        self.inner.peak_before
    }
    #[getter]
    fn peak_after(&self) -> f64 {
        self.inner.peak_after
    }
    #[getter]
    fn baseline_cost(&self) -> f64 {
        self.inner.baseline_cost
    }
    #[getter]
    fn evaluations(&self) -> usize {
        self.inner.evaluations
    }
    /// Best objective after each iteration, starting with the initial population.
    #[getter]
    fn trace(&self) -> Vec<f64> {
        self.inner.trace.iter().map(|t| t.best_objective).collect()
    }
    fn cost_reduction_pct(&self) -> f64 {
        self.inner.cost_reduction_pct()
    }
    fn peak_reduction_pct(&self) -> f64 {
        self.inner.peak_reduction_pct()
    }
    fn to_json(&self) -> PyResult<String> {
        serde_json::to_string(&self.inner).map_err(|e| GridshiftError::new_err(e.to_string()))
    }
    fn __repr__(&self) -> String {
        format!(
            "Result(algorithm={:?}, objective={}, cost={})",
            self.inner.algorithm, self.inner.objective, self.inner.cost
        )
    }
}

#[pyfunction]
#[pyo3(signature = (problem, seed=0, swarm_size=50, iterations=100, seed_with_predicted=true))]
fn optimize_pso(
    py: Python<'_>,
    problem: &Problem,
    seed: u64,
    swarm_size: usize,
    iterations: usize,
    seed_with_predicted: bool,
) -> PyResult<Result> {
    let config = PsoConfig {
        swarm_size,
        iterations,
        seed,
        seed_with_predicted,
        ..Default::default()
    };
    let inner = py
        .detach(|| pso::optimize(&problem.inner, &config))
        .map_err(to_py)?;
    Ok(Result { inner })
}

#[pyfunction]
#[pyo3(signature = (problem, seed=0, population_size=50, iterations=100, crossover_probability=0.7, seed_with_predicted=true))]
fn optimize_de(
    py: Python<'_>,
    problem: &Problem,
    seed: u64,
    population_size: usize,
    iterations: usize,
    crossover_probability: f64,
    seed_with_predicted: bool,
) -> PyResult<Result> {
    let config = DeConfig {
        population_size,
        iterations,
        crossover_probability,
        seed,
        seed_with_predicted,
        ..Default::default()
    };
    let inner = py
        .detach(|| de::optimize(&problem.inner, &config))
        .map_err(to_py)?;
    Ok(Result { inner })
}

/// Exhaustive search over `free_hours` (zero-based); other hours stay at the
/// predicted load. Returns `(schedule, objective, points_evaluated)`.
#[pyfunction]
#[pyo3(signature = (problem, free_hours, resolution=101))]
fn grid_search(
    py: Python<'_>,
    problem: &Problem,
    free_hours: Vec<usize>,
    resolution: usize,
) -> PyResult<(Vec<f64>, f64, u64)> {
    let reduced =
        ReducedProblem::new(problem.inner.clone(), free_hours, resolution).map_err(to_py)?;
    let opt = py.detach(|| oracle::grid_search(&reduced)).map_err(to_py)?;
    Ok((
        opt.schedule.values().to_vec(),
        opt.objective,
        opt.points_evaluated,
    ))
}

/// `100 * (before - after) / before`.
#[pyfunction]
fn cost_reduction(before: f64, after: f64) -> PyResult<f64> {
    report::cost_reduction(before, after).map_err(to_py)
}

#[pyfunction]
fn derive_seed(master: u64, label: &str, index: u64) -> u64 {
    seed::derive_seed(master, label, index)
}

/// `(load, prices)` of the final day of a short synthetic series.
#[pyfunction]
fn synthetic_day(seed: u64) -> PyResult<(Vec<f64>, Vec<f64>)> {
    let (load, price) = synth::synthetic_day(seed).map_err(to_py)?;
    Ok((load.values().to_vec(), price.values().to_vec()))
}

/// Writes a synthetic hourly dataset CSV.
#[pyfunction]
#[pyo3(signature = (path, days=120, seed=0))]
fn write_synthetic_dataset(path: &str, days: usize, seed: u64) -> PyResult<()> {
    let config = synth::SynthConfig {
        days,
        seed,
        ..Default::default()
    };
    let records = synth::generate(&config).map_err(to_py)?;
    let file =
        std::fs::File::create(path).map_err(|e| PyOSError::new_err(format!("{path}: {e}")))?;
    gridshift_core::ingest::write_records(&records, file).map_err(to_py)
}

fn parse_day(day: &str) -> PyResult<NaiveDate> {
    day.parse()
        .map_err(|e| PyValueError::new_err(format!("bad day `{day}`: {e}")))
}

/// A trained load forecaster.
#[pyclass(frozen, module = "gridshift")]
struct Model {
    inner: MlpModel,
}

#[pymethods]
impl Model {
    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(Self {
            inner: MlpModel::load(path).map_err(to_py)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        self.inner.save(path).map_err(to_py)
    }

    /// Trains on a dataset CSV. Returns `(model, report)` where `report` is the
    /// fit report as a JSON string.
    #[staticmethod]
    #[pyo3(signature = (data_path, epochs=1000, learning_rate=0.01, momentum=0.9, batch_size=32, seed=0, train_fraction=0.85))]
    #[allow(clippy::too_many_arguments)]
    fn train(
        py: Python<'_>,
        data_path: &str,
        epochs: usize,
        learning_rate: f64,
        momentum: f64,
        batch_size: usize,
        seed: u64,
        train_fraction: f64,
    ) -> PyResult<(Self, String)> {
        let (model, report) = py
            .detach(|| -> gridshift_core::Result<_> {
                let options = LoadOptions {
                    train_fraction: Some(train_fraction),
                    ..Default::default()
                };
                let dataset = load_dataset(data_path, &options)?;
                let windows = build_windows(&dataset, DEFAULT_LAG)?;
                let stats = fit_normalizer(dataset.train_rows())?;
                let model = MlpModel::new(
                    stats,
                    DEFAULT_LAG,
                    &DEFAULT_HIDDEN,
                    seed::derive_seed(seed, "init", 0),
                )?;
                let config = TrainConfig {
                    epochs,
                    learning_rate,
                    momentum,
                    batch_size,
                    seed: seed::derive_seed(seed, "train", 0),
                    shuffle: true,
                };
                forecaster::train(model, &windows, &config)
            })
            .map_err(to_py)?;
        let report =
            serde_json::to_string(&report).map_err(|e| GridshiftError::new_err(e.to_string()))?;
        Ok((Self { inner: model }, report))
    }

    /// 24 predicted loads for `day` (YYYY-MM-DD) from the history in `data_path`.
    fn predict_day(&self, data_path: &str, day: &str) -> PyResult<Vec<f64>> {
        let day = parse_day(day)?;
        let dataset = load_dataset(data_path, &LoadOptions::default()).map_err(to_py)?;
        let p = self.inner.predict_day(&dataset, day).map_err(to_py)?;
        Ok(p.values().to_vec())
    }

    #[getter]
    fn layer_sizes(&self) -> Vec<usize> {
        self.inner.net.layer_sizes().to_vec()
    }
}

#[pymodule]
fn gridshift(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("GridshiftError", m.py().get_type::<GridshiftError>())?;
    m.add_class::<Problem>()?;
    m.add_class::<Result>()?;
    m.add_class::<Model>()?;
    m.add_function(wrap_pyfunction!(optimize_pso, m)?)?;
    m.add_function(wrap_pyfunction!(optimize_de, m)?)?;
    m.add_function(wrap_pyfunction!(grid_search, m)?)?;
    m.add_function(wrap_pyfunction!(cost_reduction, m)?)?;
    m.add_function(wrap_pyfunction!(derive_seed, m)?)?;
    m.add_function(wrap_pyfunction!(synthetic_day, m)?)?;
    m.add_function(wrap_pyfunction!(write_synthetic_dataset, m)?)?;
    Ok(())
}

//! Python bindings for `hawkes-core`.

use hawkes_core::gof;
use hawkes_core::likelihood;
use hawkes_core::optimize::{self, InnerMethod, OptimConfig};
use hawkes_core::simulate::{self as sim, SimConfig};
use hawkes_core::{BowsherParams, EventSeries, ExpHawkesParams, HawkesError, Model, TradingCalendar};
use nalgebra::DMatrix;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

fn err(e: HawkesError) -> PyErr {
    match e {
        HawkesError::Parse { .. } | HawkesError::Ingest(_) => PyRuntimeError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn matrix(rows: &[Vec<f64>]) -> DMatrix<f64> {
    let n = rows.len();
    DMatrix::from_fn(n, rows.first().map_or(0, Vec::len), |i, j| rows[i][j])
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Multivariate exponential Hawkes parameters; `alpha[m][n]` is the expected
/// number of type-m events triggered by one type-n event.
#[pyclass(name = "HawkesParams", module = "hawkes_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyHawkesParams(ExpHawkesParams);

#[pymethods]
impl PyHawkesParams {
    #[new]
    fn new(mu: Vec<f64>, alpha: Vec<Vec<f64>>, beta: Vec<Vec<f64>>) -> PyResult<Self> {
        if alpha.iter().chain(&beta).any(|r| r.len() != mu.len()) {
            return Err(PyValueError::new_err("alpha and beta must be square with one row per dimension"));
        }
        ExpHawkesParams::new(mu, matrix(&alpha), matrix(&beta)).map(Self).map_err(err)
    }

    #[getter]
    fn mu(&self) -> Vec<f64> {
        self.0.mu().to_vec()
    }

    #[getter]
    fn alpha(&self) -> Vec<Vec<f64>> {
        rows(self.0.alpha())
    }

    #[getter]
    fn beta(&self) -> Vec<Vec<f64>> {
        rows(self.0.beta())
    }

    #[getter]
    fn dims(&self) -> usize {
        self.0.dims()
    }

    fn spectral_radius(&self) -> f64 {
        hawkes_core::stability_check(&self.0).spectral_radius
    }

    fn __repr__(&self) -> String {
        format!("HawkesParams(mu={:?}, alpha={:?}, beta={:?})", self.mu(), self.alpha(), self.beta())
    }
}

/// Univariate model with overnight spillover of the closing intensity level.
#[pyclass(name = "BowsherParams", module = "hawkes_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyBowsherParams(BowsherParams);

#[pymethods]
impl PyBowsherParams {
    #[new]
    fn new(mu: f64, pi: f64, rho: f64, alpha: f64, beta: f64) -> PyResult<Self> {
        BowsherParams::new(mu, pi, rho, alpha, beta).map(Self).map_err(err)
    }

    #[getter]
    fn mu(&self) -> f64 {
        self.0.mu
    }
    #[getter]
    fn pi(&self) -> f64 {
        self.0.pi
    }
    #[getter]
    fn rho(&self) -> f64 {
        self.0.rho
    }
    #[getter]
    fn alpha(&self) -> f64 {
        self.0.alpha
    }
    #[getter]
    fn beta(&self) -> f64 {
        self.0.beta
    }

    fn __repr__(&self) -> String {
        let p = &self.0;
        format!("BowsherParams(mu={}, pi={}, rho={}, alpha={}, beta={})", p.mu, p.pi, p.rho, p.alpha, p.beta)
    }
}

#[pyclass(name = "EventSeries", module = "hawkes_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyEventSeries(EventSeries);

#[pymethods]
impl PyEventSeries {
    #[new]
    fn new(times: Vec<Vec<f64>>, horizon: f64) -> PyResult<Self> {
        EventSeries::new(times, horizon).map(Self).map_err(err)
    }

    #[getter]
    fn times(&self) -> Vec<Vec<f64>> {
        self.0.all_times().to_vec()
    }

    #[getter]
    fn horizon(&self) -> f64 {
        self.0.horizon()
    }

    #[getter]
    fn dims(&self) -> usize {
        self.0.dims()
    }

    fn counts(&self) -> Vec<usize> {
        (0..self.0.dims()).map(|d| self.0.len(d)).collect()
    }

    fn __len__(&self) -> usize {
        self.0.total_events()
    }

    fn __repr__(&self) -> String {
        format!("EventSeries(counts={:?}, horizon={})", self.counts(), self.0.horizon())
    }
}

/// Ordered, disjoint `(open, close)` trading intervals in seconds.
#[pyclass(name = "TradingCalendar", module = "hawkes_py", frozen, skip_from_py_object)]
#[derive(Clone)]
struct PyCalendar(TradingCalendar);

#[pymethods]
impl PyCalendar {
    #[new]
    fn new(intervals: Vec<(f64, f64)>) -> PyResult<Self> {
        TradingCalendar::new(intervals).map(Self).map_err(err)
    }

    #[staticmethod]
    fn regular(days: usize, day_length: f64, gap: f64) -> PyResult<Self> {
        TradingCalendar::regular(days, day_length, gap).map(Self).map_err(err)
    }

    #[getter]
    fn intervals(&self) -> Vec<(f64, f64)> {
        self.0.intervals().to_vec()
    }

    fn total_trading_time(&self) -> f64 {
        self.0.total_trading_time()
    }

    fn __repr__(&self) -> String {
        format!("TradingCalendar(days={}, trading_time={})", self.0.day_count(), self.0.total_trading_time())
    }
}

fn sim_config(seed: u64, horizon: Option<f64>, max_events: Option<usize>) -> PyResult<SimConfig> {
    match (horizon, max_events) {
        (Some(h), None) => Ok(SimConfig::horizon(seed, h)),
        (None, Some(n)) => Ok(SimConfig::max_events(seed, n)),
        _ => Err(PyValueError::new_err("give exactly one of horizon or max_events")),
    }
}

/// Simulates by thinning. With a calendar, events only occur in trading hours.
#[pyfunction]
#[pyo3(signature = (params, seed, horizon=None, max_events=None, calendar=None))]
fn simulate(
    py: Python<'_>,
    params: &PyHawkesParams,
    seed: u64,
    horizon: Option<f64>,
    max_events: Option<usize>,
    calendar: Option<&PyCalendar>,
) -> PyResult<PyEventSeries> {
    let horizon = horizon.or_else(|| calendar.filter(|_| max_events.is_none()).map(|c| c.0.last_close()));
    let cfg = sim_config(seed, horizon, max_events)?;
    let out = py.detach(|| match calendar {
        Some(cal) => sim::simulate_daygap(&params.0, &cal.0, &cfg),
        None => sim::simulate_hawkes(&params.0, &cfg),
    });
    out.map(PyEventSeries).map_err(err)
}

#[pyfunction]
fn simulate_bowsher(py: Python<'_>, params: &PyBowsherParams, calendar: &PyCalendar, seed: u64) -> PyResult<PyEventSeries> {
    let cfg = SimConfig::horizon(seed, calendar.0.last_close());
    py.detach(|| sim::simulate_bowsher(&params.0, &calendar.0, &cfg)).map(PyEventSeries).map_err(err)
}

/// Negative log-likelihood; the calendar selects the day-gap likelihood.
#[pyfunction]
#[pyo3(signature = (params, series, calendar=None))]
fn nll(params: &PyHawkesParams, series: &PyEventSeries, calendar: Option<&PyCalendar>) -> PyResult<f64> {
    match calendar {
        Some(cal) => likelihood::nll_daygap(&params.0, &series.0, &cal.0),
        None => likelihood::nll(&params.0, &series.0),
    }
    .map_err(err)
}

#[pyfunction]
fn nll_bowsher(params: &PyBowsherParams, series: &PyEventSeries, calendar: &PyCalendar) -> PyResult<f64> {
    likelihood::nll_bowsher(&params.0, &series.0, &calendar.0).map_err(err)
}

fn optim_config(inner_method: &str, seed: u64, outer_tol: f64) -> PyResult<OptimConfig> {
    let inner_method: InnerMethod = inner_method.parse().map_err(PyValueError::new_err)?;
    let cfg = OptimConfig { inner_method, seed, outer_tol, ..OptimConfig::default() };
    cfg.validate().map_err(err)?;
    Ok(cfg)
}

fn fit_dict<'py>(py: Python<'py>, fit: optimize::FitResult) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    match fit.params {
        Model::Hawkes(p) => d.set_item("params", PyHawkesParams(p))?,
        Model::Bowsher(p) => d.set_item("params", PyBowsherParams(p))?,
    }
    d.set_item("nll", fit.nll)?;
    d.set_item("converged", fit.converged)?;
    d.set_item("outer_iterations", fit.outer_iterations)?;
    d.set_item("evaluations", fit.inner_trace.len())?;
    Ok(d)
}

/// Two-stage fit: simplex search over decays around a convex solve for
/// `(mu, alpha)`. Without a calendar the whole horizon is one trading interval.
#[pyfunction]
#[pyo3(signature = (series, calendar=None, inner_method="projected-newton", seed=0, outer_tol=1e-4))]
fn fit<'py>(
    py: Python<'py>,
    series: &PyEventSeries,
    calendar: Option<&PyCalendar>,
    inner_method: &str,
    seed: u64,
    outer_tol: f64,
) -> PyResult<Bound<'py, PyDict>> {
    let cfg = optim_config(inner_method, seed, outer_tol)?;
    let cal = match calendar {
        Some(c) => c.0.clone(),
        None => TradingCalendar::single(0.0, series.0.horizon()).map_err(err)?,
    };
    let result = py.detach(|| optimize::fit_2shlo(&series.0, &cal, &cfg)).map_err(err)?;
    fit_dict(py, result)
}

#[pyfunction]
#[pyo3(signature = (series, calendar, seed=0))]
fn fit_bowsher<'py>(py: Python<'py>, series: &PyEventSeries, calendar: &PyCalendar, seed: u64) -> PyResult<Bound<'py, PyDict>> {
    let cfg = optim_config("projected-newton", seed, 1e-4)?;
    let result = py.detach(|| optimize::fit_bowsher(&series.0, &calendar.0, &cfg)).map_err(err)?;
    fit_dict(py, result)
}

/// Compensator values at each event, per dimension.
#[pyfunction]
#[pyo3(signature = (params, series, calendar=None))]
fn rescale(params: &Bound<'_, PyAny>, series: &PyEventSeries, calendar: Option<&PyCalendar>) -> PyResult<Vec<Vec<f64>>> {
    let model = if let Ok(p) = params.cast::<PyHawkesParams>() {
        Model::Hawkes(p.get().0.clone())
    } else if let Ok(p) = params.cast::<PyBowsherParams>() {
        Model::Bowsher(p.get().0)
    } else {
        return Err(PyValueError::new_err("params must be HawkesParams or BowsherParams"));
    };
    gof::rescale_times(&model, &series.0, calendar.map(|c| &c.0)).map_err(err)
}

/// KS test of the durations between rescaled times against Exp(1).
/// Returns `(statistic, p_value)`.
#[pyfunction]
fn ks_exp1(rescaled: Vec<f64>) -> PyResult<(f64, f64)> {
    let k = gof::ks_exp1(&gof::durations(&rescaled)).map_err(err)?;
    Ok((k.statistic, k.p_value))
}

#[pymodule]
fn hawkes_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHawkesParams>()?;
    m.add_class::<PyBowsherParams>()?;
    m.add_class::<PyEventSeries>()?;
    m.add_class::<PyCalendar>()?;
    m.add_function(wrap_pyfunction!(simulate, m)?)?;
    m.add_function(wrap_pyfunction!(simulate_bowsher, m)?)?;
    m.add_function(wrap_pyfunction!(nll, m)?)?;
    m.add_function(wrap_pyfunction!(nll_bowsher, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(fit_bowsher, m)?)?;
    m.add_function(wrap_pyfunction!(rescale, m)?)?;
    m.add_function(wrap_pyfunction!(ks_exp1, m)?)?;
    Ok(())
}

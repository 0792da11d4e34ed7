use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use super::agd::accelerated_gradient;
use super::nelder_mead::{nelder_mead, NelderMeadConfig};
use super::newton::projected_newton;
use super::{FitResult, InnerMethod, OptimConfig, TraceEntry};
use crate::calendar::TradingCalendar;
use crate::error::{HawkesError, Result};
use crate::likelihood::{nll_daygap, FixedDecayObjective};
use crate::params::{ExpHawkesParams, Model};
use crate::series::EventSeries;

/// Minimum number of events per dimension for a two-stage fit.
pub const MIN_EVENTS_PER_DIM: usize = 5;

/// Heuristic adjacency used to centre random inner starting points.
const ALPHA_START: f64 = 0.2;

/// Optimum of the convex `(mu, alpha)` problem at fixed decays.
#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution {
    pub mu: Vec<f64>,
    pub alpha: DMatrix<f64>,
    pub nll: f64,
    pub converged: bool,
    /// Largest iteration count over the per-target solves.
    pub iterations: usize,
    /// Objective after each accepted iterate, per target dimension.
    pub traces: Vec<Vec<f64>>,
}

/// Uniform draw on `[0.5, 1.5]` times the event rate for `mu` and times 0.2 for `alpha`.
fn random_start(series: &EventSeries, calendar: &TradingCalendar, floor: f64, rng: &mut ChaCha20Rng) -> (Vec<f64>, DMatrix<f64>) {
    let dims = series.dims();
    let trading = calendar.total_trading_time();
    let mu = (0..dims)
        .map(|m| rng.gen_range(0.5..1.5) * (series.len(m) as f64 / trading).max(floor))
        .collect();
    let alpha = DMatrix::from_fn(dims, dims, |_, _| rng.gen_range(0.5..1.5) * ALPHA_START);
    (mu, alpha)
}

/// Minimizes the negative log-likelihood over `(mu, alpha)` at fixed `beta`,
/// from a random start drawn with `config.seed`.
pub fn inner_minimize(
    series: &EventSeries,
    calendar: &TradingCalendar,
    beta: &DMatrix<f64>,
    config: &OptimConfig,
) -> Result<InnerSolution> {
    config.validate()?;
    let objective = FixedDecayObjective::new(series, calendar, beta)?;
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let (mu0, alpha0) = random_start(series, calendar, config.param_floor, &mut rng);
    inner_minimize_from(&objective, &mu0, &alpha0, config)
}

/// Inner solve on a prepared objective from a given starting point.
pub fn inner_minimize_from(
    objective: &FixedDecayObjective,
    mu0: &[f64],
    alpha0: &DMatrix<f64>,
    config: &OptimConfig,
) -> Result<InnerSolution> {
    let starts = FixedDecayObjective::pack(mu0, alpha0);
    let mut thetas = Vec::with_capacity(starts.len());
    let mut traces = Vec::with_capacity(starts.len());
    let mut nll = 0.0;
    let mut converged = true;
    let mut iterations = 0;
    for (block, start) in objective.blocks().iter().zip(&starts) {
        let sol = match config.inner_method {
            InnerMethod::ProjectedNewton => {
                projected_newton(block, start, config.param_floor, config.inner_tol, config.inner_max_iter)?
            }
            InnerMethod::AcceleratedGradient => {
                accelerated_gradient(block, start, config.param_floor, config.inner_tol, config.inner_max_iter)?
            }
        };
        nll += sol.value;
        converged &= sol.converged;
        iterations = iterations.max(sol.iterations);
        thetas.push(sol.theta);
        traces.push(sol.trace);
    }
    let (mu, alpha) = FixedDecayObjective::unpack(&thetas);
    Ok(InnerSolution { mu, alpha, nll, converged, iterations, traces })
}

/// Starting decays: `beta_mn = 1 / (mean inter-arrival time of dimension m)`,
/// measured in trading time.
pub fn initial_beta(series: &EventSeries, calendar: &TradingCalendar) -> DMatrix<f64> {
    let dims = series.dims();
    let trading = calendar.total_trading_time();
    DMatrix::from_fn(dims, dims, |m, _| (series.len(m).max(1) as f64) / trading)
}

/// Smallest decay the outer search probes: one over the total trading time.
///
/// Slower kernels never finish decaying inside the data, so only the product
/// `alpha * beta` is identified and the likelihood drifts along a ridge
/// towards `beta -> 0`.
pub fn min_beta(calendar: &TradingCalendar) -> f64 {
    1.0 / calendar.total_trading_time()
}

/// Two-stage fit: Nelder–Mead over `log(beta)`, each probe profiling out
/// `(mu, alpha)` with [`inner_minimize`]'s convex solve.
pub fn fit_2shlo(series: &EventSeries, calendar: &TradingCalendar, config: &OptimConfig) -> Result<FitResult> {
    config.validate()?;
    let dims = series.dims();
    for m in 0..dims {
        if series.len(m) < MIN_EVENTS_PER_DIM {
            return Err(HawkesError::TooFewEvents { dim: m, count: series.len(m), required: MIN_EVENTS_PER_DIM });
        }
    }
    let beta0 = initial_beta(series, calendar);
    let x0: Vec<f64> = row_major(&beta0).iter().map(|b| b.ln()).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let mut warm = random_start(series, calendar, config.param_floor, &mut rng);
    let mut trace = Vec::new();
    let mut best: Option<(f64, DMatrix<f64>, InnerSolution)> = None;
    let mut failure: Option<HawkesError> = None;

    let outer = NelderMeadConfig {
        initial_step: 0.25,
        xtol: config.outer_tol,
        frtol: 1e-12,
        max_iter: config.outer_max_iter.unwrap_or(200 * dims * dims),
    };
    let log_min_beta = min_beta(calendar).ln();
    let result = nelder_mead(
        |x| {
            if x.iter().any(|&v| v < log_min_beta) {
                return f64::INFINITY;
            }
            let beta = DMatrix::from_row_iterator(dims, dims, x.iter().map(|v| v.exp()));
            let solved = FixedDecayObjective::new(series, calendar, &beta)
                .and_then(|obj| inner_minimize_from(&obj, &warm.0, &warm.1, config));
            match solved {
                Ok(sol) => {
                    trace.push(TraceEntry { point: row_major(&beta), nll: sol.nll });
                    if config.warm_start {
                        warm = (sol.mu.clone(), sol.alpha.clone());
                    } else {
                        warm = random_start(series, calendar, config.param_floor, &mut rng);
                    }
                    let value = sol.nll;
                    if best.as_ref().is_none_or(|b| value < b.0) {
                        best = Some((value, beta, sol));
                    }
                    value
                }
                Err(e) => {
                    trace.push(TraceEntry { point: row_major(&beta), nll: f64::INFINITY });
                    failure = Some(e);
                    f64::INFINITY
                }
            }
        },
        &x0,
        &outer,
    );
    let Some((_, beta, sol)) = best else {
        let cause = failure.map_or_else(|| "no finite objective value".to_string(), |e| e.to_string());
        return Err(HawkesError::Optimization(format!("every inner solve failed: {cause}")));
    };
    let params = ExpHawkesParams::new(sol.mu, sol.alpha, beta)?;
    let nll = nll_daygap(&params, series, calendar)?;
    Ok(FitResult {
        params: Model::Hawkes(params),
        nll,
        outer_iterations: result.iterations,
        inner_trace: trace,
        converged: result.converged && sol.converged,
    })
}

pub(crate) fn row_major(m: &DMatrix<f64>) -> Vec<f64> {
    m.transpose().iter().copied().collect()
}

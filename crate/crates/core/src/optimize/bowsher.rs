use super::lbfgsb::{minimize_bounded, BoundedLbfgsConfig};
use super::{FitResult, OptimConfig, TraceEntry};
use crate::calendar::TradingCalendar;
use crate::error::{HawkesError, Result};
use crate::likelihood::nll_bowsher;
use crate::params::{BowsherParams, Model};
use crate::series::EventSeries;

use super::two_stage::MIN_EVENTS_PER_DIM;

/// Starting points as `(pi, rho * day_length)`; the best converged run wins.
const SPILL_STARTS: [(f64, f64); 3] = [(0.5, 10.0), (0.1, 36.0), (0.9, 3.0)];

/// Fits `(mu, pi, rho, alpha, beta)` of the spillover model by bounded
/// L-BFGS with central-difference gradients.
///
/// The search runs in coordinates scaled by the starting point, so the
/// gradient step is relative to each parameter's magnitude. Every parameter
/// is bounded below by `config.param_floor`.
pub fn fit_bowsher(series: &EventSeries, calendar: &TradingCalendar, config: &OptimConfig) -> Result<FitResult> {
    config.validate()?;
    if series.dims() != 1 {
        return Err(HawkesError::DimensionMismatch(format!(
            "the spillover model is univariate, series has {} dimensions",
            series.dims()
        )));
    }
    let count = series.len(0);
    if count < MIN_EVENTS_PER_DIM {
        return Err(HawkesError::TooFewEvents { dim: 0, count, required: MIN_EVENTS_PER_DIM });
    }
    let rate = count as f64 / calendar.total_trading_time();
    let settings = BoundedLbfgsConfig {
        memory: 10,
        max_iter: config.inner_max_iter,
        ftol: config.inner_tol * 1e-4,
        pgtol: 1e-6,
        gradient_step: 1e-6,
    };

    let mut best: Option<(f64, BowsherParams, bool, usize)> = None;
    let mut trace = Vec::new();
    for &(pi0, rho_days) in &SPILL_STARTS {
        let start = [0.5 * rate, pi0, rho_days / calendar.day_length(), 0.5 * rate, rate];
        let scale = start;
        let lower: Vec<f64> = scale.iter().map(|s| config.param_floor / s).collect();
        let unscale = |z: &[f64]| -> [f64; 5] { std::array::from_fn(|j| (z[j] * scale[j]).max(config.param_floor)) };
        let objective = |z: &[f64]| match BowsherParams::from_array(unscale(z)) {
            Ok(p) => nll_bowsher(&p, series, calendar).unwrap_or(f64::INFINITY),
            Err(_) => f64::INFINITY,
        };
        let run = minimize_bounded(objective, &[1.0; 5], &lower, &settings);
        trace.extend(run.trace.iter().map(|(z, v)| TraceEntry { point: unscale(z).to_vec(), nll: *v }));
        if !run.value.is_finite() {
            continue;
        }
        let params = BowsherParams::from_array(unscale(&run.x))?;
        if best.as_ref().is_none_or(|b| run.value < b.0) {
            best = Some((run.value, params, run.converged, run.iterations));
        }
    }
    let Some((_, params, converged, iterations)) = best else {
        return Err(HawkesError::Optimization("spillover likelihood infeasible from every start".into()));
    };
    let nll = nll_bowsher(&params, series, calendar)?;
    Ok(FitResult { params: Model::Bowsher(params), nll, outer_iterations: iterations, inner_trace: trace, converged })
}

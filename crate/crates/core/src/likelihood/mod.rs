//! Exact negative log-likelihoods of the exponential Hawkes models.
//!
//! Log-intensity sums use the Ogata recursion, so one evaluation costs
//! `O(N M^2)` for `N` events in `M` dimensions. The plain model is the day-gap
//! model on the single interval `[0, T]`.

mod bowsher;
mod objective;
mod recursion;

pub use bowsher::{nll_bowsher, BowsherState};
pub use objective::FixedDecayObjective;
pub use recursion::RecursionState;

pub(crate) use objective::TargetBlock;
pub(crate) use bowsher::split_days;
pub(crate) use recursion::excitation_mass;

use nalgebra::DMatrix;

use crate::calendar::TradingCalendar;
use crate::error::{HawkesError, Result};
use crate::intensity::check_dims;
use crate::params::ExpHawkesParams;
use crate::series::EventSeries;

/// Intensities below this at an observed event make the parameters infeasible.
pub const MIN_INTENSITY: f64 = 1e-300;

/// Negative log-likelihood of `series` on `[0, T]`.
pub fn nll(params: &ExpHawkesParams, series: &EventSeries) -> Result<f64> {
    let calendar = TradingCalendar::single(0.0, series.horizon())?;
    nll_daygap(params, series, &calendar)
}

/// Negative log-likelihood under the day-gap model: intensities vanish outside
/// the calendar's trading intervals and the kernels run in calendar time.
pub fn nll_daygap(params: &ExpHawkesParams, series: &EventSeries, calendar: &TradingCalendar) -> Result<f64> {
    check_dims(params, series)?;
    let dims = series.dims();
    let days: Vec<Vec<usize>> = (0..dims).map(|n| calendar.assign_days(series.times(n))).collect::<Result<_>>()?;
    let trading = calendar.total_trading_time();
    let mut total = 0.0;
    for m in 0..dims {
        total += params.mu()[m] * trading;
        for n in 0..dims {
            let a = params.alpha()[(m, n)];
            if a != 0.0 {
                total += a * excitation_mass(series.times(n), &days[n], params.beta()[(m, n)], calendar);
            }
        }
        total -= log_intensity_sum(params, series, m)?;
    }
    if total.is_finite() {
        Ok(total)
    } else {
        Err(HawkesError::NonFinite)
    }
}

/// Streaming `sum_i log lambda_m(t_i^m)` with `O(M)` state.
fn log_intensity_sum(params: &ExpHawkesParams, series: &EventSeries, m: usize) -> Result<f64> {
    let dims = series.dims();
    let mut r = vec![0.0; dims];
    let mut k = vec![0usize; dims];
    let mut prev: Option<f64> = None;
    let mut sum = 0.0;
    for (i, &t) in series.times(m).iter().enumerate() {
        let mut lambda = params.mu()[m];
        for n in 0..dims {
            let b = params.beta()[(m, n)];
            if let Some(p) = prev {
                r[n] *= (-b * (t - p)).exp();
            }
            let source = series.times(n);
            while k[n] < source.len() && source[k[n]] < t {
                r[n] += (-b * (t - source[k[n]])).exp();
                k[n] += 1;
            }
            lambda += params.alpha()[(m, n)] * b * r[n];
        }
        if lambda.is_nan() {
            return Err(HawkesError::NonFinite);
        }
        if lambda < MIN_INTENSITY {
            return Err(HawkesError::Infeasible { dim: m, index: i, value: lambda });
        }
        sum += lambda.ln();
        prev = Some(t);
    }
    Ok(sum)
}

/// Gradient of [`nll_daygap`] with respect to `mu` and `alpha` at fixed `beta`.
pub fn nll_gradient(
    params: &ExpHawkesParams,
    series: &EventSeries,
    calendar: &TradingCalendar,
) -> Result<(Vec<f64>, DMatrix<f64>)> {
    check_dims(params, series)?;
    FixedDecayObjective::new(series, calendar, params.beta())?.gradient(params.mu(), params.alpha())
}

/// Hessian of [`nll_daygap`] over `(mu, alpha)` at fixed `beta`.
///
/// Variables are ordered target by target (`mu_m` then `alpha_m0 .. alpha_m,M-1`),
/// which makes the matrix block diagonal with `M` blocks of size `M + 1`.
pub fn nll_hessian(params: &ExpHawkesParams, series: &EventSeries, calendar: &TradingCalendar) -> Result<DMatrix<f64>> {
    check_dims(params, series)?;
    FixedDecayObjective::new(series, calendar, params.beta())?.hessian(params.mu(), params.alpha())
}

/// Position of `mu_m` (`alpha_col = None`) or `alpha_m,alpha_col` in the Hessian layout.
pub fn hessian_index(dims: usize, m: usize, alpha_col: Option<usize>) -> usize {
    m * (dims + 1) + alpha_col.map_or(0, |n| n + 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_series_is_baseline_mass() {
        let p = ExpHawkesParams::from_rows(vec![0.1, 0.2], &[vec![0.5, 0.0], vec![0.4, 0.3]], &[vec![0.3, 1.0], vec![0.2, 0.2]])
            .unwrap();
        let s = EventSeries::empty(2, 100.0).unwrap();
        assert!((nll(&p, &s).unwrap() - 30.0).abs() < 1e-12);
    }

    #[test]
    fn poisson_nll() {
        let p = ExpHawkesParams::univariate(0.4, 0.0, 1.0).unwrap();
        let s = EventSeries::new(vec![vec![1.0, 2.0, 4.5]], 10.0).unwrap();
        let expected = 0.4 * 10.0 - 3.0 * 0.4f64.ln();
        assert!((nll(&p, &s).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn two_day_poisson_nll() {
        let p = ExpHawkesParams::new(vec![0.3, 0.5], DMatrix::zeros(2, 2), DMatrix::from_element(2, 2, 1.0)).unwrap();
        let cal = TradingCalendar::regular(2, 10.0, 7.0).unwrap();
        let s = EventSeries::new(vec![vec![1.0, 18.0], vec![3.0, 5.0, 25.0]], 27.0).unwrap();
        let expected = 2.0 * 10.0 * 0.8 - 2.0 * 0.3f64.ln() - 3.0 * 0.5f64.ln();
        assert!((nll_daygap(&p, &s, &cal).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn zero_intensity_is_infeasible() {
        let p = ExpHawkesParams::univariate(0.0, 0.5, 1.0).unwrap();
        let s = EventSeries::new(vec![vec![1.0, 2.0]], 10.0).unwrap();
        assert!(matches!(nll(&p, &s), Err(HawkesError::Infeasible { dim: 0, index: 0, .. })));
    }

    #[test]
    fn event_in_gap_is_rejected() {
        let p = ExpHawkesParams::univariate(0.1, 0.5, 1.0).unwrap();
        let cal = TradingCalendar::regular(2, 10.0, 5.0).unwrap();
        let s = EventSeries::new(vec![vec![12.0]], 25.0).unwrap();
        assert!(matches!(nll_daygap(&p, &s, &cal), Err(HawkesError::EventOutsideCalendar { .. })));
    }

    #[test]
    fn poisson_gradient_vanishes_at_mle() {
        let cal = TradingCalendar::regular(2, 10.0, 5.0).unwrap();
        let s = EventSeries::new(vec![vec![1.0, 2.0, 16.0, 20.0]], 25.0).unwrap();
        let p = ExpHawkesParams::univariate(4.0 / 20.0, 0.0, 1.0).unwrap();
        let (gmu, _) = nll_gradient(&p, &s, &cal).unwrap();
        assert!(gmu[0].abs() < 1e-12);
        let h = nll_hessian(&p, &s, &cal).unwrap();
        assert!((h[(0, 0)] - 4.0 / 0.04).abs() < 1e-9);
    }
}

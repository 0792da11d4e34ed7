use crate::calendar::TradingCalendar;
use crate::error::{HawkesError, Result};
use crate::params::BowsherParams;
use crate::series::EventSeries;

use super::MIN_INTENSITY;

/// Day-by-day evaluation state of the spillover model.
///
/// Walks the trading days in order, carrying the stochastic intensity level
/// at each close into the next day.
#[derive(Debug, Clone, Copy)]
pub struct BowsherState {
    /// Stochastic part of the intensity at the previous close.
    pub carried: f64,
}

impl BowsherState {
    pub fn new() -> Self {
        Self { carried: 0.0 }
    }

    /// Processes one day: returns `(integral of the intensity, sum of log intensities)`
    /// and updates the carried level. `events` are the day's sorted timestamps.
    pub fn day(&mut self, p: &BowsherParams, open: f64, close: f64, events: &[f64]) -> Result<(f64, f64)> {
        let span = close - open;
        let spill = p.pi * self.carried;
        let mut integral = p.mu * span + spill * -(-p.rho * span).exp_m1() / p.rho;
        let mut log_sum = 0.0;
        let mut excite = 0.0;
        let mut last = open;
        for (i, &u) in events.iter().enumerate() {
            excite *= (-p.beta * (u - last)).exp();
            let lambda = p.mu + spill * (-p.rho * (u - open)).exp() + p.alpha * excite;
            if lambda.is_nan() {
                return Err(HawkesError::NonFinite);
            }
            if lambda < MIN_INTENSITY {
                return Err(HawkesError::Infeasible { dim: 0, index: i, value: lambda });
            }
            log_sum += lambda.ln();
            integral += p.alpha / p.beta * -(-p.beta * (close - u)).exp_m1();
            excite += 1.0;
            last = u;
        }
        self.carried = spill * (-p.rho * span).exp() + p.alpha * excite * (-p.beta * (close - last)).exp();
        Ok((integral, log_sum))
    }
}

impl Default for BowsherState {
    fn default() -> Self {
        Self::new()
    }
}

pub(crate) fn split_days<'a>(series: &'a EventSeries, calendar: &TradingCalendar) -> Result<Vec<&'a [f64]>> {
    if series.dims() != 1 {
        return Err(HawkesError::DimensionMismatch(format!(
            "the spillover model is univariate, series has {} dimensions",
            series.dims()
        )));
    }
    let times = series.times(0);
    let days = calendar.assign_days(times)?;
    let mut out = Vec::with_capacity(calendar.day_count());
    let mut start = 0;
    for d in 0..calendar.day_count() {
        let end = start + days[start..].iter().take_while(|&&x| x == d).count();
        out.push(&times[start..end]);
        start = end;
    }
    Ok(out)
}

/// Negative log-likelihood of the univariate spillover model.
///
/// Per day `d` of length `delta`, the intensity integrates to
/// `mu delta + pi L_{d-1} (1 - e^{-rho delta}) / rho + (alpha / beta) sum_u (1 - e^{-beta (close_d - u)})`.
pub fn nll_bowsher(params: &BowsherParams, series: &EventSeries, calendar: &TradingCalendar) -> Result<f64> {
    params.validate()?;
    let days = split_days(series, calendar)?;
    let mut state = BowsherState::new();
    let mut total = 0.0;
    for (&(open, close), events) in calendar.intervals().iter().zip(days) {
        let (integral, log_sum) = state.day(params, open, close, events)?;
        total += integral - log_sum;
    }
    if total.is_finite() {
        Ok(total)
    } else {
        Err(HawkesError::NonFinite)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poisson_limit() {
        let p = BowsherParams::new(0.2, 0.0, 1.0, 0.0, 1.0).unwrap();
        let cal = TradingCalendar::regular(2, 10.0, 5.0).unwrap();
        let s = EventSeries::new(vec![vec![1.0, 3.0, 17.0]], 25.0).unwrap();
        let expected = 0.2 * 20.0 - 3.0 * 0.2f64.ln();
        assert!((nll_bowsher(&p, &s, &cal).unwrap() - expected).abs() < 1e-12);
    }

    #[test]
    fn carried_level_feeds_next_day() {
        let p = BowsherParams::new(0.1, 1.0, 1e-12, 0.5, 0.2).unwrap();
        let cal = TradingCalendar::regular(2, 10.0, 5.0).unwrap();
        let mut st = BowsherState::new();
        st.day(&p, 0.0, 10.0, &[9.0]).unwrap();
        let expected = 0.5 * (-0.2f64).exp();
        assert!((st.carried - expected).abs() < 1e-12);
        let _ = cal;
    }

    #[test]
    fn rejects_multivariate() {
        let p = BowsherParams::new(0.2, 0.0, 1.0, 0.0, 1.0).unwrap();
        let cal = TradingCalendar::single(0.0, 10.0).unwrap();
        let s = EventSeries::new(vec![vec![1.0], vec![2.0]], 10.0).unwrap();
        assert!(nll_bowsher(&p, &s, &cal).is_err());
    }
}

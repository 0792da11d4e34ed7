//! Pointwise intensity and compensator of the exponential Hawkes model.
//!
//! These evaluate the defining sums directly, one event at a time. The
//! likelihood and residual code use linear-time recursions instead and are
//! tested against these.

use nalgebra::DMatrix;

use crate::calendar::TradingCalendar;
use crate::error::{HawkesError, Result};
use crate::params::ExpHawkesParams;
use crate::series::EventSeries;

pub(crate) fn check_dims(params: &ExpHawkesParams, series: &EventSeries) -> Result<()> {
    if params.dims() != series.dims() {
        return Err(HawkesError::DimensionMismatch(format!(
            "parameters have {} dimensions, series has {}",
            params.dims(),
            series.dims()
        )));
    }
    Ok(())
}

fn check_query(params: &ExpHawkesParams, series: &EventSeries, t: f64, i: usize) -> Result<()> {
    check_dims(params, series)?;
    if i >= params.dims() {
        return Err(HawkesError::DimensionMismatch(format!(
            "dimension index {i} out of range for {} dimensions",
            params.dims()
        )));
    }
    if !(t >= 0.0 && t <= series.horizon()) {
        return Err(HawkesError::TimeOutOfRange { t, horizon: series.horizon() });
    }
    Ok(())
}

/// Conditional intensity `lambda_i(t)`.
///
/// Left-continuous: events at exactly `t` do not contribute. With a calendar,
/// the intensity is zero outside trading intervals; inside them, kernels are
/// evaluated in calendar time over the full history.
pub fn intensity_at(
    params: &ExpHawkesParams,
    series: &EventSeries,
    t: f64,
    i: usize,
    calendar: Option<&TradingCalendar>,
) -> Result<f64> {
    check_query(params, series, t, i)?;
    if let Some(cal) = calendar {
        if !cal.contains(t) {
            return Ok(0.0);
        }
    }
    let mut lambda = params.mu()[i];
    for j in 0..series.dims() {
        let (a, b) = (params.alpha()[(i, j)], params.beta()[(i, j)]);
        if a == 0.0 {
            continue;
        }
        let excite: f64 = series
            .times(j)
            .iter()
            .take_while(|&&s| s < t)
            .map(|&s| (-b * (t - s)).exp())
            .sum();
        lambda += a * b * excite;
    }
    Ok(lambda)
}

/// Mass of the unit-adjacency kernel `beta * exp(-beta (u - s))` over trading
/// time in `(s, t)`.
pub(crate) fn kernel_mass(beta: f64, s: f64, t: f64, calendar: Option<&TradingCalendar>) -> f64 {
    if t <= s {
        return 0.0;
    }
    match calendar {
        None => -(-beta * (t - s)).exp_m1(),
        Some(cal) => cal
            .intervals()
            .iter()
            .skip_while(|&&(_, close)| close <= s)
            .take_while(|&&(open, _)| open < t)
            .map(|&(open, close)| {
                let a = open.max(s);
                let b = close.min(t);
                (-beta * (a - s)).exp() * -(-beta * (b - a)).exp_m1()
            })
            .sum(),
    }
}

/// Compensator `Lambda_i(t)`, the integral of `lambda_i` over `[0, t]`.
///
/// With a calendar only trading time accrues: the compensator is flat across
/// gaps while the kernels keep decaying in calendar time.
pub fn compensator_at(
    params: &ExpHawkesParams,
    series: &EventSeries,
    t: f64,
    i: usize,
    calendar: Option<&TradingCalendar>,
) -> Result<f64> {
    check_query(params, series, t, i)?;
    let base = match calendar {
        None => t,
        Some(cal) => cal.trading_time_until(t),
    };
    let mut total = params.mu()[i] * base;
    for j in 0..series.dims() {
        let (a, b) = (params.alpha()[(i, j)], params.beta()[(i, j)]);
        if a == 0.0 {
            continue;
        }
        let mass: f64 = series
            .times(j)
            .iter()
            .take_while(|&&s| s < t)
            .map(|&s| kernel_mass(b, s, t, calendar))
            .sum();
        total += a * mass;
    }
    Ok(total)
}

/// Branching matrix `||phi_ij||_1`. For the normalized exponential kernel this
/// is the adjacency matrix itself.
pub fn branching_matrix(params: &ExpHawkesParams) -> DMatrix<f64> {
    params.alpha().clone()
}

//! Ogata thinning for the exponential, day-gap and spillover models.
//!
//! Between events every intensity here is non-increasing, so the total
//! intensity right after the latest event (or at a window open) bounds the
//! intensity until the next acceptance. Proposals that run past a close are
//! discarded and the clock restarts at the next open, which is exact by
//! memorylessness of the exponential waiting time.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::calendar::TradingCalendar;
use crate::error::{HawkesError, Result};
use crate::params::{BowsherParams, ExpHawkesParams};
use crate::series::EventSeries;
use crate::stability::stability_check;

/// Identifier of the pseudo-random generator behind every simulation.
pub const RNG_ALGORITHM: &str = "ChaCha20Rng (rand_chacha 0.3, seed_from_u64)";

/// Radius at or above which simulation is refused. Radii in `[1, REJECT_RADIUS)` only warn.
pub const REJECT_RADIUS: f64 = 1.05;

/// When a simulation stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SimStop {
    /// Simulate on `[0, horizon]`.
    Horizon(f64),
    /// Stop after this many accepted events; the series horizon becomes the last event time.
    MaxEvents(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub stop: SimStop,
    pub calendar: Option<TradingCalendar>,
}

impl SimConfig {
    pub fn horizon(seed: u64, horizon: f64) -> Self {
        Self { seed, stop: SimStop::Horizon(horizon), calendar: None }
    }

    pub fn max_events(seed: u64, count: usize) -> Self {
        Self { seed, stop: SimStop::MaxEvents(count), calendar: None }
    }

    pub fn with_calendar(mut self, calendar: TradingCalendar) -> Self {
        self.calendar = Some(calendar);
        self
    }

    fn validate(&self) -> Result<()> {
        match self.stop {
            SimStop::Horizon(h) if !(h.is_finite() && h > 0.0) => {
                Err(HawkesError::InvalidParams(format!("simulation horizon must be positive, got {h}")))
            }
            SimStop::MaxEvents(0) => Err(HawkesError::InvalidParams("max_events must be at least 1".into())),
            _ => Ok(()),
        }
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius >= REJECT_RADIUS {
        return Err(HawkesError::Unstable { radius, limit: REJECT_RADIUS });
    }
    if radius >= 1.0 {
        log::warn!("simulating a non-stationary process: spectral radius {radius:.6}");
    }
    Ok(())
}

/// Trading windows to simulate on, clipped to the horizon.
fn windows(calendar: Option<&TradingCalendar>, stop: SimStop) -> Vec<(f64, f64)> {
    let end = match stop {
        SimStop::Horizon(h) => h,
        SimStop::MaxEvents(_) => f64::INFINITY,
    };
    match calendar {
        None => vec![(0.0, end)],
        Some(cal) => cal
            .intervals()
            .iter()
            .filter(|&&(open, _)| open < end)
            .map(|&(open, close)| (open, close.min(end)))
            .collect(),
    }
}

fn finish(times: Vec<Vec<f64>>, stop: SimStop, windows: &[(f64, f64)]) -> Result<EventSeries> {
    let last_close = windows.last().map_or(0.0, |w| w.1);
    let horizon = match stop {
        SimStop::Horizon(h) => h,
        SimStop::MaxEvents(n) => {
            let total: usize = times.iter().map(Vec::len).sum();
            let last = times.iter().filter_map(|ts| ts.last().copied()).fold(0.0, f64::max);
            if total >= n || !last_close.is_finite() {
                last
            } else {
                last_close
            }
        }
    };
    EventSeries::new(times, horizon)
}

fn draw_wait(rng: &mut ChaCha20Rng, rate: f64) -> f64 {
    let u: f64 = rng.gen();
    -(1.0 - u).ln() / rate
}

/// Simulates the multivariate exponential Hawkes process.
///
/// With `config.calendar` set this is [`simulate_daygap`].
pub fn simulate_hawkes(params: &ExpHawkesParams, config: &SimConfig) -> Result<EventSeries> {
    match &config.calendar {
        Some(cal) => simulate_daygap(params, cal, config),
        None => simulate_on(params, None, config),
    }
}

/// Simulates the day-gap model: no events outside trading intervals, kernels
/// decaying in calendar time across gaps.
pub fn simulate_daygap(params: &ExpHawkesParams, calendar: &TradingCalendar, config: &SimConfig) -> Result<EventSeries> {
    simulate_on(params, Some(calendar), config)
}

fn simulate_on(params: &ExpHawkesParams, calendar: Option<&TradingCalendar>, config: &SimConfig) -> Result<EventSeries> {
    config.validate()?;
    check_radius(stability_check(params).spectral_radius)?;
    if params.mu().iter().all(|&m| m == 0.0) {
        return Err(HawkesError::ZeroIntensity);
    }
    let dims = params.dims();
    let max_events = match config.stop {
        SimStop::MaxEvents(n) => Some(n),
        SimStop::Horizon(_) => None,
    };
    let wins = windows(calendar, config.stop);
    let jump = params.alpha().component_mul(params.beta());
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let mut excite = DMatrix::<f64>::zeros(dims, dims);
    let mut times: Vec<Vec<f64>> = vec![Vec::new(); dims];
    let mut accepted = 0usize;
    let mut now = wins.first().map_or(0.0, |w| w.0);
    let mut lambda = vec![0.0; dims];

    let decay = |excite: &mut DMatrix<f64>, dt: f64| {
        if dt > 0.0 {
            excite.zip_apply(params.beta(), |e, b| *e *= (-b * dt).exp());
        }
    };
    let total_intensity = |excite: &DMatrix<f64>, lambda: &mut [f64]| -> f64 {
        for (i, l) in lambda.iter_mut().enumerate() {
            *l = params.mu()[i] + excite.row(i).sum();
        }
        lambda.iter().sum()
    };

    'windows: for &(open, close) in &wins {
        if now < open {
            decay(&mut excite, open - now);
            now = open;
        }
        loop {
            let bound = total_intensity(&excite, &mut lambda);
            let candidate = now + draw_wait(&mut rng, bound);
            if candidate > close {
                continue 'windows;
            }
            decay(&mut excite, candidate - now);
            now = candidate;
            let total = total_intensity(&excite, &mut lambda);
            assert!(
                total > 0.0 && total <= bound * (1.0 + 1e-12),
                "thinning bound violated: intensity {total} exceeds bound {bound}"
            );
            let s: f64 = rng.gen();
            if s * bound > total {
                continue;
            }
            let pick: f64 = rng.gen::<f64>() * total;
            let mut dim = dims - 1;
            let mut acc = 0.0;
            for (i, &l) in lambda.iter().enumerate() {
                acc += l;
                if pick < acc {
                    dim = i;
                    break;
                }
            }
            if times[dim].last().is_some_and(|&last| last >= now) {
                continue;
            }
            times[dim].push(now);
            for i in 0..dims {
                excite[(i, dim)] += jump[(i, dim)];
            }
            accepted += 1;
            if max_events.is_some_and(|n| accepted >= n) {
                break 'windows;
            }
        }
    }
    finish(times, config.stop, &wins)
}

/// Simulates the univariate spillover model on the calendar's trading days.
///
/// The thinning bound is re-evaluated at every day open, where the carried
/// spillover can raise the intensity.
pub fn simulate_bowsher(params: &BowsherParams, calendar: &TradingCalendar, config: &SimConfig) -> Result<EventSeries> {
    params.validate()?;
    config.validate()?;
    check_radius(params.branching_ratio())?;
    if params.mu == 0.0 {
        return Err(HawkesError::ZeroIntensity);
    }
    let max_events = match config.stop {
        SimStop::MaxEvents(n) => Some(n),
        SimStop::Horizon(_) => None,
    };
    let wins = windows(Some(calendar), config.stop);
    let mut rng = ChaCha20Rng::seed_from_u64(config.seed);
    let mut times = Vec::new();
    let mut carried = 0.0;
    let p = params;

    'days: for &(open, close) in &wins {
        let spill = p.pi * carried;
        let mut excite = 0.0;
        let mut now = open;
        let level = |now: f64, excite: f64| p.mu + spill * (-p.rho * (now - open)).exp() + p.alpha * excite;
        loop {
            let bound = level(now, excite);
            let candidate = now + draw_wait(&mut rng, bound);
            if candidate > close {
                break;
            }
            excite *= (-p.beta * (candidate - now)).exp();
            now = candidate;
            let lambda = level(now, excite);
            assert!(
                lambda > 0.0 && lambda <= bound * (1.0 + 1e-12),
                "thinning bound violated: intensity {lambda} exceeds bound {bound}"
            );
            let s: f64 = rng.gen();
            if s * bound > lambda {
                continue;
            }
            if times.last().is_some_and(|&last| last >= now) {
                continue;
            }
            times.push(now);
            excite += 1.0;
            if max_events.is_some_and(|n| times.len() >= n) {
                break 'days;
            }
        }
        let span = close - open;
        carried = spill * (-p.rho * span).exp() + p.alpha * excite * (-p.beta * (close - now)).exp();
    }
    finish(vec![times], config.stop, &wins)
}

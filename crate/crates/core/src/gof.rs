//! Residual analysis by time rescaling.
//!
//! Under the true model the compensator maps event times to a unit-rate
//! Poisson process, so rescaled inter-arrival durations are i.i.d. Exp(1).

use nalgebra::DMatrix;

use crate::calendar::TradingCalendar;
use crate::error::{HawkesError, Result};
use crate::intensity::check_dims;
use crate::likelihood::{split_days, BowsherState};
use crate::params::{BowsherParams, ExpHawkesParams, Model};
use crate::series::EventSeries;

/// Compensator values `Lambda_i(t_k^i)` at every event, per dimension.
///
/// Each dimension uses its own intensity driven by the full multivariate
/// history. Works on any series, so parameters fitted on one period can be
/// checked on another.
pub fn rescale_times(model: &Model, series: &EventSeries, calendar: Option<&TradingCalendar>) -> Result<Vec<Vec<f64>>> {
    let rescaled = match model {
        Model::Hawkes(p) => rescale_hawkes(p, series, calendar)?,
        Model::Bowsher(p) => {
            let cal = match calendar {
                Some(c) => c.clone(),
                None => TradingCalendar::single(0.0, series.horizon())?,
            };
            vec![rescale_bowsher(p, series, &cal)?]
        }
    };
    for (dim, ts) in rescaled.iter().enumerate() {
        if let Some(index) = ts.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(HawkesError::NonMonotone { dim, index: index + 1 });
        }
    }
    Ok(rescaled)
}

/// Kernel state advanced through trading and non-trading time.
struct Sweep<'a> {
    beta: &'a DMatrix<f64>,
    /// Unit-adjacency kernel level `sum_s exp(-beta (now - s))`.
    level: DMatrix<f64>,
    /// Integrated unit-adjacency mass accrued over trading time.
    mass: DMatrix<f64>,
    now: f64,
    day: usize,
}

impl Sweep<'_> {
    fn run(&mut self, dt: f64, trading: bool) {
        if dt <= 0.0 {
            return;
        }
        for ((l, m), b) in self.level.iter_mut().zip(self.mass.iter_mut()).zip(self.beta.iter()) {
            if trading {
                *m -= *l * (-b * dt).exp_m1();
            }
            *l *= (-b * dt).exp();
        }
    }

    fn advance(&mut self, t: f64, calendar: Option<&TradingCalendar>) {
        let Some(cal) = calendar else {
            self.run(t - self.now, true);
            self.now = t;
            return;
        };
        let intervals = cal.intervals();
        while self.now < t {
            match intervals.get(self.day) {
                Some(&(open, close)) if self.now >= close => {
                    self.day += 1;
                    let _ = open;
                }
                Some(&(open, close)) => {
                    let trading = self.now >= open;
                    let end = if trading { close.min(t) } else { open.min(t) };
                    self.run(end - self.now, trading);
                    self.now = end;
                }
                None => {
                    self.run(t - self.now, false);
                    self.now = t;
                }
            }
        }
    }
}

fn rescale_hawkes(params: &ExpHawkesParams, series: &EventSeries, calendar: Option<&TradingCalendar>) -> Result<Vec<Vec<f64>>> {
    check_dims(params, series)?;
    if let Some(cal) = calendar {
        for d in 0..series.dims() {
            cal.assign_days(series.times(d))?;
        }
    }
    let dims = series.dims();
    let mut sweep = Sweep {
        beta: params.beta(),
        level: DMatrix::zeros(dims, dims),
        mass: DMatrix::zeros(dims, dims),
        now: 0.0,
        day: 0,
    };
    let merged = series.merged();
    let mut out: Vec<Vec<f64>> = (0..dims).map(|d| Vec::with_capacity(series.len(d))).collect();
    let mut k = 0;
    while k < merged.len() {
        let t = merged[k].0;
        let group = merged[k..].iter().take_while(|e| e.0 == t).count();
        sweep.advance(t, calendar);
        let base = calendar.map_or(t, |c| c.trading_time_until(t));
        for &(_, i) in &merged[k..k + group] {
            let excited: f64 = (0..dims).map(|j| params.alpha()[(i, j)] * sweep.mass[(i, j)]).sum();
            out[i].push(params.mu()[i] * base + excited);
        }
        for &(_, j) in &merged[k..k + group] {
            for i in 0..dims {
                sweep.level[(i, j)] += 1.0;
            }
        }
        k += group;
    }
    Ok(out)
}

fn rescale_bowsher(params: &BowsherParams, series: &EventSeries, calendar: &TradingCalendar) -> Result<Vec<f64>> {
    params.validate()?;
    let days = split_days(series, calendar)?;
    let p = params;
    let mut out = Vec::with_capacity(series.len(0));
    let mut state = BowsherState::new();
    let mut elapsed = 0.0;
    for (&(open, close), events) in calendar.intervals().iter().zip(days) {
        let spill = p.pi * state.carried;
        // `accrued` is `count - level`, kept separately to avoid cancellation.
        let mut level = 0.0;
        let mut accrued = 0.0;
        let mut last = open;
        for &u in events {
            let step = -p.beta * (u - last);
            accrued -= level * step.exp_m1();
            level *= step.exp();
            let x = u - open;
            let value = elapsed + p.mu * x + spill * -(-p.rho * x).exp_m1() / p.rho + p.alpha / p.beta * accrued;
            out.push(value);
            level += 1.0;
            last = u;
        }
        let (integral, _) = state.day(p, open, close, events)?;
        elapsed += integral;
    }
    Ok(out)
}

/// Successive differences of rescaled times, starting from zero.
pub fn durations(rescaled: &[f64]) -> Vec<f64> {
    let mut prev = 0.0;
    rescaled
        .iter()
        .map(|&t| {
            let d = t - prev;
            prev = t;
            d
        })
        .collect()
}

/// One-sample Kolmogorov–Smirnov test outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub p_value: f64,
    pub n: usize,
}

pub const KS_MIN_SAMPLES: usize = 10;

/// Kolmogorov survival function `Q(x) = 2 sum_{k>=1} (-1)^{k-1} exp(-2 k^2 x^2)`,
/// truncated at 100 terms or once a term drops below `1e-12`.
pub fn kolmogorov_survival(x: f64) -> f64 {
    if x < 0.2 {
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * x * x).exp();
        sum += sign * term;
        if term < 1e-12 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// KS test of `durations` against the Exp(1) distribution.
///
/// The p-value uses the asymptotic Kolmogorov distribution with Stephens'
/// finite-sample scaling `(sqrt(n) + 0.12 + 0.11 / sqrt(n)) D`.
pub fn ks_exp1(durations: &[f64]) -> Result<KsResult> {
    let n = durations.len();
    if n < KS_MIN_SAMPLES {
        return Err(HawkesError::InsufficientData(format!(
            "the KS test needs at least {KS_MIN_SAMPLES} durations, got {n}"
        )));
    }
    if let Some(d) = durations.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
        return Err(HawkesError::InsufficientData(format!("durations must be positive, got {d}")));
    }
    let mut sorted = durations.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let statistic = sorted
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            let cdf = -(-x).exp_m1();
            ((k + 1) as f64 / nf - cdf).max(cdf - k as f64 / nf)
        })
        .fold(0.0, f64::max);
    let root = nf.sqrt();
    let p_value = kolmogorov_survival((root + 0.12 + 0.11 / root) * statistic);
    Ok(KsResult { statistic, p_value, n })
}

/// Q-Q pairs `(theoretical, empirical)`: sorted durations against Exp(1)
/// quantiles at plotting positions `(k - 0.5) / n`.
pub fn qq_points(durations: &[f64]) -> Result<Vec<(f64, f64)>> {
    if durations.is_empty() {
        return Err(HawkesError::InsufficientData("no durations for a Q-Q plot".into()));
    }
    let mut sorted = durations.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(k, x)| (-(-((k as f64 + 0.5) / n)).ln_1p(), x))
        .collect())
}

/// Summary of inter-arrival times in one dimension (seconds).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterarrivalStats {
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator).
    pub std: f64,
    pub q1: f64,
    pub q2: f64,
    pub q3: f64,
    /// Number of events (not differences).
    pub count: usize,
}

/// Quantile of sorted data by linear interpolation between order statistics.
pub fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

pub fn interarrival_stats(series: &EventSeries, dim: usize) -> Result<InterarrivalStats> {
    if dim >= series.dims() {
        return Err(HawkesError::DimensionMismatch(format!("dimension {dim} out of range")));
    }
    let times = series.times(dim);
    if times.len() < 2 {
        return Err(HawkesError::InsufficientData(format!(
            "dimension {dim} has {} events, at least 2 are required",
            times.len()
        )));
    }
    let mut gaps: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    let n = gaps.len() as f64;
    let mean = gaps.iter().sum::<f64>() / n;
    let std = if gaps.len() > 1 {
        (gaps.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    gaps.sort_by(f64::total_cmp);
    Ok(InterarrivalStats {
        mean,
        std,
        q1: quantile(&gaps, 0.25),
        q2: quantile(&gaps, 0.5),
        q3: quantile(&gaps, 0.75),
        count: times.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intensity::compensator_at;

    #[test]
    fn poisson_rescaling_is_linear() {
        let p = ExpHawkesParams::univariate(0.7, 0.0, 1.0).unwrap();
        let s = EventSeries::new(vec![vec![0.5, 2.0, 3.25]], 5.0).unwrap();
        let r = rescale_times(&Model::Hawkes(p), &s, None).unwrap();
        assert_eq!(r[0], vec![0.7 * 0.5, 0.7 * 2.0, 0.7 * 3.25]);
    }

    #[test]
    fn sweep_matches_direct_compensator() {
        let p = ExpHawkesParams::from_rows(vec![0.2, 0.1], &[vec![0.3, 0.2], vec![0.4, 0.1]], &[vec![0.5, 1.5], vec![0.7, 0.2]])
            .unwrap();
        let s = EventSeries::new(vec![vec![0.5, 3.0, 17.0, 18.5], vec![1.0, 3.0, 9.5, 21.0]], 25.0).unwrap();
        let cal = TradingCalendar::regular(2, 10.0, 5.0).unwrap();
        for calendar in [None, Some(&cal)] {
            let r = rescale_times(&Model::Hawkes(p.clone()), &s, calendar).unwrap();
            for d in 0..2 {
                for (k, &t) in s.times(d).iter().enumerate() {
                    let direct = compensator_at(&p, &s, t, d, calendar).unwrap();
                    assert!((r[d][k] - direct).abs() < 1e-12, "{d} {k} {} {direct}", r[d][k]);
                }
            }
        }
    }

    #[test]
    fn durations_start_from_zero() {
        assert_eq!(durations(&[1.0, 1.5, 4.0]), vec![1.0, 0.5, 2.5]);
    }

    #[test]
    fn ks_on_exact_quantiles() {
        let n = 1000;
        let d: Vec<f64> = (1..=n).map(|k| -(1.0 - k as f64 / (n as f64 + 1.0)).ln()).collect();
        let r = ks_exp1(&d).unwrap();
        assert!(r.statistic < 0.01);
        assert!(r.p_value > 0.99);
    }

    #[test]
    fn ks_rejects_bad_input() {
        assert!(ks_exp1(&[1.0; 9]).is_err());
        let mut d = vec![1.0; 20];
        d[3] = 0.0;
        assert!(ks_exp1(&d).is_err());
    }

    #[test]
    fn kolmogorov_reference_values() {
        // Q(1.36) ~ 0.049 and Q(1.63) ~ 0.010 are the classic 5% / 1% critical points.
        assert!((kolmogorov_survival(1.3581) - 0.05).abs() < 5e-4);
        assert!((kolmogorov_survival(1.6276) - 0.01).abs() < 2e-4);
        assert_eq!(kolmogorov_survival(0.0), 1.0);
    }

    #[test]
    fn qq_single_point() {
        let q = qq_points(&[3.0]).unwrap();
        assert_eq!(q.len(), 1);
        assert!((q[0].0 - 2f64.ln()).abs() < 1e-15);
        assert_eq!(q[0].1, 3.0);
        assert!(qq_points(&[]).is_err());
    }

    #[test]
    fn qq_on_exact_quantiles_is_diagonal() {
        let n = 200;
        let d: Vec<f64> = (0..n).map(|k| -(1.0 - (k as f64 + 0.5) / n as f64).ln()).rev().collect();
        for (a, b) in qq_points(&d).unwrap() {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn stats_equally_spaced() {
        let s = EventSeries::new(vec![vec![0.0, 60.0, 120.0, 180.0]], 200.0).unwrap();
        let st = interarrival_stats(&s, 0).unwrap();
        assert_eq!((st.mean, st.std, st.q1, st.q2, st.q3, st.count), (60.0, 0.0, 60.0, 60.0, 60.0, 4));
    }

    #[test]
    fn stats_hand_computed() {
        let s = EventSeries::new(vec![vec![0.0, 1.0, 3.0, 7.0]], 10.0).unwrap();
        let st = interarrival_stats(&s, 0).unwrap();
        assert!((st.mean - 7.0 / 3.0).abs() < 1e-15);
        assert_eq!(st.q2, 2.0);
        assert_eq!(st.q1, 1.5);
        assert_eq!(st.q3, 3.0);
        assert!((st.std - (7.0f64 / 3.0).sqrt()).abs() < 1e-14);
        let short = EventSeries::new(vec![vec![1.0]], 10.0).unwrap();
        assert!(interarrival_stats(&short, 0).is_err());
    }
}

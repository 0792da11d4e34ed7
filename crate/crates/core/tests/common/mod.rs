//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use hawkes_core::likelihood::{hessian_index, nll_gradient};
use hawkes_core::{BowsherParams, EventSeries, ExpHawkesParams, TradingCalendar};
use rand::Rng;
use rand_chacha::ChaCha20Rng;

/// Random parameters; stability is irrelevant for likelihood checks.
pub fn random_params(rng: &mut ChaCha20Rng, dims: usize) -> ExpHawkesParams {
    let mu: Vec<f64> = (0..dims).map(|_| rng.gen_range(0.05..1.0)).collect();
    let alpha: Vec<Vec<f64>> = (0..dims).map(|_| (0..dims).map(|_| rng.gen_range(0.05..0.4)).collect()).collect();
    let beta: Vec<Vec<f64>> = (0..dims).map(|_| (0..dims).map(|_| rng.gen_range(0.2..3.0)).collect()).collect();
    ExpHawkesParams::from_rows(mu, &alpha, &beta).unwrap()
}

/// Uniform event times inside the calendar's trading intervals.
pub fn random_series(rng: &mut ChaCha20Rng, dims: usize, max_events: usize, cal: &TradingCalendar) -> EventSeries {
    let intervals = cal.intervals();
    let mut times = vec![Vec::new(); dims];
    for t in times.iter_mut() {
        let n = rng.gen_range(1..=max_events / dims);
        for _ in 0..n {
            let (open, close) = intervals[rng.gen_range(0..intervals.len())];
            t.push(rng.gen_range(open..close));
        }
        t.sort_by(f64::total_cmp);
        t.dedup();
    }
    EventSeries::new(times, cal.last_close()).unwrap()
}

pub fn random_calendar(rng: &mut ChaCha20Rng, daygap: bool) -> TradingCalendar {
    if daygap {
        TradingCalendar::regular(rng.gen_range(2..=4), rng.gen_range(5.0..20.0), rng.gen_range(1.0..15.0)).unwrap()
    } else {
        TradingCalendar::single(0.0, rng.gen_range(10.0..60.0)).unwrap()
    }
}

/// Intensity of dimension `m` at `t` by direct summation over all earlier events.
pub fn naive_intensity(p: &ExpHawkesParams, s: &EventSeries, m: usize, t: f64) -> f64 {
    let mut lambda = p.mu()[m];
    for n in 0..s.dims() {
        let (a, b) = (p.alpha()[(m, n)], p.beta()[(m, n)]);
        for &u in s.times(n).iter().filter(|&&u| u < t) {
            lambda += a * b * (-b * (t - u)).exp();
        }
    }
    lambda
}

/// Negative log-likelihood with every pair of events visited explicitly.
///
/// The intensity is zero outside trading intervals while kernels keep decaying
/// in calendar time.
pub fn naive_nll(p: &ExpHawkesParams, s: &EventSeries, cal: &TradingCalendar) -> f64 {
    let mut total = 0.0;
    for m in 0..s.dims() {
        total += p.mu()[m] * cal.total_trading_time();
        for n in 0..s.dims() {
            let (a, b) = (p.alpha()[(m, n)], p.beta()[(m, n)]);
            for &u in s.times(n) {
                for &(open, close) in cal.intervals() {
                    if close > u {
                        let from = open.max(u);
                        total += a * ((-b * (from - u)).exp() - (-b * (close - u)).exp());
                    }
                }
            }
        }
        for &t in s.times(m) {
            total -= naive_intensity(p, s, m, t).ln();
        }
    }
    total
}

fn simpson_step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature of a smooth integrand on `[a, b]`.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(&f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Integral of `f(t, start)` over `[a, b]` split at `breaks`, where `start`
/// is the left end of the current piece.
///
/// Integrands that jump at events use `start` to include the event opening
/// the piece, giving the right limit there.
pub fn piecewise_integral<F: Fn(f64, f64) -> f64>(f: F, a: f64, b: f64, breaks: &[f64], tol: f64) -> f64 {
    let mut points = vec![a];
    points.extend(breaks.iter().copied().filter(|&x| x > a && x < b));
    points.push(b);
    points.windows(2).map(|w| adaptive_simpson(|t| f(t, w[0]), w[0], w[1], tol)).sum()
}

/// Spillover-model intensity quantities computed from their definitions.
pub struct BowsherOracle<'a> {
    pub p: BowsherParams,
    pub series: &'a EventSeries,
    pub cal: &'a TradingCalendar,
    /// Stochastic level at each day's close.
    pub levels: Vec<f64>,
}

impl<'a> BowsherOracle<'a> {
    pub fn new(p: BowsherParams, series: &'a EventSeries, cal: &'a TradingCalendar) -> Self {
        let mut levels = Vec::new();
        let mut prev = 0.0;
        for &(open, close) in cal.intervals() {
            let mut level = p.pi * prev * (-p.rho * (close - open)).exp();
            for &u in series.times(0).iter().filter(|&&u| u >= open && u <= close) {
                level += p.alpha * (-p.beta * (close - u)).exp();
            }
            levels.push(level);
            prev = level;
        }
        Self { p, series, cal, levels }
    }

    /// Intensity on day `d` at `t`, counting events strictly before `t`.
    pub fn intensity(&self, d: usize, t: f64) -> f64 {
        self.intensity_from(d, t, f64::NEG_INFINITY)
    }

    /// As [`Self::intensity`], also counting events at or before `start`.
    pub fn intensity_from(&self, d: usize, t: f64, start: f64) -> f64 {
        let (open, close) = self.cal.intervals()[d];
        let carried = if d == 0 { 0.0 } else { self.levels[d - 1] };
        let mut lambda = self.p.mu + self.p.pi * carried * (-self.p.rho * (t - open)).exp();
        for &u in self.series.times(0).iter().filter(|&&u| u >= open && u <= close && (u < t || u <= start)) {
            lambda += self.p.alpha * (-self.p.beta * (t - u)).exp();
        }
        lambda
    }

    /// Quadrature of the intensity plus direct log-sum.
    pub fn nll(&self, tol: f64) -> f64 {
        let mut total = 0.0;
        for (d, &(open, close)) in self.cal.intervals().iter().enumerate() {
            let events: Vec<f64> = self.series.times(0).iter().copied().filter(|&u| u >= open && u <= close).collect();
            total += piecewise_integral(|t, start| self.intensity_from(d, t, start), open, close, &events, tol);
            for &u in &events {
                total -= self.intensity(d, u).ln();
            }
        }
        total
    }
}

/// `(mu, alpha)` perturbed in one coordinate of the Hessian layout.
pub fn perturbed(p: &ExpHawkesParams, index: usize, h: f64) -> ExpHawkesParams {
    let dims = p.dims();
    let (m, k) = (index / (dims + 1), index % (dims + 1));
    let mut mu = p.mu().to_vec();
    let mut alpha = p.alpha().clone();
    if k == 0 {
        mu[m] += h;
    } else {
        alpha[(m, k - 1)] += h;
    }
    ExpHawkesParams::new(mu, alpha, p.beta().clone()).unwrap()
}

pub fn flat_gradient(p: &ExpHawkesParams, s: &EventSeries, cal: &TradingCalendar) -> Vec<f64> {
    let dims = p.dims();
    let (gm, ga) = nll_gradient(p, s, cal).unwrap();
    let mut g = vec![0.0; dims * (dims + 1)];
    for m in 0..dims {
        g[hessian_index(dims, m, None)] = gm[m];
        for n in 0..dims {
            g[hessian_index(dims, m, Some(n))] = ga[(m, n)];
        }
    }
    g
}

pub fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

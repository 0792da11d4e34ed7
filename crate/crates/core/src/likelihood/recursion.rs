use nalgebra::DMatrix;

use crate::calendar::TradingCalendar;
use crate::series::EventSeries;

/// Recursive excitation sums
/// `R_mn(i) = sum over k with t_k^n < t_i^m of exp(-beta_mn (t_i^m - t_k^n))`.
///
/// Each `(m, n)` row is filled in one forward pass over the two event lists.
#[derive(Debug, Clone)]
pub struct RecursionState {
    dims: usize,
    rows: Vec<Vec<f64>>,
}

impl RecursionState {
    pub fn compute(series: &EventSeries, beta: &DMatrix<f64>) -> Self {
        let dims = series.dims();
        let mut rows = Vec::with_capacity(dims * dims);
        for m in 0..dims {
            for n in 0..dims {
                rows.push(recursion_pass(series.times(m), series.times(n), beta[(m, n)]));
            }
        }
        Self { dims, rows }
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    /// `R_mn(i)` for event `i` of target dimension `m`.
    pub fn get(&self, m: usize, n: usize, i: usize) -> f64 {
        self.rows[m * self.dims + n][i]
    }

    pub fn row(&self, m: usize, n: usize) -> &[f64] {
        &self.rows[m * self.dims + n]
    }
}

pub(crate) fn recursion_pass(target: &[f64], source: &[f64], beta: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(target.len());
    let mut r = 0.0;
    let mut k = 0;
    let mut prev: Option<f64> = None;
    for &t in target {
        if let Some(p) = prev {
            r *= (-beta * (t - p)).exp();
        }
        while k < source.len() && source[k] < t {
            r += (-beta * (t - source[k])).exp();
            k += 1;
        }
        out.push(r);
        prev = Some(t);
    }
    out
}

/// Sum over source events of the unit-adjacency kernel mass accrued over
/// trading time up to the last close.
///
/// Contributions carried past a close keep decaying through the gap and are
/// integrated again over later trading intervals.
pub(crate) fn excitation_mass(source: &[f64], days: &[usize], beta: f64, calendar: &TradingCalendar) -> f64 {
    let intervals = calendar.intervals();
    let mut total = 0.0;
    let mut carry = 0.0;
    let mut k = 0;
    for (d, &(open, close)) in intervals.iter().enumerate() {
        let span = close - open;
        total += carry * -(-beta * span).exp_m1();
        let mut at_close = carry * (-beta * span).exp();
        while k < source.len() && days[k] == d {
            let x = -beta * (close - source[k]);
            total -= x.exp_m1();
            at_close += x.exp();
            k += 1;
        }
        carry = match intervals.get(d + 1) {
            Some(&(next_open, _)) => at_close * (-beta * (next_open - close)).exp(),
            None => 0.0,
        };
    }
    total
}

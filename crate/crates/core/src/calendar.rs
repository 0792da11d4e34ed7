use crate::error::{HawkesError, Result};

/// Ordered, disjoint trading intervals of a common length.
///
/// Intensities are null outside the intervals. Interval `d` is the closed
/// span `[open_d, close_d]`; gaps between consecutive intervals may be empty.
#[derive(Debug, Clone, PartialEq)]
pub struct TradingCalendar {
    intervals: Vec<(f64, f64)>,
}

const LENGTH_RTOL: f64 = 1e-9;

impl TradingCalendar {
    pub fn new(intervals: Vec<(f64, f64)>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(HawkesError::InvalidCalendar("no trading intervals".into()));
        }
        let len0 = intervals[0].1 - intervals[0].0;
        for (d, &(open, close)) in intervals.iter().enumerate() {
            if !(open.is_finite() && close.is_finite()) || close <= open {
                return Err(HawkesError::InvalidCalendar(format!(
                    "interval {d} ({open}, {close}) must satisfy close > open"
                )));
            }
            if open < 0.0 {
                return Err(HawkesError::InvalidCalendar(format!("interval {d} opens before 0")));
            }
            if d > 0 && open < intervals[d - 1].1 {
                return Err(HawkesError::InvalidCalendar(format!(
                    "interval {d} overlaps or precedes interval {}",
                    d - 1
                )));
            }
            if ((close - open) - len0).abs() > LENGTH_RTOL * len0 {
                return Err(HawkesError::InvalidCalendar(format!(
                    "interval {d} has length {} but the day length is {len0}",
                    close - open
                )));
            }
        }
        Ok(Self { intervals })
    }

    /// A single interval, the calendar implied by a plain observation window.
    pub fn single(open: f64, close: f64) -> Result<Self> {
        Self::new(vec![(open, close)])
    }

    /// `days` consecutive days of length `day_length` separated by `gap` seconds, starting at 0.
    pub fn regular(days: usize, day_length: f64, gap: f64) -> Result<Self> {
        let step = day_length + gap;
        Self::new((0..days).map(|d| (d as f64 * step, d as f64 * step + day_length)).collect())
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn day_count(&self) -> usize {
        self.intervals.len()
    }

    pub fn day_length(&self) -> f64 {
        self.intervals[0].1 - self.intervals[0].0
    }

    /// Total trading time `D * delta`.
    pub fn total_trading_time(&self) -> f64 {
        self.intervals.iter().map(|(o, c)| c - o).sum()
    }

    pub fn first_open(&self) -> f64 {
        self.intervals[0].0
    }

    pub fn last_close(&self) -> f64 {
        self.intervals[self.intervals.len() - 1].1
    }

    /// Index of the interval containing `t`, if any.
    pub fn locate(&self, t: f64) -> Option<usize> {
        let d = self.intervals.partition_point(|&(open, _)| open <= t);
        if d == 0 {
            return None;
        }
        let (_, close) = self.intervals[d - 1];
        (t <= close).then_some(d - 1)
    }

    pub fn contains(&self, t: f64) -> bool {
        self.locate(t).is_some()
    }

    /// Trading time elapsed in `[0, t]`.
    pub fn trading_time_until(&self, t: f64) -> f64 {
        self.intervals
            .iter()
            .take_while(|&&(open, _)| open < t)
            .map(|&(open, close)| close.min(t) - open)
            .sum()
    }

    /// Assigns every timestamp (sorted ascending) to its interval.
    pub(crate) fn assign_days(&self, times: &[f64]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(times.len());
        let mut d = 0;
        for &t in times {
            while d < self.intervals.len() && t > self.intervals[d].1 {
                d += 1;
            }
            if d == self.intervals.len() || t < self.intervals[d].0 {
                return Err(HawkesError::EventOutsideCalendar { t });
            }
            out.push(d);
        }
        Ok(out)
    }
}

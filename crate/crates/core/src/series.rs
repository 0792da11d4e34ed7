use crate::error::{HawkesError, Result};

/// Multivariate event sample observed on `[0, horizon]`.
///
/// Each dimension holds strictly increasing timestamps in seconds. Distinct
/// dimensions may share a timestamp.
#[derive(Debug, Clone, PartialEq)]
pub struct EventSeries {
    times: Vec<Vec<f64>>,
    horizon: f64,
}

impl EventSeries {
    pub fn new(times: Vec<Vec<f64>>, horizon: f64) -> Result<Self> {
        if times.is_empty() {
            return Err(HawkesError::InvalidSeries("at least one dimension is required".into()));
        }
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(HawkesError::InvalidSeries(format!("horizon must be positive, got {horizon}")));
        }
        for (dim, ts) in times.iter().enumerate() {
            for (k, &t) in ts.iter().enumerate() {
                if !t.is_finite() || t < 0.0 || t > horizon {
                    return Err(HawkesError::InvalidSeries(format!(
                        "event {k} of dimension {dim} at t={t} is outside [0, {horizon}]"
                    )));
                }
                if k > 0 && t <= ts[k - 1] {
                    return Err(HawkesError::InvalidSeries(format!(
                        "dimension {dim} is not strictly increasing at index {k}"
                    )));
                }
            }
        }
        Ok(Self { times, horizon })
    }

    /// An event-free series with `dims` dimensions.
    pub fn empty(dims: usize, horizon: f64) -> Result<Self> {
        Self::new(vec![Vec::new(); dims], horizon)
    }

    pub fn dims(&self) -> usize {
        self.times.len()
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn times(&self, dim: usize) -> &[f64] {
        &self.times[dim]
    }

    pub fn all_times(&self) -> &[Vec<f64>] {
        &self.times
    }

    pub fn len(&self, dim: usize) -> usize {
        self.times[dim].len()
    }

    pub fn total_events(&self) -> usize {
        self.times.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total_events() == 0
    }

    /// All events as `(time, dimension)` in time order. Ties are ordered by dimension.
    pub fn merged(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = self
            .times
            .iter()
            .enumerate()
            .flat_map(|(d, ts)| ts.iter().map(move |&t| (t, d)))
            .collect();
        out.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        out
    }

    /// Events strictly before `t`, keeping the dimension layout. The horizon becomes `t`.
    pub fn truncated(&self, t: f64) -> Result<Self> {
        let times = self
            .times
            .iter()
            .map(|ts| ts.iter().copied().filter(|&s| s < t).collect())
            .collect();
        Self::new(times, t)
    }

    /// Events in `[from, to]`, shifted so that `from` maps to zero.
    pub fn window(&self, from: f64, to: f64) -> Result<Self> {
        let times = self
            .times
            .iter()
            .map(|ts| {
                ts.iter()
                    .copied()
                    .filter(|&s| s >= from && s <= to)
                    .map(|s| s - from)
                    .collect()
            })
            .collect();
        Self::new(times, to - from)
    }
}

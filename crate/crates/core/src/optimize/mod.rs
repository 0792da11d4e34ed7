//! Two-stage likelihood optimization.
//!
//! At fixed decays the negative log-likelihood is convex in `(mu, alpha)` and
//! separates by target dimension; [`inner_minimize`] solves that block with
//! projected Newton or accelerated gradient. [`fit_2shlo`] searches the decays
//! with Nelder–Mead in log space, profiling out `(mu, alpha)` at each probe.
//! [`fit_bowsher`] fits the five-parameter spillover model directly with a
//! bounded quasi-Newton method.

mod agd;
mod bowsher;
mod lbfgsb;
mod nelder_mead;
mod newton;
mod two_stage;

pub use bowsher::fit_bowsher;
pub use lbfgsb::{minimize_bounded, numerical_gradient, BoundedLbfgsConfig, BoundedLbfgsResult};
pub use nelder_mead::{nelder_mead, NelderMeadConfig, NelderMeadResult};
pub use two_stage::{fit_2shlo, initial_beta, inner_minimize, min_beta, inner_minimize_from, InnerSolution};

use crate::params::Model;

/// Projected-gradient threshold of the inner solve, relative to `1 + |nll|`.
pub const KKT_SCALE: f64 = 1e-5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerMethod {
    ProjectedNewton,
    AcceleratedGradient,
}

impl std::str::FromStr for InnerMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "projected-newton" | "newton" => Ok(Self::ProjectedNewton),
            "accelerated-gradient" | "agd" => Ok(Self::AcceleratedGradient),
            other => Err(format!("unknown inner method `{other}` (projected-newton | accelerated-gradient)")),
        }
    }
}

impl std::fmt::Display for InnerMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::ProjectedNewton => "projected-newton",
            Self::AcceleratedGradient => "accelerated-gradient",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimConfig {
    pub inner_method: InnerMethod,
    /// Relative objective change below which the inner solve stops.
    pub inner_tol: f64,
    pub inner_max_iter: usize,
    /// Simplex size, in log-decay space, at which the outer search stops.
    pub outer_tol: f64,
    /// Outer iteration cap; `None` means `200 * M^2`.
    pub outer_max_iter: Option<usize>,
    /// Lower bound for every fitted parameter.
    pub param_floor: f64,
    /// Seed for random inner starting points.
    pub seed: u64,
    /// Start each inner solve from the previous optimum instead of a fresh random point.
    pub warm_start: bool,
}

impl Default for OptimConfig {
    fn default() -> Self {
        Self {
            inner_method: InnerMethod::ProjectedNewton,
            inner_tol: 1e-8,
            inner_max_iter: 500,
            outer_tol: 1e-4,
            outer_max_iter: None,
            param_floor: 1e-8,
            seed: 0,
            warm_start: true,
        }
    }
}

impl OptimConfig {
    pub fn validate(&self) -> crate::Result<()> {
        let positive = [("inner_tol", self.inner_tol), ("outer_tol", self.outer_tol), ("param_floor", self.param_floor)];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(crate::HawkesError::InvalidParams(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.inner_max_iter == 0 {
            return Err(crate::HawkesError::InvalidParams("inner_max_iter must be >= 1".into()));
        }
        Ok(())
    }
}

/// One objective evaluation of the outer search.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    /// Decays probed (row-major) for the two-stage fit; the full parameter
    /// vector `(mu, pi, rho, alpha, beta)` for the spillover fit.
    pub point: Vec<f64>,
    pub nll: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: Model,
    /// Negative log-likelihood at `params`, re-evaluated on the training data.
    pub nll: f64,
    pub outer_iterations: usize,
    pub inner_trace: Vec<TraceEntry>,
    pub converged: bool,
}

/// Result of one convex block solve.
#[derive(Debug, Clone)]
pub(crate) struct BlockSolution {
    pub theta: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Objective after every accepted iterate.
    pub trace: Vec<f64>,
}

pub(crate) fn clamp_floor(x: &[f64], floor: f64) -> Vec<f64> {
    x.iter().map(|v| v.max(floor)).collect()
}

/// Euclidean norm of the projected gradient on `x >= floor`.
pub(crate) fn projected_grad_norm(x: &[f64], grad: &[f64], floor: f64) -> f64 {
    x.iter()
        .zip(grad)
        .map(|(x, g)| if *x <= floor * (1.0 + 1e-9) { g.min(0.0) } else { *g })
        .map(|g| g * g)
        .sum::<f64>()
        .sqrt()
}

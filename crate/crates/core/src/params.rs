use nalgebra::DMatrix;

use crate::error::{HawkesError, Result};

/// Multivariate Hawkes parameters with exponential kernels
/// `phi_ij(t) = alpha_ij * beta_ij * exp(-beta_ij * t)`.
///
/// With this normalization `alpha_ij` is the L1 norm of the kernel, the
/// expected number of direct children in dimension `i` of an event in `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpHawkesParams {
    mu: Vec<f64>,
    alpha: DMatrix<f64>,
    beta: DMatrix<f64>,
}

impl ExpHawkesParams {
    pub fn new(mu: Vec<f64>, alpha: DMatrix<f64>, beta: DMatrix<f64>) -> Result<Self> {
        let m = mu.len();
        if m == 0 {
            return Err(HawkesError::InvalidParams("mu must have at least one entry".into()));
        }
        if alpha.shape() != (m, m) || beta.shape() != (m, m) {
            return Err(HawkesError::InvalidParams(format!(
                "alpha {:?} and beta {:?} must both be {m}x{m}",
                alpha.shape(),
                beta.shape()
            )));
        }
        if let Some(v) = mu.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(HawkesError::InvalidParams(format!("mu entries must be >= 0, got {v}")));
        }
        if let Some(v) = alpha.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(HawkesError::InvalidParams(format!("alpha entries must be >= 0, got {v}")));
        }
        if let Some(v) = beta.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
            return Err(HawkesError::InvalidParams(format!("beta entries must be > 0, got {v}")));
        }
        Ok(Self { mu, alpha, beta })
    }

    /// Builds parameters from row-major nested vectors.
    pub fn from_rows(mu: Vec<f64>, alpha: &[Vec<f64>], beta: &[Vec<f64>]) -> Result<Self> {
        let m = mu.len();
        Self::new(mu, rows_to_matrix(alpha, m, "alpha")?, rows_to_matrix(beta, m, "beta")?)
    }

    /// Univariate parameters.
    pub fn univariate(mu: f64, alpha: f64, beta: f64) -> Result<Self> {
        Self::new(vec![mu], DMatrix::from_element(1, 1, alpha), DMatrix::from_element(1, 1, beta))
    }

    pub fn dims(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn alpha(&self) -> &DMatrix<f64> {
        &self.alpha
    }

    pub fn beta(&self) -> &DMatrix<f64> {
        &self.beta
    }

    /// Same baseline and adjacency with a different decay matrix.
    pub fn with_beta(&self, beta: DMatrix<f64>) -> Result<Self> {
        Self::new(self.mu.clone(), self.alpha.clone(), beta)
    }
}

pub(crate) fn rows_to_matrix(rows: &[Vec<f64>], m: usize, name: &str) -> Result<DMatrix<f64>> {
    if rows.len() != m || rows.iter().any(|r| r.len() != m) {
        return Err(HawkesError::InvalidParams(format!("{name} must be {m}x{m}")));
    }
    Ok(DMatrix::from_fn(m, m, |i, j| rows[i][j]))
}

/// Univariate Hawkes model with overnight spillover.
///
/// On trading day `d` the intensity is `mu + spill_d(t) + excite_d(t)` with
///
/// * `spill_d(t) = pi * L_{d-1} * exp(-rho * (t - open_d))`,
/// * `excite_d(t) = sum over day-d events u < t of alpha * exp(-beta * (t - u))`,
///
/// where `L_{d-1}` is the stochastic part `spill + excite` at the previous
/// close (`L_0 = 0`). Trading time is contiguous: the previous close is
/// identified with the current open.
///
/// The excitation kernel here is `alpha * exp(-beta t)`, unnormalized, so its
/// branching ratio is `alpha / beta`. The equivalent [`ExpHawkesParams`]
/// adjacency is `alpha / beta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BowsherParams {
    pub mu: f64,
    pub pi: f64,
    pub rho: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl BowsherParams {
    pub fn new(mu: f64, pi: f64, rho: f64, alpha: f64, beta: f64) -> Result<Self> {
        let p = Self { mu, pi, rho, alpha, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let nonneg = [("mu", self.mu), ("pi", self.pi), ("alpha", self.alpha)];
        for (name, v) in nonneg {
            if !(v.is_finite() && v >= 0.0) {
                return Err(HawkesError::InvalidParams(format!("{name} must be >= 0, got {v}")));
            }
        }
        for (name, v) in [("rho", self.rho), ("beta", self.beta)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(HawkesError::InvalidParams(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Expected number of same-day children per event, `alpha / beta`.
    pub fn branching_ratio(&self) -> f64 {
        self.alpha / self.beta
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.mu, self.pi, self.rho, self.alpha, self.beta]
    }

    pub fn from_array(v: [f64; 5]) -> Result<Self> {
        Self::new(v[0], v[1], v[2], v[3], v[4])
    }
}

/// Either supported model family.
#[derive(Debug, Clone, PartialEq)]
pub enum Model {
    Hawkes(ExpHawkesParams),
    Bowsher(BowsherParams),
}

impl Model {
    pub fn dims(&self) -> usize {
        match self {
            Model::Hawkes(p) => p.dims(),
            Model::Bowsher(_) => 1,
        }
    }
}

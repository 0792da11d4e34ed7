use nalgebra::DMatrix;

use super::recursion::{excitation_mass, RecursionState};
use super::MIN_INTENSITY;
use crate::calendar::TradingCalendar;
use crate::error::{HawkesError, Result};
use crate::series::EventSeries;

/// Negative log-likelihood as a function of `(mu, alpha)` with the decays held fixed.
///
/// For target dimension `m` the objective is
/// `c_m . theta_m - sum_i log(x_mi . theta_m)` with `theta_m = (mu_m, alpha_m0, .., alpha_m,M-1)`,
/// where `c_m` collects trading time and kernel masses and `x_mi = (1, beta_mn R_mn(i))_n`.
/// Both only depend on the data and the decays, so they are computed once.
/// The targets are decoupled: the Hessian is block diagonal.
#[derive(Debug, Clone)]
pub struct FixedDecayObjective {
    dims: usize,
    blocks: Vec<TargetBlock>,
}

#[derive(Debug, Clone)]
pub(crate) struct TargetBlock {
    pub(crate) target: usize,
    /// Coefficients of the linear (compensator) term, length `1 + M`.
    pub(crate) linear: Vec<f64>,
    /// Row-major `count x (1 + M)` feature matrix.
    pub(crate) features: Vec<f64>,
}

impl TargetBlock {
    pub(crate) fn width(&self) -> usize {
        self.linear.len()
    }

    fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.features.chunks_exact(self.width())
    }

    fn intensity(&self, index: usize, row: &[f64], theta: &[f64]) -> Result<f64> {
        let lambda: f64 = row.iter().zip(theta).map(|(x, t)| x * t).sum();
        if lambda.is_nan() {
            return Err(HawkesError::NonFinite);
        }
        if lambda < MIN_INTENSITY {
            return Err(HawkesError::Infeasible { dim: self.target, index, value: lambda });
        }
        Ok(lambda)
    }

    pub(crate) fn value(&self, theta: &[f64]) -> Result<f64> {
        let mut v: f64 = self.linear.iter().zip(theta).map(|(c, t)| c * t).sum();
        for (i, row) in self.rows().enumerate() {
            v -= self.intensity(i, row, theta)?.ln();
        }
        finite(v)
    }

    pub(crate) fn value_grad(&self, theta: &[f64], grad: &mut [f64]) -> Result<f64> {
        grad.copy_from_slice(&self.linear);
        let mut v: f64 = self.linear.iter().zip(theta).map(|(c, t)| c * t).sum();
        for (i, row) in self.rows().enumerate() {
            let lambda = self.intensity(i, row, theta)?;
            v -= lambda.ln();
            let inv = 1.0 / lambda;
            for (g, x) in grad.iter_mut().zip(row) {
                *g -= x * inv;
            }
        }
        finite(v)
    }

    /// Value, gradient and the `(1+M) x (1+M)` Hessian block.
    pub(crate) fn value_grad_hess(&self, theta: &[f64], grad: &mut [f64], hess: &mut DMatrix<f64>) -> Result<f64> {
        let p = self.width();
        grad.copy_from_slice(&self.linear);
        hess.fill(0.0);
        let mut v: f64 = self.linear.iter().zip(theta).map(|(c, t)| c * t).sum();
        for (i, row) in self.rows().enumerate() {
            let lambda = self.intensity(i, row, theta)?;
            v -= lambda.ln();
            let inv = 1.0 / lambda;
            let inv2 = inv * inv;
            for a in 0..p {
                grad[a] -= row[a] * inv;
                let xa = row[a] * inv2;
                for b in 0..=a {
                    hess[(a, b)] += xa * row[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                hess[(b, a)] = hess[(a, b)];
            }
        }
        finite(v)
    }
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(HawkesError::NonFinite)
    }
}

impl FixedDecayObjective {
    pub fn new(series: &EventSeries, calendar: &TradingCalendar, beta: &DMatrix<f64>) -> Result<Self> {
        let dims = series.dims();
        if beta.shape() != (dims, dims) {
            return Err(HawkesError::DimensionMismatch(format!(
                "beta is {:?}, series has {dims} dimensions",
                beta.shape()
            )));
        }
        if let Some(b) = beta.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
            return Err(HawkesError::InvalidParams(format!("beta entries must be > 0, got {b}")));
        }
        let days: Vec<Vec<usize>> =
            (0..dims).map(|n| calendar.assign_days(series.times(n))).collect::<Result<_>>()?;
        let recursion = RecursionState::compute(series, beta);
        let trading = calendar.total_trading_time();
        let width = dims + 1;
        let blocks = (0..dims)
            .map(|m| {
                let mut linear = Vec::with_capacity(width);
                linear.push(trading);
                for n in 0..dims {
                    linear.push(excitation_mass(series.times(n), &days[n], beta[(m, n)], calendar));
                }
                let count = series.len(m);
                let mut features = Vec::with_capacity(count * width);
                for i in 0..count {
                    features.push(1.0);
                    for n in 0..dims {
                        features.push(beta[(m, n)] * recursion.get(m, n, i));
                    }
                }
                TargetBlock { target: m, linear, features }
            })
            .collect();
        Ok(Self { dims, blocks })
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub(crate) fn blocks(&self) -> &[TargetBlock] {
        &self.blocks
    }

    /// `theta_m = (mu_m, alpha_m.)` for each target.
    pub(crate) fn pack(mu: &[f64], alpha: &DMatrix<f64>) -> Vec<Vec<f64>> {
        (0..mu.len())
            .map(|m| std::iter::once(mu[m]).chain(alpha.row(m).iter().copied()).collect())
            .collect()
    }

    pub(crate) fn unpack(thetas: &[Vec<f64>]) -> (Vec<f64>, DMatrix<f64>) {
        let m = thetas.len();
        let mu = thetas.iter().map(|t| t[0]).collect();
        let alpha = DMatrix::from_fn(m, m, |i, j| thetas[i][1 + j]);
        (mu, alpha)
    }

    fn check(&self, mu: &[f64], alpha: &DMatrix<f64>) -> Result<()> {
        if mu.len() != self.dims || alpha.shape() != (self.dims, self.dims) {
            return Err(HawkesError::DimensionMismatch(format!(
                "objective has {} dimensions",
                self.dims
            )));
        }
        Ok(())
    }

    pub fn value(&self, mu: &[f64], alpha: &DMatrix<f64>) -> Result<f64> {
        self.check(mu, alpha)?;
        let thetas = Self::pack(mu, alpha);
        self.blocks.iter().zip(&thetas).map(|(b, t)| b.value(t)).sum()
    }

    /// Gradient with respect to `mu` and `alpha`.
    pub fn gradient(&self, mu: &[f64], alpha: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
        self.check(mu, alpha)?;
        let thetas = Self::pack(mu, alpha);
        let mut grads = Vec::with_capacity(self.dims);
        for (b, t) in self.blocks.iter().zip(&thetas) {
            let mut g = vec![0.0; b.width()];
            b.value_grad(t, &mut g)?;
            grads.push(g);
        }
        Ok(Self::unpack(&grads))
    }

    /// Hessian over the `M(M+1)` variables ordered target by target:
    /// index `m(M+1)` is `mu_m` and `m(M+1) + 1 + n` is `alpha_mn`.
    pub fn hessian(&self, mu: &[f64], alpha: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        self.check(mu, alpha)?;
        let p = self.dims + 1;
        let thetas = Self::pack(mu, alpha);
        let mut full = DMatrix::zeros(self.dims * p, self.dims * p);
        let mut g = vec![0.0; p];
        let mut block = DMatrix::zeros(p, p);
        for (m, (b, t)) in self.blocks.iter().zip(&thetas).enumerate() {
            b.value_grad_hess(t, &mut g, &mut block)?;
            full.view_mut((m * p, m * p), (p, p)).copy_from(&block);
        }
        Ok(full)
    }
}

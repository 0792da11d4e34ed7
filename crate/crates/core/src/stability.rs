use nalgebra::{DMatrix, DVector};

use crate::params::ExpHawkesParams;

const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITER: usize = 1000;

/// Outcome of the stationarity check on the branching matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stability {
    /// Spectral radius estimate, or the max-row-sum bound when power iteration
    /// did not settle.
    pub spectral_radius: f64,
    pub stable: bool,
    /// False when the radius is only the max-row-sum upper bound.
    pub conclusive: bool,
}

/// Spectral radius of a square matrix by power iteration.
///
/// Returns `(radius, converged)`. When the iteration does not settle within
/// the cap (e.g. a rotational matrix with several dominant eigenvalues), the
/// max absolute row sum is returned instead, which bounds the radius from above.
pub fn spectral_radius(m: &DMatrix<f64>) -> (f64, bool) {
    let n = m.nrows();
    if n == 0 {
        return (0.0, true);
    }
    let mut v = DVector::from_element(n, 1.0 / (n as f64).sqrt());
    let mut estimate = f64::NAN;
    for _ in 0..POWER_MAX_ITER {
        let w = m * &v;
        let norm = w.norm();
        if norm == 0.0 {
            return (0.0, true);
        }
        if (norm - estimate).abs() <= POWER_TOL * norm.max(1.0) {
            return (norm, true);
        }
        estimate = norm;
        v = w / norm;
    }
    let row_bound = m.row_iter().map(|r| r.iter().map(|x| x.abs()).sum::<f64>()).fold(0.0, f64::max);
    (row_bound, false)
}

/// Stationarity of the process: spectral radius of the branching matrix below one.
pub fn stability_check(params: &ExpHawkesParams) -> Stability {
    let (spectral_radius, conclusive) = spectral_radius(params.alpha());
    Stability { spectral_radius, stable: spectral_radius < 1.0, conclusive }
}

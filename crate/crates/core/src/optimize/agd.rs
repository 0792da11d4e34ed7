use nalgebra::DMatrix;

use super::{clamp_floor, projected_grad_norm, BlockSolution, KKT_SCALE};
use crate::error::{HawkesError, Result};
use crate::likelihood::TargetBlock;

/// Accelerated projected gradient (FISTA) with backtracking on the Lipschitz
/// estimate and function-value restarts.
///
/// Coordinates are rescaled by the inverse square root of the Hessian diagonal
/// at the start point, so the baseline and adjacency directions see comparable
/// curvature.
pub(crate) fn accelerated_gradient(
    block: &TargetBlock,
    start: &[f64],
    floor: f64,
    tol: f64,
    max_iter: usize,
) -> Result<BlockSolution> {
    let p = block.width();
    let x0 = clamp_floor(start, floor);
    let mut grad = vec![0.0; p];
    let mut hess = DMatrix::zeros(p, p);
    block.value_grad_hess(&x0, &mut grad, &mut hess)?;
    let scale: Vec<f64> = (0..p)
        .map(|j| if hess[(j, j)] > 0.0 { 1.0 / hess[(j, j)].sqrt() } else { 1.0 })
        .collect();
    let lower: Vec<f64> = scale.iter().map(|s| floor / s).collect();
    let to_x = |z: &[f64]| -> Vec<f64> { z.iter().zip(&scale).map(|(z, s)| (z * s).max(floor)).collect() };
    let project = |z: &mut [f64]| {
        for (v, l) in z.iter_mut().zip(&lower) {
            *v = v.max(*l);
        }
    };
    let eval = |z: &[f64]| -> Result<f64> {
        match block.value(&to_x(z)) {
            Ok(v) => Ok(v),
            Err(HawkesError::Infeasible { .. }) | Err(HawkesError::NonFinite) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };

    let mut z: Vec<f64> = x0.iter().zip(&scale).map(|(x, s)| x / s).collect();
    project(&mut z);
    let mut fz = eval(&z)?;
    let mut y = z.clone();
    let mut momentum: f64 = 1.0;
    let mut lipschitz = 1.0;
    let mut trace = vec![fz];
    let mut gy = vec![0.0; p];

    for iter in 0..max_iter {
        let fy = block.value_grad(&to_x(&y), &mut gy)?;
        for (g, s) in gy.iter_mut().zip(&scale) {
            *g *= s;
        }
        let (next, f_next) = loop {
            let mut cand: Vec<f64> = y.iter().zip(&gy).map(|(y, g)| y - g / lipschitz).collect();
            project(&mut cand);
            let fc = eval(&cand)?;
            let mut lin = 0.0;
            let mut sq = 0.0;
            for j in 0..p {
                let d = cand[j] - y[j];
                lin += gy[j] * d;
                sq += d * d;
            }
            if fc <= fy + lin + 0.5 * lipschitz * sq || sq == 0.0 {
                break (cand, fc);
            }
            lipschitz *= 2.0;
            if !lipschitz.is_finite() {
                return Err(HawkesError::Optimization("step size collapsed in accelerated gradient".into()));
            }
        };
        if f_next > fz {
            momentum = 1.0;
            y = z.clone();
            continue;
        }
        let rel_change = (fz - f_next).abs() / fz.abs().max(f64::MIN_POSITIVE);
        let next_momentum = 0.5 * (1.0 + (1.0 + 4.0 * momentum * momentum).sqrt());
        let w = (momentum - 1.0) / next_momentum;
        y = next.iter().zip(&z).map(|(n, o)| n + w * (n - o)).collect();
        project(&mut y);
        z = next;
        fz = f_next;
        momentum = next_momentum;
        lipschitz *= 0.9;
        trace.push(fz);
        if rel_change < tol {
            let x = to_x(&z);
            block.value_grad(&x, &mut grad)?;
            if projected_grad_norm(&x, &grad, floor) < KKT_SCALE * (1.0 + fz.abs()) {
                return Ok(BlockSolution { theta: x, value: fz, iterations: iter + 1, converged: true, trace });
            }
        }
    }
    Ok(BlockSolution { theta: to_x(&z), value: fz, iterations: max_iter, converged: false, trace })
}

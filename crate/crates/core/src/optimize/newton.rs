use nalgebra::{DMatrix, DVector};

use super::{clamp_floor, projected_grad_norm, BlockSolution, KKT_SCALE};
use crate::error::{HawkesError, Result};
use crate::likelihood::TargetBlock;

const SHRINK: f64 = 0.5;
const MIN_STEP: f64 = 1e-20;
const MAX_DAMPING_DOUBLINGS: usize = 10;

fn at_bound(x: f64, floor: f64) -> bool {
    x <= floor * (1.0 + 1e-9)
}

/// Solves `H d = -g` restricted to the free variables. Non-positive-definite
/// systems are damped with `1e-8 I`, doubled until Cholesky succeeds.
fn newton_direction(hess: &DMatrix<f64>, grad: &[f64], free: &[usize]) -> Option<DVector<f64>> {
    let k = free.len();
    let sub = DMatrix::from_fn(k, k, |a, b| hess[(free[a], free[b])]);
    let rhs = DVector::from_fn(k, |a, _| -grad[free[a]]);
    if let Some(ch) = sub.clone().cholesky() {
        return Some(ch.solve(&rhs));
    }
    let mut damping = 1e-8 * (1.0 + sub.diagonal().amax());
    for _ in 0..MAX_DAMPING_DOUBLINGS {
        let mut damped = sub.clone();
        for a in 0..k {
            damped[(a, a)] += damping;
        }
        if let Some(ch) = damped.cholesky() {
            return Some(ch.solve(&rhs));
        }
        damping *= 2.0;
    }
    None
}

/// Projected Newton descent on one target block.
///
/// Variables sitting on the floor with a positive gradient are held fixed and
/// the Newton system is solved over the rest; the step is halved until the
/// projected point does not increase the objective.
pub(crate) fn projected_newton(
    block: &TargetBlock,
    start: &[f64],
    floor: f64,
    tol: f64,
    max_iter: usize,
) -> Result<BlockSolution> {
    let p = block.width();
    let mut x = clamp_floor(start, floor);
    let mut grad = vec![0.0; p];
    let mut hess = DMatrix::zeros(p, p);
    let mut f = block.value_grad_hess(&x, &mut grad, &mut hess)?;
    let mut trace = vec![f];
    let mut rel_change = f64::INFINITY;

    for iter in 0..max_iter {
        let pg = projected_grad_norm(&x, &grad, floor);
        let kkt = pg < KKT_SCALE * (1.0 + f.abs());
        if kkt && (rel_change < tol || pg == 0.0) {
            return Ok(BlockSolution { theta: x, value: f, iterations: iter, converged: true, trace });
        }
        let free: Vec<usize> = (0..p).filter(|&j| !(at_bound(x[j], floor) && grad[j] > 0.0)).collect();
        if free.is_empty() {
            return Ok(BlockSolution { theta: x, value: f, iterations: iter, converged: kkt, trace });
        }
        let dir = newton_direction(&hess, &grad, &free)
            .ok_or_else(|| HawkesError::Optimization("Newton system could not be factorized".into()))?;
        let mut step = 1.0;
        let mut accepted = None;
        let mut saw_feasible = false;
        while step >= MIN_STEP {
            let mut cand = x.clone();
            for (a, &j) in free.iter().enumerate() {
                cand[j] += step * dir[a];
            }
            let cand = clamp_floor(&cand, floor);
            match block.value(&cand) {
                Ok(v) => {
                    saw_feasible = true;
                    if v <= f {
                        accepted = Some((cand, v));
                        break;
                    }
                }
                Err(HawkesError::Infeasible { .. }) | Err(HawkesError::NonFinite) => {}
                Err(e) => return Err(e),
            }
            step *= SHRINK;
        }
        let Some((next, next_f)) = accepted else {
            if !saw_feasible {
                return Err(HawkesError::Optimization(format!(
                    "likelihood infeasible at every backtracked step for dimension {}",
                    block.target
                )));
            }
            return Ok(BlockSolution { theta: x, value: f, iterations: iter, converged: kkt, trace });
        };
        assert!(next_f <= f, "projected Newton accepted an ascent step");
        rel_change = (f - next_f).abs() / f.abs().max(f64::MIN_POSITIVE);
        x = next;
        f = block.value_grad_hess(&x, &mut grad, &mut hess)?;
        trace.push(f);
    }
    let kkt = projected_grad_norm(&x, &grad, floor) < KKT_SCALE * (1.0 + f.abs());
    Ok(BlockSolution { theta: x, value: f, iterations: max_iter, converged: kkt && rel_change < tol, trace })
}

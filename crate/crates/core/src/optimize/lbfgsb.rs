use std::collections::VecDeque;

/// Settings for the lower-bounded limited-memory quasi-Newton method.
#[derive(Debug, Clone, Copy)]
pub struct BoundedLbfgsConfig {
    pub memory: usize,
    pub max_iter: usize,
    /// Stop when the relative objective decrease of an iteration falls below this.
    pub ftol: f64,
    /// Stop when the projected gradient max norm falls below this.
    pub pgtol: f64,
    /// Central-difference step for the numerical gradient.
    pub gradient_step: f64,
}

impl Default for BoundedLbfgsConfig {
    fn default() -> Self {
        Self { memory: 10, max_iter: 500, ftol: 1e-12, pgtol: 1e-6, gradient_step: 1e-6 }
    }
}

#[derive(Debug, Clone)]
pub struct BoundedLbfgsResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
    /// `(point, value)` after every iteration.
    pub trace: Vec<(Vec<f64>, f64)>,
}

const ARMIJO: f64 = 1e-4;
const MAX_BACKTRACK: usize = 60;

fn project(x: &mut [f64], lower: &[f64]) {
    for (v, l) in x.iter_mut().zip(lower) {
        *v = v.max(*l);
    }
}

fn pg_norm(x: &[f64], g: &[f64], lower: &[f64]) -> f64 {
    x.iter()
        .zip(g)
        .zip(lower)
        .map(|((x, g), l)| if *x <= *l && *g > 0.0 { 0.0 } else { g.abs() })
        .fold(0.0, f64::max)
}

/// Central differences, switching to a forward difference where the backward
/// point would cross the lower bound.
pub fn numerical_gradient<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64], fx: f64, lower: &[f64], h: f64) -> Vec<f64> {
    let mut g = vec![0.0; x.len()];
    let mut probe = x.to_vec();
    for j in 0..x.len() {
        if x[j] - h >= lower[j] {
            probe[j] = x[j] + h;
            let up = f(&probe);
            probe[j] = x[j] - h;
            let down = f(&probe);
            g[j] = (up - down) / (2.0 * h);
        } else {
            probe[j] = x[j] + h;
            g[j] = (f(&probe) - fx) / h;
        }
        probe[j] = x[j];
    }
    g
}

/// Minimizes `f` subject to `x >= lower` using projected L-BFGS steps on the
/// free variables and numerical gradients.
///
/// Variables at their bound with a gradient pushing outward are frozen for
/// the iteration; the two-loop recursion runs on the remaining coordinates and
/// an Armijo backtracking search follows the projected path.
pub fn minimize_bounded<F>(mut f: F, x0: &[f64], lower: &[f64], config: &BoundedLbfgsConfig) -> BoundedLbfgsResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evaluations = 0usize;
    let mut objective = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut x = x0.to_vec();
    project(&mut x, lower);
    let mut fx = objective(&x);
    let mut g = numerical_gradient(&mut objective, &x, fx, lower, config.gradient_step);
    let mut memory: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::with_capacity(config.memory);
    let mut trace = vec![(x.clone(), fx)];
    let mut converged = false;
    let mut iterations = 0;

    while iterations < config.max_iter {
        if pg_norm(&x, &g, lower) <= config.pgtol {
            converged = true;
            break;
        }
        iterations += 1;
        let free: Vec<bool> = (0..n).map(|j| !(x[j] <= lower[j] && g[j] > 0.0)).collect();
        let masked = |v: &[f64]| -> Vec<f64> { v.iter().zip(&free).map(|(v, &f)| if f { *v } else { 0.0 }).collect() };
        let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(a, b)| a * b).sum() };

        let mut q = masked(&g);
        let mut alphas = Vec::with_capacity(memory.len());
        for (s, y, rho) in memory.iter().rev() {
            let a = rho * dot(&masked(s), &q);
            let ym = masked(y);
            for (qj, yj) in q.iter_mut().zip(&ym) {
                *qj -= a * yj;
            }
            alphas.push(a);
        }
        if let Some((s, y, _)) = memory.back() {
            let (sm, ym) = (masked(s), masked(y));
            let yy = dot(&ym, &ym);
            if yy > 0.0 {
                let gamma = dot(&sm, &ym) / yy;
                if gamma > 0.0 {
                    q.iter_mut().for_each(|v| *v *= gamma);
                }
            }
        } else {
            let gn = dot(&q, &q).sqrt();
            if gn > 0.0 {
                q.iter_mut().for_each(|v| *v /= gn.max(1.0));
            }
        }
        for ((s, y, rho), a) in memory.iter().zip(alphas.iter().rev()) {
            let b = rho * dot(&masked(y), &q);
            let sm = masked(s);
            for (qj, sj) in q.iter_mut().zip(&sm) {
                *qj += (a - b) * sj;
            }
        }
        let mut dir: Vec<f64> = masked(&q).iter().map(|v| -v).collect();
        if dot(&dir, &g) >= 0.0 {
            memory.clear();
            dir = masked(&g).iter().map(|v| -v).collect();
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..MAX_BACKTRACK {
            let mut cand: Vec<f64> = x.iter().zip(&dir).map(|(x, d)| x + step * d).collect();
            project(&mut cand, lower);
            let fc = objective(&cand);
            let decrease: f64 = g.iter().zip(cand.iter().zip(&x)).map(|(g, (c, x))| g * (c - x)).sum();
            if fc.is_finite() && fc <= fx + ARMIJO * decrease {
                accepted = Some((cand, fc));
                break;
            }
            step *= 0.5;
        }
        let Some((next, f_next)) = accepted else {
            if memory.is_empty() {
                break;
            }
            memory.clear();
            continue;
        };
        let g_next = numerical_gradient(&mut objective, &next, f_next, lower, config.gradient_step);
        let s: Vec<f64> = next.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = g_next.iter().zip(&g).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-10 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            if memory.len() == config.memory {
                memory.pop_front();
            }
            memory.push_back((s, y, 1.0 / sy));
        }
        let rel = (fx - f_next) / fx.abs().max(f_next.abs()).max(1.0);
        x = next;
        fx = f_next;
        g = g_next;
        trace.push((x.clone(), fx));
        if rel <= config.ftol {
            converged = true;
            break;
        }
    }
    BoundedLbfgsResult { x, value: fx, iterations, evaluations, converged, trace }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unconstrained_quadratic() {
        let f = |x: &[f64]| (x[0] - 2.0).powi(2) + 10.0 * (x[1] - 3.0).powi(2) + x[0] * x[1];
        let r = minimize_bounded(f, &[5.0, 5.0], &[-100.0, -100.0], &BoundedLbfgsConfig::default());
        assert!(r.converged);
        assert!((r.x[0] - 20.0 / 39.0).abs() < 1e-5, "{:?}", r.x);
        assert!((r.x[1] - 116.0 / 39.0).abs() < 1e-5, "{:?}", r.x);
    }

    #[test]
    fn active_lower_bound() {
        let f = |x: &[f64]| (x[0] + 1.0).powi(2) + (x[1] - 0.5).powi(2);
        let r = minimize_bounded(f, &[1.0, 1.0], &[0.0, 0.0], &BoundedLbfgsConfig::default());
        assert!(r.converged);
        assert_eq!(r.x[0], 0.0);
        assert!((r.x[1] - 0.5).abs() < 1e-5);
    }
}

/// Downhill simplex settings.
#[derive(Debug, Clone, Copy)]
pub struct NelderMeadConfig {
    /// Offset added to each coordinate of the start point to build the initial simplex.
    pub initial_step: f64,
    /// Converged once every vertex is within this distance (max norm) of the best one.
    pub xtol: f64,
    /// Also converged once vertex values agree to this relative spread.
    pub frtol: f64,
    pub max_iter: usize,
}

impl Default for NelderMeadConfig {
    fn default() -> Self {
        Self { initial_step: 0.25, xtol: 1e-4, frtol: 1e-12, max_iter: 1000 }
    }
}

#[derive(Debug, Clone)]
pub struct NelderMeadResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub evaluations: usize,
    pub converged: bool,
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

/// Minimizes `f` with the Nelder–Mead simplex method. Non-finite values are
/// treated as `+inf`.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], config: &NelderMeadConfig) -> NelderMeadResult
where
    F: FnMut(&[f64]) -> f64,
{
    let n = x0.len();
    let mut evaluations = 0;
    let mut eval = |x: &[f64]| {
        evaluations += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
    let v0 = eval(x0);
    simplex.push((x0.to_vec(), v0));
    for k in 0..n {
        let mut x = x0.to_vec();
        x[k] += config.initial_step;
        let v = eval(&x);
        simplex.push((x, v));
    }

    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iter {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = &simplex[0];
        let size = simplex[1..]
            .iter()
            .map(|(x, _)| x.iter().zip(&best.0).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        let spread = simplex[n].1 - best.1;
        if size <= config.xtol || (spread.is_finite() && spread <= config.frtol * (1.0 + best.1.abs())) {
            converged = true;
            break;
        }
        iterations += 1;

        let centroid: Vec<f64> =
            (0..n).map(|j| simplex[..n].iter().map(|(x, _)| x[j]).sum::<f64>() / n as f64).collect();
        let along = |t: f64, worst: &[f64]| -> Vec<f64> {
            centroid.iter().zip(worst).map(|(c, w)| c + t * (c - w)).collect()
        };
        let worst = simplex[n].0.clone();
        let worst_v = simplex[n].1;
        let second_v = simplex[n - 1].1;
        let best_v = simplex[0].1;

        let xr = along(REFLECT, &worst);
        let vr = eval(&xr);
        if vr < best_v {
            let xe = along(EXPAND, &worst);
            let ve = eval(&xe);
            simplex[n] = if ve < vr { (xe, ve) } else { (xr, vr) };
            continue;
        }
        if vr < second_v {
            simplex[n] = (xr, vr);
            continue;
        }
        let (xc, vc) = if vr < worst_v {
            let xc = along(REFLECT * CONTRACT, &worst);
            let vc = eval(&xc);
            (xc, vc)
        } else {
            let xc = along(-CONTRACT, &worst);
            let vc = eval(&xc);
            (xc, vc)
        };
        if vc < worst_v.min(vr) {
            simplex[n] = (xc, vc);
            continue;
        }
        let best_x = simplex[0].0.clone();
        for vertex in simplex.iter_mut().skip(1) {
            let x: Vec<f64> = best_x.iter().zip(&vertex.0).map(|(b, v)| b + SHRINK * (v - b)).collect();
            let v = eval(&x);
            *vertex = (x, v);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, value) = simplex.swap_remove(0);
    NelderMeadResult { x, value, iterations, evaluations, converged }
}

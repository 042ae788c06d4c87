//! Derivative-free simplex minimization (Nelder-Mead).
//!
//! The objective may return `f64::INFINITY` to mark infeasible points; the
//! search contracts away from them.

#[derive(Debug, Clone)]
pub struct NmOptions {
    pub max_iter: usize,
    /// Absolute tolerance on the objective spread across the simplex.
    pub ftol: f64,
    /// Edge length of the initial simplex, per coordinate.
    pub initial_step: f64,
}

impl Default for NmOptions {
    fn default() -> Self {
        Self { max_iter: 5000, ftol: 1e-8, initial_step: 0.5 }
    }
}

#[derive(Debug, Clone)]
pub struct NmResult {
    pub x: Vec<f64>,
    pub fx: f64,
    pub iters: usize,
    pub evals: usize,
    pub converged: bool,
}

/// Minimize `f` starting from `x0` with the classic reflection/expansion/
/// contraction/shrink moves (coefficients 1, 2, 1/2, 1/2).
pub fn nelder_mead<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: &NmOptions) -> NmResult {
    let n = x0.len();
    assert!(n > 0, "empty parameter vector");
    let mut evals = 0usize;
    let mut eval = |x: &[f64], evals: &mut usize| -> f64 {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };

    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for k in 0..n {
        let mut v = x0.to_vec();
        v[k] += opts.initial_step;
        simplex.push(v);
    }
    let mut fvals: Vec<f64> = simplex.iter().map(|v| eval(v, &mut evals)).collect();

    let mut iters = 0usize;
    let mut converged = false;
    while iters < opts.max_iter {
        iters += 1;
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| fvals[a].partial_cmp(&fvals[b]).unwrap_or(std::cmp::Ordering::Equal));
        let best = order[0];
        let worst = order[n];
        let second_worst = order[n - 1];

        if fvals[worst].is_finite() && (fvals[worst] - fvals[best]).abs() < opts.ftol {
            converged = true;
            break;
        }

        // centroid of all but the worst vertex
        let mut centroid = vec![0.0; n];
        for (i, v) in simplex.iter().enumerate() {
            if i != worst {
                for k in 0..n {
                    centroid[k] += v[k] / n as f64;
                }
            }
        }

        let lerp = |a: &[f64], b: &[f64], t: f64| -> Vec<f64> {
            a.iter().zip(b).map(|(&x, &y)| x + t * (y - x)).collect()
        };

        // reflect
        let xr = lerp(&centroid, &simplex[worst], -1.0);
        let fr = eval(&xr, &mut evals);
        if fr < fvals[best] {
            // expand
            let xe = lerp(&centroid, &simplex[worst], -2.0);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                simplex[worst] = xe;
                fvals[worst] = fe;
            } else {
                simplex[worst] = xr;
                fvals[worst] = fr;
            }
            continue;
        }
        if fr < fvals[second_worst] {
            simplex[worst] = xr;
            fvals[worst] = fr;
            continue;
        }
        // contract (outside if the reflection improved on the worst)
        let xc = if fr < fvals[worst] {
            lerp(&centroid, &xr, 0.5)
        } else {
            lerp(&centroid, &simplex[worst], 0.5)
        };
        let fc = eval(&xc, &mut evals);
        if fc < fvals[worst].min(fr) {
            simplex[worst] = xc;
            fvals[worst] = fc;
            continue;
        }
        // shrink toward the best vertex
        let best_v = simplex[best].clone();
        for i in 0..=n {
            if i != best {
                simplex[i] = lerp(&best_v, &simplex[i], 0.5);
                fvals[i] = eval(&simplex[i], &mut evals);
            }
        }
    }

    let (mut bi, mut bf) = (0usize, fvals[0]);
    for (i, &v) in fvals.iter().enumerate() {
        if v < bf {
            bi = i;
            bf = v;
        }
    }
    NmResult { x: simplex[bi].clone(), fx: bf, iters, evals, converged }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_bowl() {
        let f = |x: &[f64]| (x[0] - 1.5).powi(2) + 3.0 * (x[1] + 0.5).powi(2);
        let r = nelder_mead(f, &[5.0, 5.0], &NmOptions::default());
        assert!(r.converged);
        assert!((r.x[0] - 1.5).abs() < 1e-4, "x0={}", r.x[0]);
        assert!((r.x[1] + 0.5).abs() < 1e-4, "x1={}", r.x[1]);
    }

    #[test]
    fn rosenbrock_2d() {
        let f = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = nelder_mead(f, &[-1.2, 1.0], &NmOptions { max_iter: 20_000, ..Default::default() });
        assert!((r.x[0] - 1.0).abs() < 1e-3);
        assert!((r.x[1] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn infeasible_regions_are_avoided() {
        // infinity outside the unit disc, minimum on the boundary direction
        let f = |x: &[f64]| {
            if x[0] * x[0] + x[1] * x[1] > 1.0 {
                f64::INFINITY
            } else {
                (x[0] - 2.0).powi(2) + x[1] * x[1]
            }
        };
        let r = nelder_mead(f, &[0.0, 0.1], &NmOptions::default());
        assert!(r.fx.is_finite());
        assert!((r.x[0] - 1.0).abs() < 1e-3);
    }
}

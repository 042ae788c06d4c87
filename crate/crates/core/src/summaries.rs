//! Scalar dependence summaries and extreme-event prediction.
//!
//! For thresholds `y` on the unit Fréchet scale, the exponent function
//! approximates the probability that some component exceeds its threshold
//! and the tail dependence function the probability that all components do
//! simultaneously. The approximations hold when the thresholds are high;
//! values are clipped to `[0, 1]` with a regime flag otherwise.

use crate::angular::AngularModel;
use crate::error::{Error, Result};
use crate::margins::{to_unit_frechet, MarginalModel};

/// Extremal coefficient `V(1, …, 1)`: the effective number of independent
/// components, in `[1, d]`.
pub fn extremal_coefficient(m: &AngularModel) -> Result<f64> {
    let ones = vec![1.0; m.d()];
    let theta = m.exponent_function(&ones)?;
    Ok(theta.clamp(1.0, m.d() as f64))
}

/// Coefficient of upper tail dependence `R(1, …, 1)`, in `[0, 1]`.
pub fn chi_coefficient(m: &AngularModel) -> Result<f64> {
    let ones = vec![1.0; m.d()];
    let chi = match m {
        AngularModel::HuslerReiss(p) => p.failure_probability(&ones)?,
        _ => m.tail_dependence(&ones)?,
    };
    Ok(chi.clamp(0.0, 1.0))
}

/// A probability approximation plus a flag marking evaluations outside the
/// regime where the approximation is trustworthy.
#[derive(Debug, Clone, Copy)]
pub struct ProbEstimate {
    pub value: f64,
    pub regime_warning: bool,
}

fn regime_flag(m: &AngularModel, y: &[f64], value: f64) -> bool {
    let radius: f64 = y.iter().sum();
    value > 0.5 || radius < 2.0 * m.d() as f64
}

/// Probability that at least one component exceeds its Fréchet-scale
/// threshold: `V(y)`, clipped to `[0, 1]`.
pub fn prob_union_exceed(m: &AngularModel, y: &[f64]) -> Result<ProbEstimate> {
    let v = m.exponent_function(y)?;
    Ok(ProbEstimate { value: v.clamp(0.0, 1.0), regime_warning: regime_flag(m, y, v) })
}

/// Probability that every component exceeds its Fréchet-scale threshold:
/// `R(y)`, clipped to `[0, 1]`. Uses the closed multivariate-normal survival
/// form for the Hüsler-Reiss family and simplex quadrature otherwise.
pub fn prob_failure_region(m: &AngularModel, y: &[f64]) -> Result<ProbEstimate> {
    let r = match m {
        AngularModel::HuslerReiss(p) => {
            if y.len() != m.d() {
                return Err(Error::Validation("threshold length mismatch".into()));
            }
            p.failure_probability(y)?
        }
        _ => m.tail_dependence(y)?,
    };
    Ok(ProbEstimate { value: r.clamp(0.0, 1.0), regime_warning: regime_flag(m, y, r) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventMode {
    /// Some component exceeds its threshold.
    Union,
    /// Every component exceeds its threshold.
    Intersection,
}

/// An extreme event on the unit Fréchet scale.
#[derive(Debug, Clone)]
pub struct FailureEvent {
    pub thresholds: Vec<f64>,
    pub mode: EventMode,
}

/// Map raw-scale thresholds through fitted margins to the Fréchet scale.
pub fn raw_event_to_frechet(raw: &[f64], margins: &[MarginalModel]) -> Result<Vec<f64>> {
    if raw.len() != margins.len() {
        return Err(Error::Validation("one marginal model per threshold required".into()));
    }
    let mut out = Vec::with_capacity(raw.len());
    for (x, m) in raw.iter().zip(margins) {
        out.push(to_unit_frechet(&[*x], m)?[0]);
    }
    Ok(out)
}

pub fn event_probability(m: &AngularModel, event: &FailureEvent) -> Result<ProbEstimate> {
    match event.mode {
        EventMode::Union => prob_union_exceed(m, &event.thresholds),
        EventMode::Intersection => prob_failure_region(m, &event.thresholds),
    }
}

/// Joint return level for a single free component: the threshold `y_j`
/// solving `p = R(y)` with the other coordinates fixed. Bisection on the
/// monotone map to relative tolerance 1e-8.
pub fn joint_return_level(
    m: &AngularModel,
    p: f64,
    free: usize,
    fixed: &[(usize, f64)],
) -> Result<f64> {
    let d = m.d();
    if free >= d || fixed.len() != d - 1 {
        return Err(Error::Validation("need exactly one threshold per non-free component".into()));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Domain(format!("probability must lie in (0,1), got {p}")));
    }
    let mut y = vec![0.0; d];
    for &(j, v) in fixed {
        if j >= d || j == free {
            return Err(Error::Validation("fixed indices must cover the non-free components".into()));
        }
        if !(v > 0.0) {
            return Err(Error::Validation("fixed thresholds must be positive".into()));
        }
        y[j] = v;
    }

    let eval = |x: f64, y: &mut [f64]| -> Result<f64> {
        y[free] = x;
        Ok(prob_failure_region(m, y)?.value)
    };

    let mut lo = 1e-3;
    let p_lo = eval(lo, &mut y)?;
    if p >= p_lo {
        return Err(Error::Domain(format!(
            "requested probability {p} is not attainable: maximum over the search bracket is {p_lo}"
        )));
    }
    let mut hi = lo.max(1.0);
    let mut p_hi = eval(hi, &mut y)?;
    let mut grow = 0;
    while p_hi > p {
        hi *= 4.0;
        p_hi = eval(hi, &mut y)?;
        grow += 1;
        if grow > 40 {
            return Err(Error::Domain(format!(
                "requested probability {p} is below the attainable range (R = {p_hi} at y = {hi:.3e})"
            )));
        }
    }
    // bisection: R is decreasing in the free threshold
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let pm = eval(mid, &mut y)?;
        if pm > p {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-8 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Contour of pairwise joint return levels: points `(y_i, y_j)` satisfying
/// `p = R(y)` with the remaining coordinates fixed. At least `min_points`
/// points, ordered by increasing `y_i`.
pub fn return_level_contour(
    m: &AngularModel,
    p: f64,
    free: (usize, usize),
    fixed: &[(usize, f64)],
    min_points: usize,
) -> Result<Vec<(f64, f64)>> {
    let d = m.d();
    let (fi, fj) = free;
    if fi == fj || fi >= d || fj >= d || fixed.len() != d - 2 {
        return Err(Error::Validation("need two distinct free components and fixed thresholds for the rest".into()));
    }
    // largest attainable y_i: solve with y_j pushed to zero (the j-constraint
    // then never binds)
    let mut fixed_i = fixed.to_vec();
    fixed_i.push((fj, 1e-6));
    let yi_max = joint_return_level(m, p, fi, &fixed_i)?;

    let n_grid = min_points.max(8) * 6 / 5;
    let lo = yi_max / 60.0;
    let hi = yi_max * 0.995;
    let mut out = Vec::with_capacity(n_grid);
    for k in 0..n_grid {
        let t = k as f64 / (n_grid - 1) as f64;
        let yi = lo * (hi / lo).powf(t);
        let mut fixed_j = fixed.to_vec();
        fixed_j.push((fi, yi));
        match joint_return_level(m, p, fj, &fixed_j) {
            Ok(yj) => out.push((yi, yj)),
            Err(Error::Domain(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    if out.len() < min_points {
        return Err(Error::Domain(format!(
            "only {} contour points attainable for p = {p}",
            out.len()
        )));
    }
    Ok(out)
}

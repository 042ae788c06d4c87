//! Semiparametric marginal models and the transform chain to pseudo-polar
//! coordinates.
//!
//! Each margin is modelled empirically below a threshold quantile and by a
//! generalized Pareto distribution (GPD) above it. The composite cdf
//!
//! ```text
//! F(x) = q * rank(x) / k                          x <= u
//! F(x) = q + (1 - q) * G(x - u; sigma, xi)        x >  u
//! ```
//!
//! is continuous at the threshold `u` (the empirical piece reaches exactly `q`
//! there) and never attains 0 or 1 on observed data, so the probability
//! integral transform to the unit Fréchet scale `y = -1 / log F(x)` is well
//! defined. Radial distances and simplex angles follow as `r = y_1 + … + y_d`,
//! `w = y / r`.

use crate::error::{Error, Result};
use crate::optim::{nelder_mead, NmOptions};

/// Empirical-below / GPD-above-threshold marginal distribution.
#[derive(Debug, Clone)]
pub struct MarginalModel {
    threshold_quantile: f64,
    threshold_value: f64,
    gpd_scale: f64,
    gpd_shape: f64,
    /// Sorted non-exceedances; the empirical piece of the composite cdf.
    below_sorted: Vec<f64>,
    n: usize,
    n_exceed: usize,
}

const MIN_OBS: usize = 50;
const MIN_EXCEED: usize = 20;

/// GPD cdf at excess `z >= 0`.
fn gpd_cdf(z: f64, scale: f64, shape: f64) -> f64 {
    if z <= 0.0 {
        return 0.0;
    }
    if shape.abs() < 1e-8 {
        1.0 - (-z / scale).exp()
    } else {
        let t = 1.0 + shape * z / scale;
        if t <= 0.0 {
            1.0 // beyond the upper endpoint when shape < 0
        } else {
            1.0 - t.powf(-1.0 / shape)
        }
    }
}

/// GPD quantile at probability `p` in [0, 1).
fn gpd_quantile(p: f64, scale: f64, shape: f64) -> f64 {
    if shape.abs() < 1e-8 {
        -scale * (1.0 - p).ln()
    } else {
        scale / shape * ((1.0 - p).powf(-shape) - 1.0)
    }
}

fn gpd_neg_loglik(excesses: &[f64], scale: f64, shape: f64) -> f64 {
    if scale <= 0.0 {
        return f64::INFINITY;
    }
    let m = excesses.len() as f64;
    if shape.abs() < 1e-8 {
        m * scale.ln() + excesses.iter().sum::<f64>() / scale
    } else {
        let mut acc = 0.0;
        for &z in excesses {
            let t = 1.0 + shape * z / scale;
            if t <= 0.0 {
                return f64::INFINITY;
            }
            acc += t.ln();
        }
        m * scale.ln() + (1.0 + 1.0 / shape) * acc
    }
}

/// Type-7 empirical quantile (linear interpolation between order statistics).
fn empirical_quantile(sorted: &[f64], q: f64) -> f64 {
    let n = sorted.len();
    let h = (n - 1) as f64 * q;
    let lo = h.floor() as usize;
    if lo + 1 >= n {
        return sorted[n - 1];
    }
    sorted[lo] + (h - lo as f64) * (sorted[lo + 1] - sorted[lo])
}

fn logistic(u: f64) -> f64 {
    1.0 / (1.0 + (-u).exp())
}

impl MarginalModel {
    /// Fit the composite marginal model: empirical cdf below the
    /// `threshold_quantile` quantile, maximum-likelihood GPD above it.
    ///
    /// The GPD is optimized on `(log sigma, t)` with the shape constrained to
    /// `(-0.5, 1)` through a logistic map, starting from method-of-moments
    /// values.
    pub fn fit(x: &[f64], threshold_quantile: f64) -> Result<Self> {
        if !(0.0 < threshold_quantile && threshold_quantile < 1.0) {
            return Err(Error::Validation(format!(
                "threshold quantile must lie in (0,1), got {threshold_quantile}"
            )));
        }
        if x.len() < MIN_OBS {
            return Err(Error::Estimation(format!(
                "need at least {MIN_OBS} observations to fit a margin, got {}",
                x.len()
            )));
        }
        if let Some(i) = x.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("non-finite observation at index {i}")));
        }

        let mut sorted = x.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let u = empirical_quantile(&sorted, threshold_quantile);

        let split = sorted.partition_point(|&v| v <= u);
        let below_sorted = sorted[..split].to_vec();
        let excesses: Vec<f64> = sorted[split..].iter().map(|&v| v - u).collect();
        if excesses.len() < MIN_EXCEED {
            return Err(Error::Estimation(format!(
                "only {} exceedances above the {threshold_quantile} quantile; need at least {MIN_EXCEED}",
                excesses.len()
            )));
        }

        // method-of-moments start, clamped into the searched shape range
        let m1 = excesses.iter().sum::<f64>() / excesses.len() as f64;
        let m2 = excesses.iter().map(|z| (z - m1).powi(2)).sum::<f64>() / excesses.len() as f64;
        let xi0 = (0.5 * (1.0 - m1 * m1 / m2.max(1e-300))).clamp(-0.45, 0.9);
        let sigma0 = (m1 * (1.0 - xi0)).max(1e-8 * m1.max(1.0));

        let to_params = |v: &[f64]| (v[0].exp(), -0.5 + 1.5 * logistic(v[1]));
        let objective = |v: &[f64]| {
            let (scale, shape) = to_params(v);
            gpd_neg_loglik(&excesses, scale, shape)
        };
        let t0 = ((xi0 + 0.5) / 1.5).clamp(1e-6, 1.0 - 1e-6);
        let start = [sigma0.ln(), (t0 / (1.0 - t0)).ln()];
        let mut best = nelder_mead(objective, &start, &NmOptions::default());
        // one extra start guards against a poor moment estimate
        let alt = nelder_mead(objective, &[m1.ln(), 0.0], &NmOptions::default());
        if alt.fx < best.fx {
            best = alt;
        }
        if !best.fx.is_finite() {
            return Err(Error::Estimation("GPD likelihood not finite at any candidate".into()));
        }
        let (gpd_scale, gpd_shape) = to_params(&best.x);

        Ok(Self {
            threshold_quantile,
            threshold_value: u,
            gpd_scale,
            gpd_shape,
            below_sorted,
            n: x.len(),
            n_exceed: excesses.len(),
        })
    }

    /// Composite cdf; may return 0 below the sample minimum.
    pub fn cdf(&self, x: f64) -> f64 {
        let q = self.threshold_quantile;
        if x <= self.threshold_value {
            let k = self.below_sorted.len() as f64;
            let rank = self.below_sorted.partition_point(|&v| v <= x) as f64;
            q * rank / k
        } else {
            q + (1.0 - q) * gpd_cdf(x - self.threshold_value, self.gpd_scale, self.gpd_shape)
        }
    }

    /// Pseudo-inverse of the composite cdf.
    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(0.0 < p && p < 1.0) {
            return Err(Error::Domain(format!("quantile level must lie in (0,1), got {p}")));
        }
        let q = self.threshold_quantile;
        if p <= q {
            let k = self.below_sorted.len();
            let idx = ((p / q * k as f64).ceil() as usize).clamp(1, k);
            Ok(self.below_sorted[idx - 1])
        } else {
            let pp = (p - q) / (1.0 - q);
            Ok(self.threshold_value + gpd_quantile(pp, self.gpd_scale, self.gpd_shape))
        }
    }

    pub fn threshold_quantile(&self) -> f64 {
        self.threshold_quantile
    }
    pub fn threshold_value(&self) -> f64 {
        self.threshold_value
    }
    pub fn gpd_scale(&self) -> f64 {
        self.gpd_scale
    }
    pub fn gpd_shape(&self) -> f64 {
        self.gpd_shape
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn n_exceed(&self) -> usize {
        self.n_exceed
    }
}

/// Map observations to the unit Fréchet scale through the fitted margin:
/// `y = -1 / log F(x)`.
pub fn to_unit_frechet(x: &[f64], m: &MarginalModel) -> Result<Vec<f64>> {
    let mut out = Vec::with_capacity(x.len());
    for (i, &xi) in x.iter().enumerate() {
        let f = m.cdf(xi);
        if !(f > 0.0 && f < 1.0) {
            return Err(Error::Transform { index: i, value: f });
        }
        out.push(-1.0 / f.ln());
    }
    Ok(out)
}

/// Radial distances and simplex angles of Fréchet-scale observations.
#[derive(Debug, Clone)]
pub struct PseudoPolarSample {
    pub radii: Vec<f64>,
    /// One row per observation, rows lie on the unit simplex.
    pub angles: Vec<Vec<f64>>,
    pub d: usize,
}

/// Decompose rows of a positive matrix into radius (row sum) and angle
/// (row / row sum).
pub fn to_pseudo_polar(y: &[Vec<f64>]) -> Result<PseudoPolarSample> {
    if y.is_empty() {
        return Err(Error::Validation("empty sample".into()));
    }
    let d = y[0].len();
    if d < 2 {
        return Err(Error::Validation("need dimension >= 2".into()));
    }
    let mut radii = Vec::with_capacity(y.len());
    let mut angles = Vec::with_capacity(y.len());
    for (i, row) in y.iter().enumerate() {
        if row.len() != d {
            return Err(Error::Validation(format!("row {i} has length {}, expected {d}", row.len())));
        }
        if row.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::Validation(format!("row {i} has a nonpositive or non-finite entry")));
        }
        let r: f64 = row.iter().sum();
        radii.push(r);
        angles.push(row.iter().map(|&v| v / r).collect());
    }
    Ok(PseudoPolarSample { radii, angles, d })
}

/// Keep the `k` observations with the largest radial distances, sorted by
/// decreasing radius. Ties are broken by original index (earlier kept first).
pub fn select_extremes(s: &PseudoPolarSample, k: usize) -> Result<PseudoPolarSample> {
    let n = s.radii.len();
    if k == 0 || k > n {
        return Err(Error::Validation(format!("k must satisfy 1 <= k <= {n}, got {k}")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    // stable sort keeps earlier indices first among equal radii
    idx.sort_by(|&a, &b| s.radii[b].partial_cmp(&s.radii[a]).unwrap());
    idx.truncate(k);
    Ok(PseudoPolarSample {
        radii: idx.iter().map(|&i| s.radii[i]).collect(),
        angles: idx.iter().map(|&i| s.angles[i].clone()).collect(),
        d: s.d,
    })
}

//! Approximate Bayesian estimation of angular-model parameters.
//!
//! The posterior combines the approximate likelihood of the excess angles
//! with independent zero-mean normal priors of standard deviation 3 on
//! transformed parameters (log scales for positive parameters, the signed
//! squared-correlation logit for extremal-t correlations). Sampling is
//! adaptive random-walk Metropolis-Hastings: a single global proposal scale
//! follows a Robbins-Monro recursion toward acceptance 0.234 during burn-in
//! and is frozen afterwards, keeping the retained chain Markov.

use crate::angular::transform::{model_from_param_vec, param_count, param_names, ParamTransform};
use crate::angular::{AngularModel, Family};
use crate::error::{Error, Result};
use crate::inference::nudge_angles;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

/// Default prior standard deviation on the transformed scale.
pub const PRIOR_SD: f64 = 3.0;

#[derive(Debug, Clone)]
pub struct PriorEntry {
    pub name: String,
    pub transform: ParamTransform,
    pub sd: f64,
}

/// Independent normal priors on transformed parameters.
#[derive(Debug, Clone)]
pub struct PriorSpec {
    pub entries: Vec<PriorEntry>,
}

impl PriorSpec {
    pub fn log_density(&self, t: &[f64]) -> f64 {
        t.iter()
            .zip(&self.entries)
            .map(|(&v, e)| {
                -0.5 * (v / e.sd).powi(2)
                    - e.sd.ln()
                    - 0.5 * (2.0 * std::f64::consts::PI).ln()
            })
            .sum()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// The prior layout used in the reference analysis: sd-3 normals on `log`
/// scales, with the signed squared-correlation logit for extremal-t
/// correlations and `log nu` for its degrees of freedom. The asymmetric
/// logistic family is not covered.
pub fn default_prior(family: Family, d: usize) -> Result<PriorSpec> {
    let names = param_names(family, d);
    let pairs = d * (d - 1) / 2;
    let transforms: Vec<ParamTransform> = match family {
        Family::TiltedDirichlet => vec![ParamTransform::Log; d],
        Family::HuslerReiss => vec![ParamTransform::Log; pairs],
        Family::PairwiseBeta => vec![ParamTransform::Log; pairs + 1],
        Family::ExtremalT => {
            let mut v = vec![ParamTransform::SignedLogitSquare(1.0); pairs];
            v.push(ParamTransform::Log);
            v
        }
        Family::AsymLogistic => {
            return Err(Error::Unsupported(
                "no default prior for the asymmetric logistic family".into(),
            ))
        }
    };
    Ok(PriorSpec {
        entries: names
            .into_iter()
            .zip(transforms)
            .map(|(name, transform)| PriorEntry { name, transform, sd: PRIOR_SD })
            .collect(),
    })
}

#[derive(Debug, Clone)]
pub struct McmcOptions {
    pub n_iter: usize,
    pub burn_in: usize,
    pub seed: u64,
    /// Starting point on the constrained scale; transformed zeros otherwise.
    pub init: Option<Vec<f64>>,
    pub initial_step: f64,
    pub target_accept: f64,
}

impl Default for McmcOptions {
    fn default() -> Self {
        Self {
            n_iter: 80_000,
            burn_in: 30_000,
            seed: 0xBA1E5,
            init: None,
            initial_step: 0.1,
            target_accept: 0.234,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ParamSummary {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
    /// Equal-tailed 95% credible interval.
    pub ci_lower: f64,
    pub ci_upper: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct HwResult {
    pub pass: bool,
    pub start_index: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChainDiagnostics {
    pub geweke_z: Vec<f64>,
    pub heidelberger: Vec<HwResult>,
    pub warning: Option<String>,
}

/// Retained posterior draws plus acceptance and convergence summaries.
#[derive(Debug, Clone, Serialize)]
pub struct PosteriorChain {
    pub param_names: Vec<String>,
    /// Retained draws on the constrained scale, one row per iteration.
    pub draws: Vec<Vec<f64>>,
    pub acceptance_rate: f64,
    pub n_iter: usize,
    pub burn_in: usize,
    pub seed: u64,
    pub proposal_scale: f64,
    pub diagnostics: ChainDiagnostics,
    pub summaries: Vec<ParamSummary>,
}

impl PosteriorChain {
    pub fn posterior_means(&self) -> Vec<f64> {
        self.summaries.iter().map(|s| s.mean).collect()
    }
}

/// Random-walk Metropolis-Hastings on the transformed scale. An empty `w`
/// targets the prior alone.
pub fn mh_sample(
    family: Family,
    d: usize,
    w: &[Vec<f64>],
    prior: &PriorSpec,
    opts: &McmcOptions,
) -> Result<PosteriorChain> {
    let p = param_count(family, d);
    if prior.len() != p {
        return Err(Error::Validation(format!(
            "prior has {} entries, family takes {p} parameters",
            prior.len()
        )));
    }
    if opts.n_iter <= opts.burn_in {
        return Err(Error::Validation("n_iter must exceed burn_in".into()));
    }
    let w = nudge_angles(w);

    let log_target = |t: &[f64]| -> f64 {
        let theta: Vec<f64> =
            prior.entries.iter().zip(t).map(|(e, &v)| e.transform.inverse(v)).collect();
        let Ok(model) = model_from_param_vec(family, d, &theta) else {
            return f64::NEG_INFINITY;
        };
        let mut ll = 0.0;
        for row in &w {
            let v = model.ln_interior(row);
            if !v.is_finite() {
                return f64::NEG_INFINITY;
            }
            ll += v;
        }
        ll + prior.log_density(t)
    };

    let mut t: Vec<f64> = match &opts.init {
        Some(theta0) => {
            if theta0.len() != p {
                return Err(Error::Validation("init length mismatch".into()));
            }
            prior.entries.iter().zip(theta0).map(|(e, &x)| e.transform.forward(x)).collect()
        }
        None => vec![0.0; p],
    };
    let mut lt = log_target(&t);
    if !lt.is_finite() {
        return Err(Error::Estimation("posterior is zero at the starting point".into()));
    }

    let mut rng = ChaCha12Rng::seed_from_u64(opts.seed);
    let mut ln_scale = opts.initial_step.ln();
    let retained = opts.n_iter - opts.burn_in;
    let mut draws: Vec<Vec<f64>> = Vec::with_capacity(retained);
    let mut accepted_retained = 0usize;

    for it in 0..opts.n_iter {
        let scale = ln_scale.exp();
        let prop: Vec<f64> = t
            .iter()
            .map(|&v| v + scale * <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
            .collect();
        let lp = log_target(&prop);
        let log_alpha = lp - lt;
        let accept = log_alpha >= 0.0 || rng.gen_range(1e-300..1.0f64).ln() < log_alpha;
        if accept {
            t = prop;
            lt = lp;
        }
        if it < opts.burn_in {
            // Robbins-Monro on the log proposal scale
            let alpha = log_alpha.exp().min(1.0);
            let gain = 1.0 / (1.0 + it as f64).powf(0.7);
            ln_scale += gain * (alpha - opts.target_accept);
            ln_scale = ln_scale.clamp(-12.0, 4.0);
        } else {
            if accept {
                accepted_retained += 1;
            }
            let theta: Vec<f64> =
                prior.entries.iter().zip(&t).map(|(e, &v)| e.transform.inverse(v)).collect();
            debug_assert!(model_from_param_vec(family, d, &theta).is_ok());
            draws.push(theta);
        }
    }

    let acceptance_rate = accepted_retained as f64 / retained as f64;
    let warning = if !(0.01..=0.95).contains(&acceptance_rate) {
        Some(format!("post-adaptation acceptance rate {acceptance_rate:.3} is extreme"))
    } else {
        None
    };

    let names = param_names(family, d);
    let mut summaries = Vec::with_capacity(p);
    let mut geweke_z = Vec::with_capacity(p);
    let mut heidelberger = Vec::with_capacity(p);
    for k in 0..p {
        let series: Vec<f64> = draws.iter().map(|row| row[k]).collect();
        let n = series.len() as f64;
        let mean = series.iter().sum::<f64>() / n;
        let sd = (series.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        let mut sorted = series.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let q = |p: f64| -> f64 {
            let idx = ((p * (sorted.len() - 1) as f64).round() as usize).min(sorted.len() - 1);
            sorted[idx]
        };
        summaries.push(ParamSummary {
            name: names[k].clone(),
            mean,
            sd,
            ci_lower: q(0.025),
            ci_upper: q(0.975),
        });
        geweke_z.push(geweke(&series, 0.1, 0.5)?);
        heidelberger.push(heidelberger_welch(&series, 0.05)?);
    }

    Ok(PosteriorChain {
        param_names: names,
        draws,
        acceptance_rate,
        n_iter: opts.n_iter,
        burn_in: opts.burn_in,
        seed: opts.seed,
        proposal_scale: ln_scale.exp(),
        diagnostics: ChainDiagnostics { geweke_z, heidelberger, warning },
        summaries,
    })
}

/// Spectral density at frequency zero via a Bartlett-windowed autocovariance
/// sum; reduces to the variance for white noise.
pub(crate) fn spectral0(x: &[f64]) -> f64 {
    let n = x.len();
    let nf = n as f64;
    let mean = x.iter().sum::<f64>() / nf;
    let lag_max = ((nf.powf(1.0 / 3.0)) as usize).max(4).min(n / 2);
    let autocov = |k: usize| -> f64 {
        (0..n - k).map(|i| (x[i] - mean) * (x[i + k] - mean)).sum::<f64>() / nf
    };
    let mut s = autocov(0);
    for k in 1..=lag_max {
        s += 2.0 * (1.0 - k as f64 / (lag_max as f64 + 1.0)) * autocov(k);
    }
    s.max(0.0)
}

/// Geweke convergence z-score comparing the first `frac_a` and last `frac_b`
/// segments of a chain, with spectral-density-at-zero variance estimates.
pub fn geweke(chain: &[f64], frac_a: f64, frac_b: f64) -> Result<f64> {
    let n = chain.len();
    if n < 100 {
        return Err(Error::Validation(format!("chain length {n} below the minimum of 100")));
    }
    if !(frac_a > 0.0 && frac_b > 0.0 && frac_a + frac_b <= 1.0) {
        return Err(Error::Validation("segment fractions must be positive and sum to at most 1".into()));
    }
    let na = ((n as f64) * frac_a).floor() as usize;
    let nb = ((n as f64) * frac_b).floor() as usize;
    let a = &chain[..na];
    let b = &chain[n - nb..];
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let (sa, sb) = (spectral0(a), spectral0(b));
    let denom = sa / na as f64 + sb / nb as f64;
    if denom <= 0.0 {
        return Err(Error::Numeric("zero spectral variance in a chain segment".into()));
    }
    Ok((mean(a) - mean(b)) / denom.sqrt())
}

/// Cramér-von Mises critical values at common levels.
fn cvm_critical(alpha: f64) -> f64 {
    // (level, critical value) for the limiting omega^2 distribution
    const TABLE: [(f64, f64); 4] = [(0.10, 0.3473), (0.05, 0.4614), (0.025, 0.5806), (0.01, 0.7435)];
    let mut best = TABLE[1];
    for &(a, c) in &TABLE {
        if (a - alpha).abs() < (best.0 - alpha).abs() {
            best = (a, c);
        }
    }
    best.1
}

/// Heidelberger-Welch stationarity test: Cramér-von Mises statistic on the
/// Brownian bridge of cumulative sums, discarding leading 10% increments up
/// to 50% until the remainder passes. The spectral variance comes from the
/// second half of the original chain.
pub fn heidelberger_welch(chain: &[f64], alpha: f64) -> Result<HwResult> {
    let n = chain.len();
    if n < 200 {
        return Err(Error::Validation(format!("chain length {n} below the minimum of 200")));
    }
    let s0 = spectral0(&chain[n / 2..]);
    if s0 <= 0.0 {
        return Err(Error::Numeric("zero spectral variance in the second half".into()));
    }
    let crit = cvm_critical(alpha);
    for drop_tenths in 0..=5usize {
        let start = n * drop_tenths / 10;
        let sub = &chain[start..];
        let m = sub.len();
        let mean = sub.iter().sum::<f64>() / m as f64;
        let mut cum = 0.0;
        let mut stat = 0.0;
        for (k, &v) in sub.iter().enumerate() {
            cum += v;
            let bridge = (cum - (k + 1) as f64 * mean) / ((m as f64) * s0).sqrt();
            stat += bridge * bridge;
        }
        stat /= m as f64;
        if stat < crit {
            return Ok(HwResult { pass: true, start_index: Some(start) });
        }
    }
    Ok(HwResult { pass: false, start_index: None })
}

//! Pairwise beta angular density: a sum of symmetric beta kernels over all
//! coordinate pairs with a global dependence parameter.

use crate::angular::{logsumexp, pair_order};
use crate::error::{Error, Result};
use statrs::function::gamma::ln_gamma;

#[derive(Debug, Clone)]
pub struct PairwiseBetaParams {
    d: usize,
    /// Pair parameters in lexicographic pair order.
    beta: Vec<f64>,
    alpha: f64,
    ln_const: f64,
}

impl PairwiseBetaParams {
    pub fn new(d: usize, beta: Vec<f64>, alpha: f64) -> Result<Self> {
        if d < 3 {
            return Err(Error::Validation(
                "pairwise beta needs d >= 3 (the normalizing constant degenerates below)".into(),
            ));
        }
        let n_pairs = d * (d - 1) / 2;
        if beta.len() != n_pairs {
            return Err(Error::Validation(format!(
                "expected {n_pairs} pair parameters, got {}",
                beta.len()
            )));
        }
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParams(format!("alpha must be positive, got {alpha}")));
        }
        if beta.iter().any(|&b| !(b > 0.0) || !b.is_finite()) {
            return Err(Error::InvalidParams("all pair parameters must be positive".into()));
        }
        let df = d as f64;
        // 2 (d-3)! Gamma(alpha d + 1) / (d (d-1) Gamma(2 alpha + 1) Gamma(alpha (d-2)))
        let ln_const = 2f64.ln() + ln_gamma(df - 2.0) + ln_gamma(alpha * df + 1.0)
            - df.ln()
            - (df - 1.0).ln()
            - ln_gamma(2.0 * alpha + 1.0)
            - ln_gamma(alpha * (df - 2.0));
        Ok(Self { d, beta, alpha, ln_const })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    /// Probability-scale interior density.
    pub(crate) fn ln_density(&self, w: &[f64]) -> f64 {
        let d = self.d;
        let df = d as f64;
        let alpha = self.alpha;
        let mut terms = Vec::with_capacity(self.beta.len());
        for (idx, (i, j)) in pair_order(d).into_iter().enumerate() {
            let b = self.beta[idx];
            let wij = w[i] + w[j];
            // the remainder computed as a sum stays nonnegative near faces
            let rest: f64 = (0..d).filter(|&k| k != i && k != j).map(|k| w[k]).sum();
            let mut ln = (2.0 * alpha - 1.0) * wij.ln();
            let rest_exp = alpha * (df - 2.0) - df + 2.0;
            ln += if rest > 0.0 {
                rest_exp * rest.ln()
            } else if rest_exp == 0.0 {
                0.0
            } else {
                rest_exp * f64::MIN_POSITIVE.ln()
            };
            ln += ln_gamma(2.0 * b) - 2.0 * ln_gamma(b)
                + (b - 1.0) * (w[i].ln() + w[j].ln() - 2.0 * wij.ln());
            terms.push(ln);
        }
        self.ln_const + logsumexp(&terms)
    }
}

#[cfg(test)]
mod tests {
    use crate::angular::AngularModel;
    use crate::simplex::{integrate_simplex, uniform_simplex};
    use rand::SeedableRng;
    use rand_chacha::ChaCha12Rng;
    use statrs::function::gamma::gamma;

    // direct transcription of the density, kept free of log-space tricks
    fn naive_density(d: usize, beta: &[f64], alpha: f64, w: &[f64]) -> f64 {
        let df = d as f64;
        let fact = |m: f64| gamma(m + 1.0);
        let konst = 2.0 * fact(df - 3.0) * gamma(alpha * df + 1.0)
            / (df * (df - 1.0) * gamma(2.0 * alpha + 1.0) * gamma(alpha * (df - 2.0)));
        let mut sum = 0.0;
        let mut idx = 0;
        for i in 0..d {
            for j in (i + 1)..d {
                let b = beta[idx];
                idx += 1;
                let wij = w[i] + w[j];
                let hstar = gamma(2.0 * b) / gamma(b).powi(2)
                    * (w[i] / wij).powf(b - 1.0)
                    * (w[j] / wij).powf(b - 1.0);
                sum += wij.powf(2.0 * alpha - 1.0)
                    * (1.0 - wij).powf(alpha * (df - 2.0) - df + 2.0)
                    * hstar;
            }
        }
        konst * sum
    }

    #[test]
    fn unit_parameters_give_the_uniform_density() {
        // alpha = 1, beta = 1: the pair terms sum to 2 and the constant is 1,
        // so the density is the uniform 2 = 1/vol on the 2-simplex
        let m = AngularModel::pairwise_beta(3, vec![1.0, 1.0, 1.0], 1.0).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(4);
        for _ in 0..50 {
            let w = uniform_simplex(&mut rng, 3);
            let h = m.angular_density(&w).unwrap();
            assert!((h - 2.0).abs() < 1e-12, "{h}");
        }
    }

    #[test]
    fn matches_independent_transcription() {
        let beta = vec![2.0, 4.0, 15.0];
        let alpha = 1.0;
        let m = AngularModel::pairwise_beta(3, beta.clone(), alpha).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        for _ in 0..100 {
            let w = uniform_simplex(&mut rng, 3);
            let ours = m.angular_density(&w).unwrap();
            let naive = naive_density(3, &beta, alpha, &w);
            assert!(
                (ours - naive).abs() <= 1e-12 * naive.max(1.0),
                "{ours} vs {naive} at {w:?}"
            );
        }
    }

    #[test]
    fn density_normalizes_to_one() {
        for (beta, alpha) in [
            (vec![2.0, 2.0, 2.0], 4.0),
            (vec![1.0, 1.0, 1.0], 0.5),
            (vec![10.0, 10.0, 10.0], 1.0),
        ] {
            let m = AngularModel::pairwise_beta(3, beta.clone(), alpha).unwrap();
            let q = integrate_simplex(|w| m.log_angular_density(w).unwrap().exp(), 3, 1e-6)
                .unwrap();
            assert!((q.value - 1.0).abs() < 1e-4, "beta {beta:?} alpha {alpha}: {}", q.value);
        }
    }

    #[test]
    fn needs_three_dimensions() {
        assert!(AngularModel::pairwise_beta(2, vec![1.0], 1.0).is_err());
    }
}

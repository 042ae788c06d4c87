//! Tilted Dirichlet angular density: a Dirichlet kernel recentred so that the
//! angular mean sits at the simplex center.

use crate::error::{Error, Result};
use statrs::function::gamma::ln_gamma;

#[derive(Debug, Clone)]
pub struct TiltedDirichletParams {
    alpha: Vec<f64>,
    // cached: ln Gamma(sum alpha + 1) - ln d + sum_j (ln a_j - ln Gamma(a_j))
    ln_const: f64,
}

impl TiltedDirichletParams {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        let d = alpha.len();
        if d < 2 {
            return Err(Error::Validation("need dimension >= 2".into()));
        }
        if alpha.iter().any(|&a| !(a > 0.0) || !a.is_finite()) {
            return Err(Error::InvalidParams("tilted Dirichlet needs all alpha > 0".into()));
        }
        let a_sum: f64 = alpha.iter().sum();
        let ln_const = ln_gamma(a_sum + 1.0) - (d as f64).ln()
            + alpha.iter().map(|&a| a.ln() - ln_gamma(a)).sum::<f64>();
        Ok(Self { alpha, ln_const })
    }

    pub fn d(&self) -> usize {
        self.alpha.len()
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    /// Probability-scale interior density (integrates to 1 over the simplex).
    pub(crate) fn ln_density(&self, w: &[f64]) -> f64 {
        let d = self.d();
        let s: f64 = (0..d).map(|j| self.alpha[j] * w[j]).sum();
        let mut ln = self.ln_const - (d as f64 + 1.0) * s.ln();
        for j in 0..d {
            ln += (self.alpha[j] - 1.0) * (self.alpha[j].ln() + w[j].ln() - s.ln());
        }
        ln
    }
}

//! Hüsler-Reiss model: Gaussian-kernel angular density concentrated on the
//! interior of the simplex, with a closed-form exponent function built from
//! multivariate normal cdfs.

use crate::angular::pair_order;
use crate::error::{Error, Result};
use crate::mvgauss::{mvn_cdf, mvn_log_pdf, mvn_survival, partial_corr_hr, CorrelationMatrix};
use nalgebra::DMatrix;

const CDF_TOL: f64 = 5e-8;

#[derive(Debug, Clone)]
pub struct HuslerReissParams {
    d: usize,
    /// Symmetric dependence matrix, zero diagonal.
    lambda: DMatrix<f64>,
    /// Partial-correlation matrix and Cholesky factor for each base index.
    partials: Vec<(CorrelationMatrix, DMatrix<f64>)>,
}

impl HuslerReissParams {
    /// `lambda` in lexicographic pair order.
    pub fn new(d: usize, lambda: Vec<f64>) -> Result<Self> {
        if d < 2 {
            return Err(Error::Validation("need dimension >= 2".into()));
        }
        let pairs = pair_order(d);
        if lambda.len() != pairs.len() {
            return Err(Error::Validation(format!(
                "expected {} dependence parameters, got {}",
                pairs.len(),
                lambda.len()
            )));
        }
        if lambda.iter().any(|&l| !(l > 0.0) || !l.is_finite()) {
            return Err(Error::InvalidParams("all lambda must be positive".into()));
        }
        let mut m = DMatrix::zeros(d, d);
        for (idx, (i, j)) in pairs.into_iter().enumerate() {
            m[(i, j)] = lambda[idx];
            m[(j, i)] = lambda[idx];
        }
        let mut partials = Vec::with_capacity(d);
        for j in 0..d {
            let corr = if d == 2 {
                CorrelationMatrix::identity(1)
            } else {
                partial_corr_hr(&m, j)?
            };
            let chol = corr.cholesky_lower()?;
            partials.push((corr, chol));
        }
        Ok(Self { d, lambda: m, partials })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn lambda_matrix(&self) -> &DMatrix<f64> {
        &self.lambda
    }

    pub fn lambda_pairs(&self) -> Vec<f64> {
        pair_order(self.d).into_iter().map(|(i, j)| self.lambda[(i, j)]).collect()
    }

    fn z_args(&self, j: usize, y: &[f64]) -> Vec<f64> {
        (0..self.d)
            .filter(|&i| i != j)
            .map(|i| {
                let l = self.lambda[(i, j)];
                l + (y[i] / y[j]).ln() / (2.0 * l)
            })
            .collect()
    }

    /// Interior density on the unnormalized (total mass `d`) scale.
    pub(crate) fn ln_density(&self, w: &[f64]) -> f64 {
        let z = self.z_args(0, w);
        let mut ln = mvn_log_pdf(&z, &self.partials[0].1) - 2.0 * w[0].ln();
        for i in 1..self.d {
            ln -= w[i].ln() + (2.0 * self.lambda[(i, 0)]).ln();
        }
        ln
    }

    /// Closed-form exponent function.
    pub(crate) fn exponent(&self, y: &[f64]) -> Result<f64> {
        let mut v = 0.0;
        for j in 0..self.d {
            let z = self.z_args(j, y);
            let p = mvn_cdf(&z, &self.partials[j].0, CDF_TOL)?;
            v += p / y[j];
        }
        Ok(v)
    }

    /// Closed-form failure-region mass: sum of multivariate normal survival
    /// terms. Agrees with the quadrature route for the tail dependence
    /// function.
    pub fn failure_probability(&self, y: &[f64]) -> Result<f64> {
        let mut r = 0.0;
        for j in 0..self.d {
            let z = self.z_args(j, y);
            let p = mvn_survival(&z, &self.partials[j].0, CDF_TOL)?;
            r += p / y[j];
        }
        Ok(r)
    }
}

//! Extremal-t model: Student-t-kernel angular measure with mass on the
//! interior and the vertices of the simplex.
//!
//! Edge densities (faces with 1 < |S| < d) have no published closed form and
//! are reported as unsupported rather than approximated.

use crate::angular::pair_order;
use crate::error::{Error, Result};
use crate::mvgauss::{mvt_cdf, mvt_log_pdf, partial_corr_et, CorrelationMatrix};
use nalgebra::DMatrix;

const CDF_TOL: f64 = 5e-8;

#[derive(Debug, Clone)]
pub struct ExtremalTParams {
    d: usize,
    rho: CorrelationMatrix,
    nu: f64,
    partials: Vec<(CorrelationMatrix, DMatrix<f64>)>,
}

impl ExtremalTParams {
    /// `rho` in lexicographic pair order.
    pub fn new(d: usize, rho: Vec<f64>, nu: f64) -> Result<Self> {
        if d < 2 {
            return Err(Error::Validation("need dimension >= 2".into()));
        }
        if !(nu > 0.0) || !nu.is_finite() {
            return Err(Error::InvalidParams(format!("nu must be positive, got {nu}")));
        }
        let pairs = pair_order(d);
        if rho.len() != pairs.len() {
            return Err(Error::Validation(format!(
                "expected {} correlation parameters, got {}",
                pairs.len(),
                rho.len()
            )));
        }
        if rho.iter().any(|&r| !(r.abs() < 1.0)) {
            return Err(Error::InvalidParams("correlations must satisfy |rho| < 1".into()));
        }
        let mut m = DMatrix::identity(d, d);
        for (idx, (i, j)) in pairs.into_iter().enumerate() {
            m[(i, j)] = rho[idx];
            m[(j, i)] = rho[idx];
        }
        let rho = CorrelationMatrix::new(m)
            .map_err(|e| Error::InvalidParams(format!("correlation block invalid: {e}")))?;
        let mut partials = Vec::with_capacity(d);
        for j in 0..d {
            let corr = if d == 2 {
                CorrelationMatrix::identity(1)
            } else {
                partial_corr_et(&rho, j)?
            };
            let chol = corr.cholesky_lower()?;
            partials.push((corr, chol));
        }
        Ok(Self { d, rho, nu, partials })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn rho(&self) -> &CorrelationMatrix {
        &self.rho
    }

    pub fn rho_pairs(&self) -> Vec<f64> {
        pair_order(self.d).into_iter().map(|(i, j)| self.rho.entry(i, j)).collect()
    }

    fn scale(&self, i: usize, j: usize) -> f64 {
        ((self.nu + 1.0) / (1.0 - self.rho.entry(i, j).powi(2))).sqrt()
    }

    fn z_args(&self, j: usize, y: &[f64]) -> Vec<f64> {
        (0..self.d)
            .filter(|&i| i != j)
            .map(|i| self.scale(i, j) * ((y[i] / y[j]).powf(1.0 / self.nu) - self.rho.entry(i, j)))
            .collect()
    }

    /// Interior density on the unnormalized (total mass `d`) scale.
    pub(crate) fn ln_density(&self, w: &[f64]) -> f64 {
        let d = self.d;
        let nu = self.nu;
        let z = self.z_args(0, w);
        let mut ln = mvt_log_pdf(&z, &self.partials[0].1, nu + 1.0)
            - (d as f64 - 1.0) * nu.ln()
            - (d as f64 + 1.0) * w[0].ln();
        for i in 1..d {
            ln += self.scale(i, 0).ln() + (nu - 1.0) / nu * (w[i].ln() - w[0].ln());
        }
        ln
    }

    /// Vertex mass on the unnormalized scale:
    /// `T_{d-1, nu+1}( -rho_ij sqrt(nu+1)/sqrt(1-rho_ij^2) ; partial corr )`.
    pub(crate) fn vertex_mass(&self, j: usize) -> Result<f64> {
        let z: Vec<f64> = (0..self.d)
            .filter(|&i| i != j)
            .map(|i| -self.rho.entry(i, j) * self.scale(i, j))
            .collect();
        mvt_cdf(&z, &self.partials[j].0, self.nu + 1.0, CDF_TOL)
    }

    /// Closed-form exponent function.
    pub(crate) fn exponent(&self, y: &[f64]) -> Result<f64> {
        let mut v = 0.0;
        for j in 0..self.d {
            let z = self.z_args(j, y);
            let p = mvt_cdf(&z, &self.partials[j].0, self.nu + 1.0, CDF_TOL)?;
            v += p / y[j];
        }
        Ok(v)
    }
}

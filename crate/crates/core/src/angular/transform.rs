//! Maps between constrained family parameters and unconstrained optimization
//! coordinates, plus the canonical parameter vector layout per family.
//!
//! Layouts (matching the reporting order of the fitted tables):
//! * tilted Dirichlet: `alpha_1 … alpha_d`
//! * pairwise beta: pair weights in lexicographic order, then `alpha`
//! * Hüsler-Reiss: `lambda_ij` in lexicographic pair order
//! * extremal-t: `rho_ij` in pair order, then `nu`
//! * asymmetric logistic (exchangeable sub-family): `alpha`, then
//!   `beta_1 … beta_d`

use crate::angular::{pair_order, AngularModel, Family};
use crate::error::{Error, Result};

/// Bijection between one constrained parameter and the real line.
///
/// The squared-correlation transform is two-branched (the sign is not
/// recoverable from the transformed value), so the branch sign is stored and
/// held fixed while optimizing or sampling.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamTransform {
    /// `(0, inf)`, `t = ln x`.
    Log,
    /// `(lo, inf)`, `t = ln(x - lo)`.
    LogShifted(f64),
    /// `(0, 1)`, `t = logit x`.
    Logit,
    /// `(lo, hi)`, scaled logit.
    LogitRange(f64, f64),
    /// `(-1, 1) \ {0}` with fixed branch sign: `t = logit(x^2)`,
    /// `x = sign * sqrt(sigmoid(t))`.
    SignedLogitSquare(f64),
}

fn sigmoid(t: f64) -> f64 {
    1.0 / (1.0 + (-t).exp())
}

impl ParamTransform {
    pub fn forward(&self, x: f64) -> f64 {
        match *self {
            Self::Log => x.ln(),
            Self::LogShifted(lo) => (x - lo).ln(),
            Self::Logit => (x / (1.0 - x)).ln(),
            Self::LogitRange(lo, hi) => {
                let u = (x - lo) / (hi - lo);
                (u / (1.0 - u)).ln()
            }
            Self::SignedLogitSquare(_) => {
                let s = x * x;
                (s / (1.0 - s)).ln()
            }
        }
    }

    pub fn inverse(&self, t: f64) -> f64 {
        match *self {
            Self::Log => t.exp(),
            Self::LogShifted(lo) => lo + t.exp(),
            Self::Logit => sigmoid(t),
            Self::LogitRange(lo, hi) => lo + (hi - lo) * sigmoid(t),
            Self::SignedLogitSquare(sign) => sign * sigmoid(t).sqrt(),
        }
    }

    /// Derivative `dx/dt` at the transformed value `t` (delta method).
    pub fn dx_dt(&self, t: f64) -> f64 {
        let s = sigmoid(t);
        match *self {
            Self::Log => t.exp(),
            Self::LogShifted(_) => t.exp(),
            Self::Logit => s * (1.0 - s),
            Self::LogitRange(lo, hi) => (hi - lo) * s * (1.0 - s),
            Self::SignedLogitSquare(sign) => sign * s * (1.0 - s) / (2.0 * s.sqrt()),
        }
    }
}

/// Degrees of freedom bound used while optimizing the extremal-t likelihood;
/// hits are flagged on the fit result.
pub const ET_NU_RANGE: (f64, f64) = (0.5, 50.0);

/// Number of free parameters in the fitted parameterization.
pub fn param_count(family: Family, d: usize) -> usize {
    let pairs = d * (d - 1) / 2;
    match family {
        Family::TiltedDirichlet => d,
        Family::PairwiseBeta => pairs + 1,
        Family::HuslerReiss => pairs,
        Family::ExtremalT => pairs + 1,
        Family::AsymLogistic => 1 + d, // exchangeable sub-family
    }
}

pub fn param_names(family: Family, d: usize) -> Vec<String> {
    let pair_names = |stem: &str| -> Vec<String> {
        pair_order(d).into_iter().map(|(i, j)| format!("{stem}_{}_{}", i + 1, j + 1)).collect()
    };
    match family {
        Family::TiltedDirichlet => (1..=d).map(|j| format!("alpha_{j}")).collect(),
        Family::PairwiseBeta => {
            let mut v = pair_names("beta");
            v.push("alpha".into());
            v
        }
        Family::HuslerReiss => pair_names("lambda"),
        Family::ExtremalT => {
            let mut v = pair_names("rho");
            v.push("nu".into());
            v
        }
        Family::AsymLogistic => {
            let mut v = vec!["alpha".into()];
            v.extend((1..=d).map(|j| format!("beta_{j}")));
            v
        }
    }
}

/// Transforms for maximum-likelihood optimization, with branch signs taken
/// from the starting point where needed.
pub fn mle_transforms(family: Family, d: usize, start: &[f64]) -> Vec<ParamTransform> {
    let pairs = d * (d - 1) / 2;
    match family {
        Family::TiltedDirichlet => vec![ParamTransform::Log; d],
        Family::PairwiseBeta => vec![ParamTransform::Log; pairs + 1],
        Family::HuslerReiss => vec![ParamTransform::Log; pairs],
        Family::ExtremalT => {
            let mut v: Vec<ParamTransform> = (0..pairs)
                .map(|k| ParamTransform::SignedLogitSquare(if start[k] < 0.0 { -1.0 } else { 1.0 }))
                .collect();
            v.push(ParamTransform::LogitRange(ET_NU_RANGE.0, ET_NU_RANGE.1));
            v
        }
        Family::AsymLogistic => {
            let mut v = vec![ParamTransform::LogShifted(1.0)];
            v.extend(std::iter::repeat(ParamTransform::Logit).take(d));
            v
        }
    }
}

/// Constrained parameter vector of a model in the canonical layout.
pub fn to_param_vec(model: &AngularModel) -> Result<Vec<f64>> {
    match model {
        AngularModel::TiltedDirichlet(p) => Ok(p.alpha().to_vec()),
        AngularModel::PairwiseBeta(p) => {
            let mut v = p.beta().to_vec();
            v.push(p.alpha());
            Ok(v)
        }
        AngularModel::HuslerReiss(p) => Ok(p.lambda_pairs()),
        AngularModel::ExtremalT(p) => {
            let mut v = p.rho_pairs();
            v.push(p.nu());
            Ok(v)
        }
        AngularModel::AsymLogistic(p) => {
            let d = p.d();
            let full: Vec<usize> = (0..d).collect();
            let block = p
                .blocks()
                .iter()
                .find(|b| b.members == full)
                .ok_or_else(|| Error::Unsupported(
                    "only the exchangeable asymmetric logistic sub-family has a parameter vector".into(),
                ))?;
            for b in p.blocks() {
                if b.members.len() > 1 && b.members.len() < d {
                    return Err(Error::Unsupported(
                        "only the exchangeable asymmetric logistic sub-family has a parameter vector"
                            .into(),
                    ));
                }
            }
            let mut v = vec![block.alpha];
            v.extend_from_slice(&block.beta);
            Ok(v)
        }
    }
}

/// Build a model from the canonical constrained parameter vector.
pub fn model_from_param_vec(family: Family, d: usize, values: &[f64]) -> Result<AngularModel> {
    let expect = param_count(family, d);
    if values.len() != expect {
        return Err(Error::Validation(format!(
            "{family} in dimension {d} takes {expect} parameters, got {}",
            values.len()
        )));
    }
    match family {
        Family::TiltedDirichlet => AngularModel::tilted_dirichlet(values.to_vec()),
        Family::PairwiseBeta => {
            let (beta, alpha) = values.split_at(values.len() - 1);
            AngularModel::pairwise_beta(d, beta.to_vec(), alpha[0])
        }
        Family::HuslerReiss => AngularModel::husler_reiss(d, values.to_vec()),
        Family::ExtremalT => {
            let (rho, nu) = values.split_at(values.len() - 1);
            AngularModel::extremal_t(d, rho.to_vec(), nu[0])
        }
        Family::AsymLogistic => {
            AngularModel::asym_logistic_exchangeable(d, values[0], values[1..].to_vec())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_all_transforms() {
        let cases = [
            (ParamTransform::Log, 2.7),
            (ParamTransform::LogShifted(1.0), 1.4),
            (ParamTransform::Logit, 0.73),
            (ParamTransform::LogitRange(0.5, 50.0), 3.9),
            (ParamTransform::SignedLogitSquare(1.0), 0.87),
            (ParamTransform::SignedLogitSquare(-1.0), -0.3),
        ];
        for (tr, x) in cases {
            let t = tr.forward(x);
            assert!((tr.inverse(t) - x).abs() < 1e-12, "{tr:?} at {x}");
            // finite-difference check of the jacobian
            let h = 1e-6;
            let fd = (tr.inverse(t + h) - tr.inverse(t - h)) / (2.0 * h);
            assert!((tr.dx_dt(t) - fd).abs() < 1e-6 * fd.abs().max(1.0), "{tr:?}");
        }
    }

    #[test]
    fn model_vector_round_trips() {
        let cases: Vec<AngularModel> = vec![
            AngularModel::tilted_dirichlet(vec![1.2, 0.67, 0.41]).unwrap(),
            AngularModel::pairwise_beta(3, vec![3.21, 0.47, 0.45], 0.68).unwrap(),
            AngularModel::husler_reiss(3, vec![0.65, 0.90, 0.98]).unwrap(),
            AngularModel::extremal_t(3, vec![0.87, 0.74, 0.66], 3.89).unwrap(),
            AngularModel::asym_logistic_exchangeable(3, 1.4, vec![0.7, 0.15, 0.15]).unwrap(),
        ];
        for m in cases {
            let v = to_param_vec(&m).unwrap();
            assert_eq!(v.len(), param_count(m.family(), m.d()));
            let back = model_from_param_vec(m.family(), m.d(), &v).unwrap();
            let v2 = to_param_vec(&back).unwrap();
            for (a, b) in v.iter().zip(&v2) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn et_transform_sign_from_start() {
        let tr = mle_transforms(Family::ExtremalT, 2, &[-0.4, 3.0]);
        match tr[0] {
            ParamTransform::SignedLogitSquare(s) => assert_eq!(s, -1.0),
            _ => panic!("wrong transform"),
        }
        let t = tr[0].forward(-0.4);
        assert!((tr[0].inverse(t) + 0.4).abs() < 1e-12);
    }
}

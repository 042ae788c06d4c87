//! Asymmetric logistic model: angular mass on every face of the simplex.
//!
//! One dependence block per subset `S` of components with `alpha_S >= 1` and
//! weights `beta_{j,S}` summing to 1 over the blocks containing each `j`.
//! Densities are on the unnormalized (total mass `d`) scale; each face
//! carries mass `sum_{j in S} beta_{j,S}` and each vertex the weight of its
//! singleton block.

use crate::angular::logsumexp;
use crate::error::{Error, Result};

/// One subset block: sorted member indices, stability parameter, and one
/// weight per member.
#[derive(Debug, Clone)]
pub struct AlBlock {
    pub members: Vec<usize>,
    pub alpha: f64,
    pub beta: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct AsymLogisticParams {
    d: usize,
    blocks: Vec<AlBlock>,
}

/// Free-parameter count of the full subset parameterization:
/// `2^(d-1) (d+2) - (2d+1)`.
pub fn full_param_count(d: usize) -> usize {
    (1usize << (d - 1)) * (d + 2) - (2 * d + 1)
}

impl AsymLogisticParams {
    pub fn new(d: usize, mut blocks: Vec<AlBlock>) -> Result<Self> {
        if d < 2 {
            return Err(Error::Validation("need dimension >= 2".into()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for b in &mut blocks {
            if b.members.is_empty() || b.members.iter().any(|&j| j >= d) {
                return Err(Error::Validation("block members must be nonempty indices in 0..d".into()));
            }
            let mut sorted: Vec<(usize, f64)> =
                b.members.iter().cloned().zip(b.beta.iter().cloned()).collect();
            if sorted.len() != b.beta.len() {
                return Err(Error::Validation("one weight per block member required".into()));
            }
            sorted.sort_by_key(|&(j, _)| j);
            b.members = sorted.iter().map(|&(j, _)| j).collect();
            b.beta = sorted.iter().map(|&(_, v)| v).collect();
            if b.members.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::Validation("duplicate member within a block".into()));
            }
            if !seen.insert(b.members.clone()) {
                return Err(Error::Validation(format!("duplicate block {:?}", b.members)));
            }
            if b.members.len() >= 2 && !(b.alpha >= 1.0) {
                return Err(Error::InvalidParams(format!(
                    "alpha for block {:?} must be >= 1, got {}",
                    b.members, b.alpha
                )));
            }
            if b.beta.iter().any(|&v| !(0.0..=1.0).contains(&v)) {
                return Err(Error::InvalidParams("weights must lie in [0, 1]".into()));
            }
        }
        // per-coordinate weights sum to one across blocks
        for j in 0..d {
            let total: f64 = blocks
                .iter()
                .filter_map(|b| {
                    b.members.iter().position(|&m| m == j).map(|pos| b.beta[pos])
                })
                .sum();
            if (total - 1.0).abs() > 1e-10 {
                return Err(Error::InvalidParams(format!(
                    "weights for component {j} sum to {total}, expected 1"
                )));
            }
        }
        blocks.sort_by(|a, b| {
            a.members.len().cmp(&b.members.len()).then(a.members.cmp(&b.members))
        });
        Ok(Self { d, blocks })
    }

    /// One block on the full index set with weights `beta`; the remaining
    /// weight `1 - beta_j` sits on each vertex.
    pub fn exchangeable(d: usize, alpha: f64, beta: Vec<f64>) -> Result<Self> {
        if beta.len() != d {
            return Err(Error::Validation(format!("expected {d} weights, got {}", beta.len())));
        }
        let mut blocks =
            vec![AlBlock { members: (0..d).collect(), alpha, beta: beta.clone() }];
        for (j, &b) in beta.iter().enumerate() {
            blocks.push(AlBlock { members: vec![j], alpha: 1.0, beta: vec![1.0 - b] });
        }
        Self::new(d, blocks)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn blocks(&self) -> &[AlBlock] {
        &self.blocks
    }

    /// Weight of the singleton block at vertex `j` (0 when absent).
    pub(crate) fn vertex_mass(&self, j: usize) -> f64 {
        self.blocks
            .iter()
            .find(|b| b.members.len() == 1 && b.members[0] == j)
            .map(|b| b.beta[0])
            .unwrap_or(0.0)
    }

    /// Unnormalized mass carried by one block's face: `sum_j beta_{j,S}`.
    pub(crate) fn block_mass(b: &AlBlock) -> f64 {
        b.beta.iter().sum()
    }

    /// Log face density for the block on `members` (sorted), at a point of
    /// the face given in member coordinates. `-inf` when no such block
    /// exists or any weight vanishes.
    pub(crate) fn ln_face_density(&self, members: &[usize], w: &[f64]) -> f64 {
        let Some(block) = self.blocks.iter().find(|b| b.members == members) else {
            return f64::NEG_INFINITY;
        };
        let k = members.len();
        let alpha = block.alpha;
        let mut ln = 0.0;
        for i in 1..k {
            let f = i as f64 * alpha - 1.0;
            if f <= 0.0 {
                return f64::NEG_INFINITY;
            }
            ln += f.ln();
        }
        let mut pow_terms = Vec::with_capacity(k);
        for (pos, &b) in block.beta.iter().enumerate() {
            if b == 0.0 {
                return f64::NEG_INFINITY;
            }
            ln += alpha * b.ln() - (alpha + 1.0) * w[pos].ln();
            pow_terms.push(alpha * (b.ln() - w[pos].ln()));
        }
        ln + (1.0 / alpha - k as f64) * logsumexp(&pow_terms)
    }

    /// Interior density: the block on the full index set.
    pub(crate) fn ln_face_density_full(&self, w: &[f64]) -> f64 {
        let members: Vec<usize> = (0..self.d).collect();
        self.ln_face_density(&members, w)
    }

    /// Closed-form exponent function: sum over blocks of the weighted
    /// logistic terms, evaluated in log space.
    pub(crate) fn exponent(&self, y: &[f64]) -> f64 {
        let mut v = 0.0;
        for b in &self.blocks {
            let terms: Vec<f64> = b
                .members
                .iter()
                .zip(&b.beta)
                .filter(|&(_, &beta)| beta > 0.0)
                .map(|(&j, &beta)| b.alpha * (beta.ln() - y[j].ln()))
                .collect();
            if terms.is_empty() {
                continue;
            }
            v += (logsumexp(&terms) / b.alpha).exp();
        }
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angular::AngularModel;
    use crate::simplex::{full_cell, integrate_cells, integrate_simplex};

    #[test]
    fn full_parameter_count_formula() {
        // alphas on blocks of size >= 2 plus constrained weights
        for d in 2..=4usize {
            let n_alphas = (1usize << d) - 1 - d;
            let n_betas = d * ((1usize << (d - 1)) - 1);
            assert_eq!(n_alphas + n_betas, full_param_count(d), "d={d}");
        }
    }

    #[test]
    fn bivariate_vertex_masses() {
        let m = AngularModel::asym_logistic_exchangeable(2, 2.0, vec![0.7, 0.4]).unwrap();
        assert!((m.vertex_mass(0).unwrap() - 0.3).abs() < 1e-15);
        assert!((m.vertex_mass(1).unwrap() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn bivariate_interior_spot_value() {
        // alpha=2, beta1=beta2=1 at w=0.5:
        // (a-1)(b1 b2)^a {w(1-w)}^{a-2} [(b1(1-w))^a + (b2 w)^a]^{1/a-2} = 0.5^{-3/2}
        let m = AngularModel::asym_logistic_exchangeable(2, 2.0, vec![1.0, 1.0]).unwrap();
        let h = m.angular_density(&[0.5, 0.5]).unwrap();
        assert!((h - 0.5f64.powf(-1.5)).abs() < 1e-13, "{h}");
        assert!((h - 2.828_427_124_746_190_3).abs() < 1e-12);
    }

    #[test]
    fn zero_weight_kills_the_face() {
        let m = AngularModel::asym_logistic_exchangeable(2, 2.0, vec![0.0, 1.0]);
        // component 1 weight on the pair block is 0 => interior density 0,
        // but the weight columns must still sum to one
        let m = m.unwrap();
        assert_eq!(m.angular_density(&[0.5, 0.5]).unwrap(), 0.0);
        assert!((m.vertex_mass(0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn exponent_margins_and_bounds() {
        let m = AngularModel::asym_logistic_exchangeable(3, 3.0, vec![0.6, 0.7, 0.8]).unwrap();
        // single finite coordinate: V = 1/y_j
        let v = m.exponent_function(&[2.0, 1e12, 1e12]).unwrap();
        assert!((v - 0.5).abs() < 1e-9, "{v}");
        let y = [0.9, 1.7, 3.3];
        let v = m.exponent_function(&y).unwrap();
        let lo = y.iter().map(|q| 1.0 / q).fold(f64::MIN, f64::max);
        let hi: f64 = y.iter().map(|q| 1.0 / q).sum();
        assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
    }

    #[test]
    fn complete_dependence_limit() {
        let m = AngularModel::asym_logistic_exchangeable(3, 400.0, vec![1.0, 1.0, 1.0]).unwrap();
        let y = [0.8, 1.9, 1.1];
        let v = m.exponent_function(&y).unwrap();
        assert!((v - 1.0 / 0.8).abs() < 2e-2, "{v}");
    }

    #[test]
    fn face_mass_equals_weight_sum() {
        // d=3 with an explicit edge block {0,1}
        let blocks = vec![
            AlBlock { members: vec![0, 1, 2], alpha: 3.0, beta: vec![0.5, 0.4, 0.6] },
            AlBlock { members: vec![0, 1], alpha: 2.0, beta: vec![0.3, 0.4] },
            AlBlock { members: vec![0], alpha: 1.0, beta: vec![0.2] },
            AlBlock { members: vec![1], alpha: 1.0, beta: vec![0.2] },
            AlBlock { members: vec![2], alpha: 1.0, beta: vec![0.4] },
        ];
        let m = AngularModel::asym_logistic(3, blocks).unwrap();
        let p = match &m {
            AngularModel::AsymLogistic(p) => p,
            _ => unreachable!(),
        };
        let edge = integrate_cells(
            &|w: &[f64]| p.ln_face_density(&[0, 1], w).exp(),
            vec![full_cell(2)],
            1e-8,
        )
        .unwrap();
        assert!((edge.value - 0.7).abs() < 1e-6, "{}", edge.value);
        let interior =
            integrate_simplex(|w| m.log_angular_density(w).unwrap().exp(), 3, 1e-6).unwrap();
        assert!((interior.value - 1.5).abs() < 1e-4, "{}", interior.value);
        // total over atoms, edge and interior is d
        let atoms: f64 = (0..3).map(|j| m.vertex_mass(j).unwrap()).sum();
        assert!((atoms + edge.value + interior.value - 3.0).abs() < 1e-4);
    }

    #[test]
    fn moment_condition_with_faces() {
        let blocks = vec![
            AlBlock { members: vec![0, 1, 2], alpha: 3.0, beta: vec![0.5, 0.4, 0.6] },
            AlBlock { members: vec![0, 1], alpha: 2.0, beta: vec![0.3, 0.4] },
            AlBlock { members: vec![0], alpha: 1.0, beta: vec![0.2] },
            AlBlock { members: vec![1], alpha: 1.0, beta: vec![0.2] },
            AlBlock { members: vec![2], alpha: 1.0, beta: vec![0.4] },
        ];
        let m = AngularModel::asym_logistic(3, blocks).unwrap();
        for j in 0..3 {
            let mom = m.coordinate_moment(j, 1e-6).unwrap();
            assert!(mom.complete);
            assert!((mom.value - 1.0 / 3.0).abs() < 1e-3, "j={j}: {}", mom.value);
        }
    }

    #[test]
    fn rejects_inconsistent_weights() {
        let blocks = vec![AlBlock { members: vec![0, 1], alpha: 2.0, beta: vec![0.5, 0.5] }];
        assert!(AsymLogisticParams::new(2, blocks).is_err());
    }
}

//! Parametric angular-measure families on the unit simplex.
//!
//! An angular (spectral) measure `H` is a probability measure on the simplex
//! whose coordinate means are all `1/d`; it encodes the dependence of
//! componentwise extremes. Five families are implemented:
//!
//! * asymmetric logistic — mass on every face of the simplex,
//! * tilted Dirichlet — interior mass only,
//! * pairwise beta — interior mass only,
//! * Hüsler-Reiss — interior mass only, Gaussian kernel,
//! * extremal-t — interior plus vertex mass, Student-t kernel.
//!
//! Densities and point masses follow each family's published convention: the
//! tilted Dirichlet and pairwise beta densities integrate to 1 (probability
//! scale), while the asymmetric logistic, Hüsler-Reiss and extremal-t
//! densities and masses are derived from exponent-function derivatives and
//! integrate to `d` (unnormalized scale). [`AngularModel::hprime_factor`]
//! converts between the two; all quadrature-based operations account for it.
//!
//! The exponent function `V(y)` is closed-form for the asymmetric logistic,
//! Hüsler-Reiss and extremal-t families and evaluated by simplex quadrature
//! of `max_j(w_j / y_j)` against the angular density for the other two. The
//! tail dependence function `R(y)` integrates `min_j(w_j / y_j)`, which
//! vanishes on the simplex boundary, so interior quadrature covers every
//! family.

mod asym_logistic;
mod extremal_t;
mod husler_reiss;
mod pairwise_beta;
mod sample;
mod tilted_dirichlet;

pub mod kv;
pub mod transform;

pub use asym_logistic::{AlBlock, AsymLogisticParams};
pub use extremal_t::ExtremalTParams;
pub use husler_reiss::HuslerReissParams;
pub use pairwise_beta::PairwiseBetaParams;
pub use tilted_dirichlet::TiltedDirichletParams;

use crate::error::{Error, Result};
use crate::simplex::{full_cell, integrate_cells, kink_cells};

/// Tolerance used for the quadrature-based exponent and tail-dependence
/// evaluations.
pub const QUAD_TOL: f64 = 1e-6;

/// Family tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    AsymLogistic,
    TiltedDirichlet,
    PairwiseBeta,
    HuslerReiss,
    ExtremalT,
}

impl Family {
    pub fn code(&self) -> &'static str {
        match self {
            Family::AsymLogistic => "al",
            Family::TiltedDirichlet => "td",
            Family::PairwiseBeta => "pb",
            Family::HuslerReiss => "hr",
            Family::ExtremalT => "et",
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Family::AsymLogistic => "asym_logistic",
            Family::TiltedDirichlet => "tilted_dirichlet",
            Family::PairwiseBeta => "pairwise_beta",
            Family::HuslerReiss => "husler_reiss",
            Family::ExtremalT => "extremal_t",
        }
    }

    pub fn parse(s: &str) -> Result<Family> {
        match s.trim().to_ascii_lowercase().as_str() {
            "al" | "asym_logistic" | "asymmetric_logistic" => Ok(Family::AsymLogistic),
            "td" | "tilted_dirichlet" => Ok(Family::TiltedDirichlet),
            "pb" | "pairwise_beta" => Ok(Family::PairwiseBeta),
            "hr" | "husler_reiss" | "husler-reiss" => Ok(Family::HuslerReiss),
            "et" | "extremal_t" | "extremal-t" => Ok(Family::ExtremalT),
            other => Err(Error::Validation(format!("unknown family '{other}'"))),
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Pairs `(i, j)` with `i < j` in lexicographic order; the canonical layout
/// of pairwise parameter vectors.
pub fn pair_order(d: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(d * (d - 1) / 2);
    for i in 0..d {
        for j in (i + 1)..d {
            out.push((i, j));
        }
    }
    out
}

/// A parametric angular measure: family tag plus validated parameter block.
#[derive(Debug, Clone)]
pub enum AngularModel {
    AsymLogistic(AsymLogisticParams),
    TiltedDirichlet(TiltedDirichletParams),
    PairwiseBeta(PairwiseBetaParams),
    HuslerReiss(HuslerReissParams),
    ExtremalT(ExtremalTParams),
}

pub(crate) fn check_simplex_point(w: &[f64], d: usize) -> Result<()> {
    if w.len() != d {
        return Err(Error::Validation(format!("point has length {}, expected {d}", w.len())));
    }
    if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(Error::Validation("simplex point has negative or non-finite entries".into()));
    }
    let s: f64 = w.iter().sum();
    if (s - 1.0).abs() > 1e-9 {
        return Err(Error::Validation(format!("coordinates sum to {s}, not 1")));
    }
    Ok(())
}

pub(crate) fn logsumexp(vals: &[f64]) -> f64 {
    let m = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    m + vals.iter().map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Estimate of one coordinate of the angular mean. `complete` is false when
/// part of the measure (extremal-t edge mass for d >= 3) has no published
/// density and could not be included.
#[derive(Debug, Clone, Copy)]
pub struct MomentEstimate {
    pub value: f64,
    pub complete: bool,
}

impl AngularModel {
    // ------------------------------------------------------------------
    // constructors
    // ------------------------------------------------------------------

    pub fn tilted_dirichlet(alpha: Vec<f64>) -> Result<Self> {
        Ok(Self::TiltedDirichlet(TiltedDirichletParams::new(alpha)?))
    }

    /// `beta` in pair order (see [`pair_order`]).
    pub fn pairwise_beta(d: usize, beta: Vec<f64>, alpha: f64) -> Result<Self> {
        Ok(Self::PairwiseBeta(PairwiseBetaParams::new(d, beta, alpha)?))
    }

    /// `lambda` in pair order.
    pub fn husler_reiss(d: usize, lambda: Vec<f64>) -> Result<Self> {
        Ok(Self::HuslerReiss(HuslerReissParams::new(d, lambda)?))
    }

    /// `rho` in pair order.
    pub fn extremal_t(d: usize, rho: Vec<f64>, nu: f64) -> Result<Self> {
        Ok(Self::ExtremalT(ExtremalTParams::new(d, rho, nu)?))
    }

    /// Exchangeable asymmetric logistic sub-family: one dependence block on
    /// the full index set with weights `beta`, the complements sitting on the
    /// vertices.
    pub fn asym_logistic_exchangeable(d: usize, alpha: f64, beta: Vec<f64>) -> Result<Self> {
        Ok(Self::AsymLogistic(AsymLogisticParams::exchangeable(d, alpha, beta)?))
    }

    /// Fully parameterized asymmetric logistic model.
    pub fn asym_logistic(d: usize, blocks: Vec<AlBlock>) -> Result<Self> {
        Ok(Self::AsymLogistic(AsymLogisticParams::new(d, blocks)?))
    }

    // ------------------------------------------------------------------
    // basic accessors
    // ------------------------------------------------------------------

    pub fn family(&self) -> Family {
        match self {
            Self::AsymLogistic(_) => Family::AsymLogistic,
            Self::TiltedDirichlet(_) => Family::TiltedDirichlet,
            Self::PairwiseBeta(_) => Family::PairwiseBeta,
            Self::HuslerReiss(_) => Family::HuslerReiss,
            Self::ExtremalT(_) => Family::ExtremalT,
        }
    }

    pub fn d(&self) -> usize {
        match self {
            Self::AsymLogistic(p) => p.d(),
            Self::TiltedDirichlet(p) => p.d(),
            Self::PairwiseBeta(p) => p.d(),
            Self::HuslerReiss(p) => p.d(),
            Self::ExtremalT(p) => p.d(),
        }
    }

    /// Ratio between the family's published density convention and the
    /// unnormalized measure of total mass `d`: multiply published densities
    /// by this factor to integrate against the total-mass-`d` measure.
    pub(crate) fn hprime_factor(&self) -> f64 {
        match self {
            Self::TiltedDirichlet(_) | Self::PairwiseBeta(_) => self.d() as f64,
            _ => 1.0,
        }
    }

    // ------------------------------------------------------------------
    // densities and masses
    // ------------------------------------------------------------------

    /// Interior angular density in the family's published convention.
    pub fn angular_density(&self, w: &[f64]) -> Result<f64> {
        Ok(self.log_angular_density(w)?.exp())
    }

    /// Log of [`Self::angular_density`]; `-inf` when the density vanishes.
    pub fn log_angular_density(&self, w: &[f64]) -> Result<f64> {
        check_simplex_point(w, self.d())?;
        if w.iter().any(|&v| v <= 0.0) {
            return Err(Error::Domain(
                "angular density is defined on the open simplex; use face_density or vertex_mass on the boundary".into(),
            ));
        }
        Ok(self.ln_interior(w))
    }

    /// Unchecked interior log-density (quadrature fast path).
    pub(crate) fn ln_interior(&self, w: &[f64]) -> f64 {
        match self {
            Self::AsymLogistic(p) => p.ln_face_density_full(w),
            Self::TiltedDirichlet(p) => p.ln_density(w),
            Self::PairwiseBeta(p) => p.ln_density(w),
            Self::HuslerReiss(p) => p.ln_density(w),
            Self::ExtremalT(p) => p.ln_density(w),
        }
    }

    /// Density on the face spanned by `subset` (0-based indices), evaluated
    /// at a point of that face given by its `subset`-coordinates.
    ///
    /// The full face lattice is only defined for the asymmetric logistic
    /// family; `|subset| = d` delegates to the interior density and
    /// `|subset| = 1` to the vertex mass for every family.
    pub fn face_density(&self, subset: &[usize], w_face: &[f64]) -> Result<f64> {
        let d = self.d();
        let mut s = subset.to_vec();
        s.sort_unstable();
        s.dedup();
        if s.len() != subset.len() || s.iter().any(|&j| j >= d) || s.is_empty() {
            return Err(Error::Validation("subset must be distinct indices within 0..d".into()));
        }
        if s.len() == d {
            let mut w = vec![0.0; d];
            for (pos, &j) in s.iter().enumerate() {
                w[j] = w_face[pos];
            }
            return self.angular_density(&w);
        }
        if s.len() == 1 {
            return self.vertex_mass(s[0]);
        }
        match self {
            Self::AsymLogistic(p) => {
                check_simplex_point(w_face, s.len())?;
                if w_face.iter().any(|&v| v <= 0.0) {
                    return Err(Error::Domain("face point must be interior to the face".into()));
                }
                Ok(p.ln_face_density(&s, w_face).exp())
            }
            _ => Err(Error::Unsupported(format!(
                "face densities for 1 < |S| < d are not defined for the {} family",
                self.family()
            ))),
        }
    }

    /// Point mass at vertex `j` in the family's published convention.
    pub fn vertex_mass(&self, j: usize) -> Result<f64> {
        if j >= self.d() {
            return Err(Error::Validation(format!("vertex index {j} out of range")));
        }
        match self {
            Self::AsymLogistic(p) => Ok(p.vertex_mass(j)),
            Self::ExtremalT(p) => p.vertex_mass(j),
            _ => Ok(0.0),
        }
    }

    // ------------------------------------------------------------------
    // exponent function and friends
    // ------------------------------------------------------------------

    /// Exponent function `V(y)`; homogeneous of order -1 and bounded by
    /// `max_j 1/y_j` and `sum_j 1/y_j`.
    pub fn exponent_function(&self, y: &[f64]) -> Result<f64> {
        self.check_positive(y)?;
        let v = match self {
            Self::AsymLogistic(p) => p.exponent(y),
            Self::HuslerReiss(p) => p.exponent(y)?,
            Self::ExtremalT(p) => p.exponent(y)?,
            Self::TiltedDirichlet(_) | Self::PairwiseBeta(_) => self.exponent_by_quadrature(y)?,
        };
        Ok(v)
    }

    fn exponent_by_quadrature(&self, y: &[f64]) -> Result<f64> {
        let d = self.d();
        let hf = self.hprime_factor();
        let cells = kink_cells(y);
        let q = integrate_cells(
            &|w: &[f64]| {
                let mut m = f64::NEG_INFINITY;
                for j in 0..d {
                    m = m.max(w[j] / y[j]);
                }
                m * hf * self.ln_interior(w).exp()
            },
            cells,
            QUAD_TOL,
        )?;
        Ok(q.value)
    }

    /// Pickands dependence function `A(t) = V(1/t_1, …, 1/t_d)` on the
    /// simplex, with boundary coordinates handled by continuity.
    pub fn pickands(&self, t: &[f64]) -> Result<f64> {
        check_simplex_point(t, self.d())?;
        let active: Vec<usize> = (0..self.d()).filter(|&j| t[j] > 0.0).collect();
        if active.len() == 1 {
            return Ok(1.0);
        }
        let closed = !matches!(self, Self::TiltedDirichlet(_) | Self::PairwiseBeta(_));
        if active.len() < self.d() && !closed {
            return Err(Error::Domain(
                "boundary evaluation of the Pickands function needs a closed-form exponent".into(),
            ));
        }
        let y: Vec<f64> = t.iter().map(|&tj| if tj > 0.0 { 1.0 / tj } else { 1e12 }).collect();
        let a = self.exponent_function(&y)?;
        let lower = t.iter().cloned().fold(f64::MIN, f64::max);
        if a < lower - 1e-6 || a > 1.0 + 1e-6 {
            return Err(Error::Numeric(format!(
                "Pickands value {a} violates bounds [{lower}, 1]"
            )));
        }
        Ok(a.clamp(lower, 1.0))
    }

    /// Tail dependence function `R(y)`: exponent-measure mass of the region
    /// where every coordinate exceeds its threshold. Evaluated by simplex
    /// quadrature of `min_j(w_j / y_j)`; vertices and lower faces contribute
    /// nothing because the min vanishes there.
    pub fn tail_dependence(&self, y: &[f64]) -> Result<f64> {
        self.check_positive(y)?;
        let d = self.d();
        let hf = self.hprime_factor();
        let cells = kink_cells(y);
        let q = integrate_cells(
            &|w: &[f64]| {
                let mut m = f64::INFINITY;
                for j in 0..d {
                    m = m.min(w[j] / y[j]);
                }
                m * hf * self.ln_interior(w).exp()
            },
            cells,
            QUAD_TOL,
        )?;
        Ok(q.value.max(0.0))
    }

    fn check_positive(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.d() {
            return Err(Error::Validation(format!(
                "threshold vector has length {}, expected {}",
                y.len(),
                self.d()
            )));
        }
        if y.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::Validation("thresholds must be positive and finite".into()));
        }
        Ok(())
    }

    // ------------------------------------------------------------------
    // moment checks and sampling
    // ------------------------------------------------------------------

    /// Coordinate `j` of the angular mean, `int w_j dH`, combining vertex
    /// atoms, face densities and the interior density. For a valid model this
    /// equals `1/d`.
    pub fn coordinate_moment(&self, j: usize, tol: f64) -> Result<MomentEstimate> {
        let d = self.d();
        if j >= d {
            return Err(Error::Validation(format!("coordinate {j} out of range")));
        }
        let hf = self.hprime_factor();
        let mut total = self.vertex_mass(j)?; // published masses are already on the total-mass-d scale
        let mut complete = true;

        if let Self::AsymLogistic(p) = self {
            for block in p.blocks() {
                let k = block.members.len();
                if k < 2 || k == d || !block.members.contains(&j) {
                    continue;
                }
                if block.beta.iter().any(|&b| b == 0.0) {
                    continue; // face density vanishes identically
                }
                let pos = block.members.iter().position(|&m| m == j).unwrap();
                let members = block.members.clone();
                let q = integrate_cells(
                    &|w: &[f64]| w[pos] * p.ln_face_density(&members, w).exp(),
                    vec![full_cell(k)],
                    tol / 4.0,
                )?;
                total += q.value;
            }
        }
        if let Self::ExtremalT(_) = self {
            if d >= 3 {
                complete = false; // edge densities unavailable
            }
        }

        let q = integrate_cells(
            &|w: &[f64]| w[j] * hf * self.ln_interior(w).exp(),
            vec![full_cell(d)],
            tol,
        )?;
        total += q.value;
        Ok(MomentEstimate { value: total / d as f64, complete })
    }

    /// Draw `n` points from the angular measure (including atoms and faces
    /// where the family places mass there). Reproducible for a fixed seed.
    pub fn sample_angular(&self, n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
        sample::sample_angular(self, n, seed)
    }
}

#[cfg(test)]
mod tests;

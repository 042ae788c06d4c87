//! Dependence modelling for multivariate extremes via parametric angular measures.
//!
//! The pipeline implemented here starts from raw multivariate observations and
//! ends at extreme-event probabilities and joint return levels:
//!
//! 1. [`margins`] fits semiparametric marginal distributions (empirical body,
//!    generalized Pareto tail), maps data to the unit Fréchet scale and into
//!    pseudo-polar coordinates, and selects the radial excesses.
//! 2. [`angular`] provides five parametric angular-measure families
//!    (asymmetric logistic, tilted Dirichlet, pairwise beta, Hüsler-Reiss,
//!    extremal-t) with densities, exponent functions, vertex masses and a
//!    test-support sampler.
//! 3. [`inference`] maximizes the approximate likelihood of the angular
//!    excesses with a multistart simplex search and reports
//!    misspecification-robust (sandwich) covariances, TIC and BIC.
//! 4. [`bayes`] samples the corresponding posterior by adaptive random-walk
//!    Metropolis-Hastings and runs Geweke / Heidelberger-Welch diagnostics.
//! 5. [`summaries`] turns a fitted model into dependence summaries (extremal
//!    coefficient, chi) and predictions (union / failure-region probabilities,
//!    joint return levels).
//!
//! [`mvgauss`] holds the low-dimensional multivariate normal and Student-t
//! kernels used by the Hüsler-Reiss and extremal-t families; [`simplex`] holds
//! the adaptive quadrature backend used wherever no closed form exists.

pub mod angular;
pub mod bayes;
pub mod error;
pub mod inference;
pub mod margins;
pub mod mvgauss;
pub mod optim;
pub mod simplex;
pub mod summaries;

pub use angular::{AngularModel, Family};
pub use error::{Error, Result};
pub use margins::{MarginalModel, PseudoPolarSample};

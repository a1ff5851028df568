//! Log-joint evaluators `log p(θ) + log p(y|θ)`.
//!
//! Models that work on transformed (unconstrained) parameters include the
//! log-Jacobian of the transform in their log-joint, so the variational
//! family lives on the unconstrained space.

mod conjugate_mean;
mod dataset;
mod garch;
mod gaussian_cov;
mod logistic;
mod synthetic;

pub use conjugate_mean::GaussianMeanModel;
pub use dataset::Dataset;
pub use garch::{garch_log_joint, garch_log_joint_with_prior, garch_variances, GarchModel, GarchParams, GarchPrior};
pub use gaussian_cov::{exact_iw_posterior, gaussian_cov_log_joint, iw_log_marginal_likelihood, GaussianCovModel};
pub use logistic::{logistic_log_joint, LogisticModel, DEFAULT_PRIOR_VARIANCE};
pub use synthetic::{generate_synthetic, true_covariance, SyntheticSpec};

use crate::{Result, Scalar};

/// A pluggable log-joint evaluator on parameters of type `P`.
pub trait LogJoint<T: Scalar, P: ?Sized>: Sync {
    fn parameter_dimension(&self) -> usize;

    /// `log p(θ) + log p(y|θ)`, including any transform log-Jacobian.
    fn log_joint(&self, theta: &P) -> Result<T>;

    fn description(&self) -> String;
}

//! Variational Bayes on Riemannian manifolds.
//!
//! The crate is organised bottom-up:
//!
//! - [`manifold`]: SPD and Stiefel points, tangent vectors, retractions,
//!   vector transports and tangent projections.
//! - [`natural_gradient`]: Fisher-metric natural gradients for the Gaussian and
//!   inverse-Wishart families, multivariate gamma special functions and an
//!   empirical Fisher estimator.
//! - [`estimation`]: samplers, score functions and the score-function
//!   estimator of the lower bound and its gradient with control variates.
//! - [`models`]: log-joint evaluators (logistic regression, GARCH(1,1),
//!   Gaussian covariance with inverse-Wishart prior, conjugate Gaussian mean).
//! - [`vb`]: momentum Riemannian SGD, Manifold Gaussian VB and Manifold
//!   Wishart VB, stopping rule and traces.
//! - [`harness`]: the analysis-form momentum recursion and rate fitting.
//!
//! All numerics are generic over [`Scalar`] (`f32` or `f64`); the aliases at
//! the bottom of this file fix the scalar to `f64`, which is what the CLI uses.

pub mod error;
pub mod estimation;
pub mod harness;
pub mod linalg;
pub mod manifold;
pub mod models;
pub mod natural_gradient;
pub mod rng;
pub mod scalar;
pub mod vb;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type SpdPoint64 = manifold::SpdPoint<f64>;
pub type SpdTangent64 = manifold::SpdTangent<f64>;
pub type StiefelPoint64 = manifold::StiefelPoint<f64>;
pub type StiefelTangent64 = manifold::StiefelTangent<f64>;
pub type GaussianParams64 = natural_gradient::GaussianVariationalParams<f64>;
pub type WishartParams64 = natural_gradient::WishartVariationalParams<f64>;
pub type OptimizerConfig64 = vb::OptimizerConfig<f64>;
pub type TraceRecord64 = vb::TraceRecord<f64>;

pub type SpdPoint32 = manifold::SpdPoint<f32>;
pub type GaussianParams32 = natural_gradient::GaussianVariationalParams<f32>;

use nalgebra::{DMatrix, DVector};

use super::LogJoint;
use crate::linalg::log1p_exp;
use crate::{Error, Result, Scalar};

pub const DEFAULT_PRIOR_VARIANCE: f64 = 10.0;

/// Bernoulli-logit likelihood with an `N(0, τ I)` prior on `β`.
#[derive(Debug, Clone)]
pub struct LogisticModel<T: Scalar> {
    x: DMatrix<T>,
    y: DVector<T>,
    prior_variance: T,
}

impl<T: Scalar> LogisticModel<T> {
    pub fn new(x: DMatrix<T>, y: DVector<T>) -> Result<Self> {
        Self::with_prior_variance(x, y, T::c(DEFAULT_PRIOR_VARIANCE))
    }

    pub fn with_prior_variance(x: DMatrix<T>, y: DVector<T>, prior_variance: T) -> Result<Self> {
        if x.nrows() != y.len() {
            return Err(Error::dims(x.nrows(), y.len()));
        }
        if y.iter().any(|&v| v != T::zero() && v != T::one()) {
            return Err(Error::Model("logistic response must be 0 or 1".into()));
        }
        if !(prior_variance > T::zero()) {
            return Err(Error::range("prior_variance", prior_variance.to_f64(), "> 0"));
        }
        Ok(Self { x, y, prior_variance })
    }

    /// Prepends a column of ones.
    pub fn add_intercept(x: &DMatrix<T>) -> DMatrix<T> {
        x.clone().insert_column(0, T::one())
    }
}

/// `Σ_i [y_i x_iᵀβ − log(1+exp(x_iᵀβ))] + log N(β; 0, τI)`.
pub fn logistic_log_joint<T: Scalar>(
    beta: &DVector<T>,
    x: &DMatrix<T>,
    y: &DVector<T>,
    prior_variance: T,
) -> Result<T> {
    if x.ncols() != beta.len() || x.nrows() != y.len() {
        return Err(Error::dims(
            format!("X {}x{} and y {}", y.len(), beta.len(), y.len()),
            format!("X {}x{} and y {}", x.nrows(), x.ncols(), y.len()),
        ));
    }
    let eta = x * beta;
    let mut ll = T::zero();
    for (e, &yi) in eta.iter().zip(y.iter()) {
        ll += yi * *e - log1p_exp(*e);
    }
    let d = T::from_count(beta.len());
    let prior = -T::c(0.5) * d * (T::two_pi() * prior_variance).ln()
        - beta.norm_squared() / (T::c(2.0) * prior_variance);
    Ok(ll + prior)
}

impl<T: Scalar> LogJoint<T, DVector<T>> for LogisticModel<T> {
    fn parameter_dimension(&self) -> usize {
        self.x.ncols()
    }

    fn log_joint(&self, beta: &DVector<T>) -> Result<T> {
        logistic_log_joint(beta, &self.x, &self.y, self.prior_variance)
    }

    fn description(&self) -> String {
        format!(
            "logistic regression: n = {}, d = {}, prior N(0, {} I)",
            self.x.nrows(),
            self.x.ncols(),
            self.prior_variance.to_f64()
        )
    }
}

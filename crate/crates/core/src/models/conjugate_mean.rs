use nalgebra::{DMatrix, DVector};

use super::LogJoint;
use crate::estimation::{GaussianFamily, VariationalFamily};
use crate::linalg::symmetrize;
use crate::manifold::SpdPoint;
use crate::natural_gradient::GaussianVariationalParams;
use crate::{Error, Result, Scalar};

/// `y_i ~ N(θ, Λ)` with `Λ` known and a `N(m₀, P₀)` prior on `θ`. The
/// posterior is Gaussian, which makes this a reference target for the
/// Gaussian family.
#[derive(Debug, Clone)]
pub struct GaussianMeanModel<T: Scalar> {
    y: DMatrix<T>,
    noise: GaussianFamily<T>,
    prior: GaussianFamily<T>,
}

impl<T: Scalar> GaussianMeanModel<T> {
    /// `y` holds one observation per row.
    pub fn new(y: DMatrix<T>, noise: SpdPoint<T>, prior_mean: DVector<T>, prior_cov: SpdPoint<T>) -> Result<Self> {
        let d = prior_mean.len();
        if y.ncols() != d || noise.dim() != d {
            return Err(Error::dims(d, if y.ncols() != d { y.ncols() } else { noise.dim() }));
        }
        Ok(Self {
            noise: GaussianFamily::new(GaussianVariationalParams::new(DVector::zeros(d), noise)?),
            prior: GaussianFamily::new(GaussianVariationalParams::new(prior_mean, prior_cov)?),
            y,
        })
    }

    pub fn posterior(&self) -> Result<GaussianVariationalParams<T>> {
        let n = T::from_count(self.y.nrows());
        let lambda_inv = self.noise.precision();
        let prec = symmetrize(&(self.prior.precision() + lambda_inv * n));
        let cov = SpdPoint::new(prec)?.inverse();
        let sum_y: DVector<T> = self.y.row_sum().transpose();
        let rhs = self.prior.precision() * &self.prior.params().mu + lambda_inv * sum_y;
        let mu = &cov * rhs;
        GaussianVariationalParams::new(mu, SpdPoint::from_symmetrized(cov)?)
    }

    /// `log p(y) = log p(y, θ̂) − log p(θ̂ | y)` at the posterior mean.
    pub fn log_marginal_likelihood(&self) -> Result<T> {
        let post = GaussianFamily::new(self.posterior()?);
        let at = post.params().mu.clone();
        Ok(self.log_joint(&at)? - post.log_density(&at))
    }
}

impl<T: Scalar> LogJoint<T, DVector<T>> for GaussianMeanModel<T> {
    fn parameter_dimension(&self) -> usize {
        self.y.ncols()
    }

    fn log_joint(&self, theta: &DVector<T>) -> Result<T> {
        if theta.len() != self.y.ncols() {
            return Err(Error::dims(self.y.ncols(), theta.len()));
        }
        let mut total = self.prior.log_density(theta);
        for row in self.y.row_iter() {
            total += self.noise.log_density(&(row.transpose() - theta));
        }
        Ok(total)
    }

    fn description(&self) -> String {
        format!("Gaussian mean, d = {}, n = {}", self.y.ncols(), self.y.nrows())
    }
}

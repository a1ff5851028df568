use nalgebra::DVector;

use super::{run_loop, Geometry, OptimizerConfig, ProductTangent, VbOutcome};
use crate::estimation::{score_function_gradient, split_gaussian_flat, GaussianFamily, GradientEstimate, MonteCarloConfig};
use crate::manifold::{spd_retract, SpdPoint, SpdTangent};
use crate::models::LogJoint;
use crate::natural_gradient::{gaussian_natural_gradient, GaussianVariationalParams};
use crate::{Error, Result, Scalar};

struct Gaussian<'m, M: ?Sized> {
    model: &'m M,
}

impl<T, M> Geometry<T> for Gaussian<'_, M>
where
    T: Scalar,
    M: LogJoint<T, DVector<T>> + ?Sized,
{
    type Params = GaussianVariationalParams<T>;

    fn gradient(&mut self, p: &Self::Params, mc: &MonteCarloConfig, c: &DVector<T>) -> Result<GradientEstimate<T>> {
        let family = GaussianFamily::new(p.clone());
        score_function_gradient::<T, _, M, DVector<T>>(self.model, &family, mc, c)
    }

    fn natural(&mut self, p: &Self::Params, flat: &DVector<T>) -> Result<ProductTangent<T>> {
        let (g_mu, g_sigma) = split_gaussian_flat(flat, p.dim())?;
        let (n_mu, n_sigma) = gaussian_natural_gradient(p, &g_mu, &g_sigma)?;
        Ok(ProductTangent {
            euclidean: n_mu,
            spd: SpdTangent::from_symmetrized(&p.sigma, n_sigma)?,
        })
    }

    fn retract(&mut self, p: &Self::Params, dir: &ProductTangent<T>, eps: T) -> Result<Self::Params> {
        let sigma = spd_retract(&p.sigma, &dir.spd.scale(eps))?;
        GaussianVariationalParams::new(&p.mu + &dir.euclidean * eps, sigma)
    }

    fn spd<'a>(&self, p: &'a Self::Params) -> &'a SpdPoint<T> {
        &p.sigma
    }

    fn flatten(&self, p: &Self::Params) -> Vec<T> {
        p.flatten()
    }
}

/// Manifold Gaussian VB: `q = N(μ, Σ)` with `Σ` on the SPD manifold.
pub fn run_manifold_gvb<T, M>(
    model: &M,
    init: GaussianVariationalParams<T>,
    config: &OptimizerConfig<T>,
) -> Result<VbOutcome<GaussianVariationalParams<T>, T>>
where
    T: Scalar,
    M: LogJoint<T, DVector<T>> + ?Sized,
{
    if model.parameter_dimension() != init.dim() {
        return Err(Error::dims(model.parameter_dimension(), init.dim()));
    }
    run_loop(&mut Gaussian { model }, init, config)
}

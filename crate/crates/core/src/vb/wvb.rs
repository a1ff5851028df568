use nalgebra::DVector;

use super::{run_loop, Geometry, NuUpdate, OptimizerConfig, ProductTangent, VbOutcome};
use crate::estimation::{score_function_gradient, split_wishart_flat, GradientEstimate, InverseWishartFamily, MonteCarloConfig};
use crate::manifold::{spd_retract, SpdPoint, SpdTangent};
use crate::models::LogJoint;
use crate::natural_gradient::{wishart_natural_gradient_nu, wishart_natural_gradient_sigma, WishartVariationalParams};
use crate::{Error, Result, Scalar};

/// Margin kept above `d − 1` when clamping `ν`.
const NU_MARGIN: f64 = 1e-6;

struct Wishart<'m, M: ?Sized, T> {
    model: &'m M,
    nu_update: NuUpdate<T>,
    nu_rate: T,
    base_rate: T,
    mean_square: T,
    steps: i32,
}

impl<T, M> Geometry<T> for Wishart<'_, M, T>
where
    T: Scalar,
    M: LogJoint<T, SpdPoint<T>> + ?Sized,
{
    type Params = WishartVariationalParams<T>;

    fn gradient(&mut self, p: &Self::Params, mc: &MonteCarloConfig, c: &DVector<T>) -> Result<GradientEstimate<T>> {
        let family = InverseWishartFamily::new(p.clone())?;
        score_function_gradient::<T, _, M, SpdPoint<T>>(self.model, &family, mc, c)
    }

    fn natural(&mut self, p: &Self::Params, flat: &DVector<T>) -> Result<ProductTangent<T>> {
        let (g_nu, g_sigma) = split_wishart_flat(flat, p.dim())?;
        let n_nu = match self.nu_update {
            NuUpdate::Scaled => wishart_natural_gradient_nu(p, g_nu)?,
            NuUpdate::Adaptive { decay, .. } => {
                // bias-corrected running mean of g²
                self.steps += 1;
                self.mean_square = decay * self.mean_square + (T::one() - decay) * g_nu * g_nu;
                let corrected = self.mean_square / (T::one() - decay.powi(self.steps));
                g_nu / (corrected.sqrt() + T::c(1e-12))
            }
        };
        Ok(ProductTangent {
            euclidean: DVector::from_element(1, n_nu),
            spd: SpdTangent::from_symmetrized(&p.sigma_q, wishart_natural_gradient_sigma(p, &g_sigma)?)?,
        })
    }

    fn retract(&mut self, p: &Self::Params, dir: &ProductTangent<T>, eps: T) -> Result<Self::Params> {
        let sigma_q = spd_retract(&p.sigma_q, &dir.spd.scale(eps))?;
        let rate = match self.nu_update {
            NuUpdate::Scaled => eps,
            // halved steps shrink the ν step by the same factor
            NuUpdate::Adaptive { .. } => self.nu_rate * eps / self.base_rate,
        };
        let floor = T::from_count(p.dim()) - T::one() + T::c(NU_MARGIN);
        let nu = (p.nu + dir.euclidean[0] * rate).max(floor);
        WishartVariationalParams::new(nu, sigma_q)
    }

    fn spd<'a>(&self, p: &'a Self::Params) -> &'a SpdPoint<T> {
        &p.sigma_q
    }

    fn flatten(&self, p: &Self::Params) -> Vec<T> {
        p.flatten()
    }
}

/// Manifold Wishart VB: `q = inverse-Wishart(ν, Σ_q)` with `Σ_q` on the SPD
/// manifold and `ν` clamped above `d − 1`.
pub fn run_manifold_wvb<T, M>(
    model: &M,
    init: WishartVariationalParams<T>,
    config: &OptimizerConfig<T>,
) -> Result<VbOutcome<WishartVariationalParams<T>, T>>
where
    T: Scalar,
    M: LogJoint<T, SpdPoint<T>> + ?Sized,
{
    if model.parameter_dimension() != init.dim() {
        return Err(Error::dims(model.parameter_dimension(), init.dim()));
    }
    let nu_rate = match config.nu_update {
        NuUpdate::Adaptive { rate, .. } => rate,
        NuUpdate::Scaled => config.learning_rate,
    };
    let mut geo = Wishart {
        model,
        nu_update: config.nu_update,
        nu_rate,
        base_rate: config.learning_rate,
        mean_square: T::zero(),
        steps: 0,
    };
    run_loop(&mut geo, init, config)
}

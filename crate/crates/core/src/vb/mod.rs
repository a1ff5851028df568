//! Momentum Riemannian gradient ascent on the lower bound.
//!
//! Both runners follow the same loop: step from the current iterate along
//! the momentum direction (vector addition for the Euclidean factor, SPD
//! retraction for the matrix factor), estimate the gradient at the new
//! iterate, turn it into a natural gradient, then mix it into the momentum
//! after transporting the old momentum to the new tangent space. The first
//! momentum is the natural gradient at the initial point.
//!
//! Iteration `t` draws its Monte Carlo samples from stream `t` of the
//! configured seed, so a run is reproducible bit for bit.

mod gvb;
mod stopping;
mod wvb;

use nalgebra::DVector;

use crate::estimation::{GradientEstimate, MonteCarloConfig};
use crate::manifold::{spd_transport, SpdPoint, SpdTangent};
use crate::{Error, Result, Scalar};

pub use gvb::run_manifold_gvb;
pub use stopping::{moving_average, stopping_rule, StoppingState};
pub use wvb::run_manifold_wvb;

/// Step halvings tried when a retraction leaves the SPD cone.
pub const MAX_STEP_HALVINGS: usize = 10;

/// Random stream of the control-variate warm-up draw at the initial point.
pub const WARM_UP_STREAM: u64 = u64::MAX;

/// How the Wishart degrees of freedom are stepped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NuUpdate<T> {
    /// Gradient scaled by `(¼ ψ′_d(ν/2))⁻¹`, stepped with the global learning rate.
    Scaled,
    /// Gradient divided by its running root-mean-square, stepped with `rate`.
    Adaptive { rate: T, decay: T },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig<T> {
    pub learning_rate: T,
    pub momentum_weight: T,
    pub mc: MonteCarloConfig,
    pub max_iterations: usize,
    pub patience: usize,
    pub smoothing_window: usize,
    pub nu_update: NuUpdate<T>,
}

impl<T: Scalar> Default for OptimizerConfig<T> {
    fn default() -> Self {
        Self {
            learning_rate: T::c(0.01),
            momentum_weight: T::c(0.9),
            mc: MonteCarloConfig::new(100, 0),
            max_iterations: 2000,
            patience: 50,
            smoothing_window: 10,
            nu_update: NuUpdate::Scaled,
        }
    }
}

impl<T: Scalar> OptimizerConfig<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > T::zero()) {
            return Err(Error::range("learning_rate", self.learning_rate.to_f64(), "> 0"));
        }
        if !(self.momentum_weight >= T::zero() && self.momentum_weight < T::one()) {
            return Err(Error::range("momentum_weight", self.momentum_weight.to_f64(), "in [0, 1)"));
        }
        if self.max_iterations == 0 {
            return Err(Error::range("max_iterations", 0.0, ">= 1"));
        }
        if self.smoothing_window == 0 {
            return Err(Error::range("smoothing_window", 0.0, ">= 1"));
        }
        if self.mc.sample_count < 2 {
            return Err(Error::range("sample_count", self.mc.sample_count as f64, ">= 2"));
        }
        if let NuUpdate::Adaptive { rate, decay } = self.nu_update {
            if !(rate > T::zero()) {
                return Err(Error::range("nu_rate", rate.to_f64(), "> 0"));
            }
            if !(decay > T::zero() && decay < T::one()) {
                return Err(Error::range("nu_decay", decay.to_f64(), "in (0, 1)"));
            }
        }
        Ok(())
    }
}

/// A tangent vector on `ℝᵏ × SPD(d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductTangent<T: Scalar> {
    pub euclidean: DVector<T>,
    pub spd: SpdTangent<T>,
}

/// The momentum direction `Y_t`, based at the current iterate.
pub type MomentumState<T> = ProductTangent<T>;

impl<T: Scalar> ProductTangent<T> {
    /// `sqrt(|e|² + |ξ|_F²)`.
    pub fn norm(&self) -> T {
        (self.euclidean.norm_squared() + self.spd.matrix().norm_squared()).sqrt()
    }

    /// Identity on the Euclidean factor, `EξEᵀ` on the SPD factor.
    pub fn transport(&self, to: &SpdPoint<T>) -> Result<Self> {
        Ok(Self {
            euclidean: self.euclidean.clone(),
            spd: spd_transport(self.spd.base(), to, &self.spd)?,
        })
    }
}

/// `ω · transported + (1 − ω) · grad`.
pub fn momentum_update<T: Scalar>(
    transported: &ProductTangent<T>,
    grad: &ProductTangent<T>,
    omega: T,
) -> Result<MomentumState<T>> {
    if transported.euclidean.len() != grad.euclidean.len() {
        return Err(Error::dims(grad.euclidean.len(), transported.euclidean.len()));
    }
    let rest = T::one() - omega;
    Ok(ProductTangent {
        euclidean: &transported.euclidean * omega + &grad.euclidean * rest,
        spd: transported.spd.lincomb(omega, &grad.spd, rest)?,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord<T> {
    pub iteration: usize,
    pub lower_bound: T,
    pub lower_bound_std_error: T,
    pub smoothed_lower_bound: T,
    /// Norm of the natural-gradient estimate.
    pub gradient_norm: T,
    /// Parameters after this iteration's step, flattened.
    pub parameters: Vec<T>,
}

#[derive(Debug, Clone)]
pub struct VbOutcome<P, T> {
    pub params: P,
    pub trace: Vec<TraceRecord<T>>,
    /// True if the stopping rule fired before `max_iterations`.
    pub stopped: bool,
}

/// The pieces of one variational family that the shared loop needs.
trait Geometry<T: Scalar> {
    type Params: Clone;

    fn gradient(&mut self, p: &Self::Params, mc: &MonteCarloConfig, c: &DVector<T>) -> Result<GradientEstimate<T>>;

    fn natural(&mut self, p: &Self::Params, flat: &DVector<T>) -> Result<ProductTangent<T>>;

    /// `R_λ(ε Y)`; may fail with [`Error::StepRejected`].
    fn retract(&mut self, p: &Self::Params, dir: &ProductTangent<T>, eps: T) -> Result<Self::Params>;

    fn spd<'a>(&self, p: &'a Self::Params) -> &'a SpdPoint<T>;

    fn flatten(&self, p: &Self::Params) -> Vec<T>;
}

fn run_loop<T: Scalar, G: Geometry<T>>(
    geo: &mut G,
    init: G::Params,
    config: &OptimizerConfig<T>,
) -> Result<VbOutcome<G::Params, T>> {
    config.validate()?;
    let mut params = init;
    // A warm-up draw at λ₀ supplies control coefficients for the first
    // gradient, which is then estimated from fresh draws.
    let zeros = DVector::zeros(geo.flatten(&params).len());
    let warm = geo.gradient(&params, &config.mc.at_stream(WARM_UP_STREAM), &zeros)?;
    let first = geo.gradient(&params, &config.mc.at_stream(0), &warm.control_coefficients)?;
    let mut c = first.control_coefficients;
    let mut momentum = geo.natural(&params, &first.value)?;

    let mut stop = StoppingState::new(config.smoothing_window, config.patience);
    let mut trace = Vec::with_capacity(config.max_iterations.min(10_000));
    for t in 1..=config.max_iterations {
        let mut eps = config.learning_rate;
        let mut next = None;
        for _ in 0..=MAX_STEP_HALVINGS {
            match geo.retract(&params, &momentum, eps) {
                Ok(p) => {
                    next = Some(p);
                    break;
                }
                Err(Error::StepRejected) => eps *= T::c(0.5),
                Err(e) => return Err(e),
            }
        }
        let next = next.ok_or(Error::RetractionAborted(t))?;

        let est = geo.gradient(&next, &config.mc.at_stream(t as u64), &c)?;
        c = est.control_coefficients;
        let grad = geo.natural(&next, &est.value)?;
        let transported = momentum.transport(geo.spd(&next))?;
        momentum = momentum_update(&transported, &grad, config.momentum_weight)?;
        params = next;

        let (smoothed, fired) = stop.push(est.lower_bound.value);
        trace.push(TraceRecord {
            iteration: t,
            lower_bound: est.lower_bound.value,
            lower_bound_std_error: est.lower_bound.std_error,
            smoothed_lower_bound: smoothed,
            gradient_norm: grad.norm(),
            parameters: geo.flatten(&params),
        });
        if fired {
            return Ok(VbOutcome { params, trace, stopped: true });
        }
    }
    Ok(VbOutcome { params, trace, stopped: false })
}

/// Column names of a trace CSV for `parameter_names` flattened parameters.
pub fn trace_header(parameter_names: &[String]) -> Vec<String> {
    let mut h: Vec<String> = ["iteration", "lower_bound", "smoothed_lower_bound", "gradient_norm"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    h.extend(parameter_names.iter().cloned());
    h
}

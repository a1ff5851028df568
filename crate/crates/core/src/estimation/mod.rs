//! Score-function estimation of the lower bound and its gradient.
//!
//! For a variational family `q_λ` and a model with log-joint
//! `log p(θ) + log p(y|θ)`, define `h(θ) = log p(θ)p(y|θ) − log q_λ(θ)`.
//! The lower bound is `E_q[h]` and its gradient is `E_q[∇ log q · (h − c)]`
//! for any constant vector `c`. The coefficients `c` returned by
//! [`score_function_gradient`] are computed from the current samples and are
//! meant to be applied at the next call, so each estimate stays unbiased.
//!
//! Flat coordinates follow [`crate::natural_gradient::GaussianVariationalParams::flatten`]
//! and [`crate::natural_gradient::WishartVariationalParams::flatten`]: the
//! vector part first, then the row-major upper triangle of the matrix. The
//! matrix part of a score is the matrix gradient under the trace pairing
//! `D f[ξ] = trace(G ξ)`, so an off-diagonal entry is half the partial
//! derivative with respect to the corresponding free coordinate.

mod gaussian;
mod inverse_wishart;

use std::borrow::Borrow;

use nalgebra::DVector;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::models::LogJoint;
use crate::rng::substream;
use crate::{Error, Result, Scalar};

pub use gaussian::{gaussian_log_density, gaussian_score, sample_gaussian, split_gaussian_flat, GaussianFamily};
pub use inverse_wishart::{
    inverse_wishart_log_density, inverse_wishart_score, sample_inverse_wishart, split_wishart_flat,
    InverseWishartFamily, IwDraw,
};

/// Number of Monte Carlo draws and the random stream they come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MonteCarloConfig {
    pub sample_count: usize,
    pub seed: u64,
    /// Iteration index mixed into the per-sample substreams.
    pub stream: u64,
}

impl MonteCarloConfig {
    pub fn new(sample_count: usize, seed: u64) -> Self {
        Self {
            sample_count,
            seed,
            stream: 0,
        }
    }

    pub fn at_stream(self, stream: u64) -> Self {
        Self { stream, ..self }
    }

    pub fn rng_for(&self, sample: usize) -> ChaCha8Rng {
        substream(self.seed, self.stream, sample as u64)
    }
}

/// A variational family with a fixed parameter value.
pub trait VariationalFamily<T: Scalar>: Sync {
    type Draw: Send + Sync;

    /// Length of the flat score vector.
    fn flat_len(&self) -> usize;

    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<Self::Draw>;

    fn log_density(&self, x: &Self::Draw) -> T;

    /// `∇_λ log q_λ(x)` in flat coordinates.
    fn score(&self, x: &Self::Draw) -> DVector<T>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LowerBoundEstimate<T> {
    pub value: T,
    pub std_error: T,
}

/// Output of [`score_function_gradient`].
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate<T: Scalar> {
    /// Estimate of `∇_λ ℒ` (flat coordinates).
    pub value: DVector<T>,
    /// Variance-minimising coefficients from this batch, for the next call.
    pub control_coefficients: DVector<T>,
    /// Lower-bound estimate from the same draws.
    pub lower_bound: LowerBoundEstimate<T>,
}

struct Evaluated<T: Scalar> {
    score: DVector<T>,
    h: T,
}

fn evaluate_h<T, F, M, P>(model: &M, family: &F, x: &F::Draw) -> Result<T>
where
    T: Scalar,
    F: VariationalFamily<T>,
    F::Draw: Borrow<P>,
    M: LogJoint<T, P> + ?Sized,
    P: ?Sized,
{
    let lj = model.log_joint(x.borrow())?;
    let h = lj - family.log_density(x);
    if !h.is_finite_val() {
        return Err(Error::Model(format!("non-finite log-joint ({})", lj.to_f64())));
    }
    Ok(h)
}

fn mean_and_se<T: Scalar>(values: &[T]) -> LowerBoundEstimate<T> {
    let n = T::from_count(values.len());
    let mean = values.iter().fold(T::zero(), |s, &v| s + v) / n;
    let var = if values.len() > 1 {
        values.iter().fold(T::zero(), |s, &v| s + (v - mean) * (v - mean)) / (n - T::one())
    } else {
        T::zero()
    };
    LowerBoundEstimate {
        value: mean,
        std_error: (var / n).sqrt(),
    }
}

/// `(1/S) Σ_s h(θ_s)` with `θ_s ~ q_λ`, plus its standard error.
pub fn estimate_lower_bound<T, F, M, P>(
    model: &M,
    family: &F,
    config: &MonteCarloConfig,
) -> Result<LowerBoundEstimate<T>>
where
    T: Scalar,
    F: VariationalFamily<T>,
    F::Draw: Borrow<P>,
    M: LogJoint<T, P> + ?Sized,
    P: ?Sized,
{
    if config.sample_count == 0 {
        return Err(Error::range("sample_count", 0.0, "S >= 1"));
    }
    let hs: Vec<T> = (0..config.sample_count)
        .into_par_iter()
        .map(|s| {
            let x = family.draw(&mut config.rng_for(s))?;
            evaluate_h(model, family, &x)
        })
        .collect::<Result<_>>()?;
    Ok(mean_and_se(&hs))
}

/// Score-function estimate of `∇_λ ℒ` using control coefficients `c_prev`
/// (from the previous iteration; zeros at the start).
pub fn score_function_gradient<T, F, M, P>(
    model: &M,
    family: &F,
    config: &MonteCarloConfig,
    c_prev: &DVector<T>,
) -> Result<GradientEstimate<T>>
where
    T: Scalar,
    F: VariationalFamily<T>,
    F::Draw: Borrow<P>,
    M: LogJoint<T, P> + ?Sized,
    P: ?Sized,
{
    let k = family.flat_len();
    if config.sample_count < 2 {
        return Err(Error::range(
            "sample_count",
            config.sample_count as f64,
            "S >= 2 for control variates",
        ));
    }
    if c_prev.len() != k {
        return Err(Error::dims(k, c_prev.len()));
    }
    let draws: Vec<Evaluated<T>> = (0..config.sample_count)
        .into_par_iter()
        .map(|s| {
            let x = family.draw(&mut config.rng_for(s))?;
            let h = evaluate_h(model, family, &x)?;
            Ok(Evaluated {
                score: family.score(&x),
                h,
            })
        })
        .collect::<Result<_>>()?;

    let n = T::from_count(draws.len());
    let mut value = DVector::zeros(k);
    let mut sum_g = DVector::zeros(k);
    let mut sum_gh = DVector::zeros(k);
    for e in &draws {
        for i in 0..k {
            let g = e.score[i];
            value[i] += g * (e.h - c_prev[i]);
            sum_g[i] += g;
            sum_gh[i] += g * e.h;
        }
    }
    value /= n;
    let mean_g = sum_g / n;
    let mean_gh = sum_gh / n;

    let mut cov: DVector<T> = DVector::zeros(k);
    let mut var: DVector<T> = DVector::zeros(k);
    for e in &draws {
        for i in 0..k {
            let dg = e.score[i] - mean_g[i];
            cov[i] += dg * (e.score[i] * e.h - mean_gh[i]);
            var[i] += dg * dg;
        }
    }
    let control_coefficients = DVector::from_fn(k, |i, _| {
        if var[i] > T::zero() {
            cov[i] / var[i]
        } else {
            T::zero()
        }
    });
    let hs: Vec<T> = draws.iter().map(|e| e.h).collect();
    Ok(GradientEstimate {
        value,
        control_coefficients,
        lower_bound: mean_and_se(&hs),
    })
}

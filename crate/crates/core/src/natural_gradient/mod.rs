//! Natural gradients for the Gaussian and inverse-Wishart variational
//! families.
//!
//! The Gaussian Fisher matrix is used in its block/Kronecker form
//! `blockdiag(Σ⁻¹, Σ⁻¹ ⊗ Σ⁻¹)`, whose inverse maps a Euclidean gradient
//! `(g_μ, G_Σ)` to `(Σ g_μ, Σ G_Σ Σ)`. The products are formed directly; the
//! `d² × d²` matrix is never built.

pub mod special;

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::linalg::{self, symmetrize};
use crate::manifold::SpdPoint;
use crate::rng::substream;
use crate::{Error, Result, Scalar};

pub use special::{multivariate_special, MultivariateSpecial};

/// `N(μ, Σ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianVariationalParams<T: Scalar> {
    pub mu: DVector<T>,
    pub sigma: SpdPoint<T>,
}

impl<T: Scalar> GaussianVariationalParams<T> {
    pub fn new(mu: DVector<T>, sigma: SpdPoint<T>) -> Result<Self> {
        if mu.len() != sigma.dim() {
            return Err(Error::dims(sigma.dim(), mu.len()));
        }
        Ok(Self { mu, sigma })
    }

    pub fn dim(&self) -> usize {
        self.mu.len()
    }

    /// Number of free coordinates: `d + d(d+1)/2`.
    pub fn flat_len(&self) -> usize {
        let d = self.dim();
        d + d * (d + 1) / 2
    }

    /// `(μ, upper triangle of Σ)`.
    pub fn flatten(&self) -> Vec<T> {
        let mut v: Vec<T> = self.mu.iter().copied().collect();
        v.extend(linalg::upper_triangle(self.sigma.matrix()));
        v
    }
}

/// `inverse-Wishart(ν, Σ_q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WishartVariationalParams<T: Scalar> {
    pub nu: T,
    pub sigma_q: SpdPoint<T>,
}

impl<T: Scalar> WishartVariationalParams<T> {
    /// Requires `ν > d − 1`.
    pub fn new(nu: T, sigma_q: SpdPoint<T>) -> Result<Self> {
        let lower = T::from_count(sigma_q.dim()) - T::one();
        if !(nu > lower) || !nu.is_finite_val() {
            return Err(Error::range("nu", nu.to_f64(), format!("nu > d - 1 = {}", lower.to_f64())));
        }
        Ok(Self { nu, sigma_q })
    }

    pub fn dim(&self) -> usize {
        self.sigma_q.dim()
    }

    pub fn flat_len(&self) -> usize {
        let d = self.dim();
        1 + d * (d + 1) / 2
    }

    /// `(ν, upper triangle of Σ_q)`.
    pub fn flatten(&self) -> Vec<T> {
        let mut v = vec![self.nu];
        v.extend(linalg::upper_triangle(self.sigma_q.matrix()));
        v
    }

    /// `E[V] = Σ_q / (ν − d − 1)`, defined for `ν > d + 1`.
    pub fn mean(&self) -> Result<DMatrix<T>> {
        let d = T::from_count(self.dim());
        let denom = self.nu - d - T::one();
        if !(denom > T::zero()) {
            return Err(Error::range("nu", self.nu.to_f64(), "nu > d + 1 for the mean"));
        }
        Ok(self.sigma_q.matrix() / denom)
    }

    /// Element-wise `Var(V_ij)`, defined for `ν > d + 3`.
    pub fn variance(&self) -> Result<DMatrix<T>> {
        let d = T::from_count(self.dim());
        let nu = self.nu;
        if !(nu - d - T::c(3.0) > T::zero()) {
            return Err(Error::range("nu", nu.to_f64(), "nu > d + 3 for the variance"));
        }
        let s = self.sigma_q.matrix();
        let a = nu - d + T::one();
        let b = nu - d - T::one();
        let denom = (nu - d) * b * b * (nu - d - T::c(3.0));
        Ok(DMatrix::from_fn(s.nrows(), s.ncols(), |i, j| {
            (a * s[(i, j)] * s[(i, j)] + b * s[(i, i)] * s[(j, j)]) / denom
        }))
    }
}

fn require_sym<T: Scalar>(g: &DMatrix<T>, d: usize) -> Result<()> {
    linalg::require_shape(g, d, d)?;
    let asym = linalg::max_asymmetry(g);
    if asym > T::c(1e-10) * (T::one() + linalg::max_abs(g)) {
        return Err(Error::NotSymmetric(asym.to_f64()));
    }
    Ok(())
}

/// `(Σ g_μ, Σ G_Σ Σ)`.
pub fn gaussian_natural_gradient<T: Scalar>(
    params: &GaussianVariationalParams<T>,
    grad_mu: &DVector<T>,
    grad_sigma: &DMatrix<T>,
) -> Result<(DVector<T>, DMatrix<T>)> {
    let d = params.dim();
    if grad_mu.len() != d {
        return Err(Error::dims(d, grad_mu.len()));
    }
    require_sym(grad_sigma, d)?;
    let s = params.sigma.matrix();
    Ok((s * grad_mu, symmetrize(&(s * grad_sigma * s))))
}

/// `Σ_q G Σ_q`.
pub fn wishart_natural_gradient_sigma<T: Scalar>(
    params: &WishartVariationalParams<T>,
    grad_sigma: &DMatrix<T>,
) -> Result<DMatrix<T>> {
    require_sym(grad_sigma, params.dim())?;
    let s = params.sigma_q.matrix();
    Ok(symmetrize(&(s * grad_sigma * s)))
}

/// Scaling `(¼ ψ′_d(ν/2))⁻¹` applied to the ν-gradient.
pub fn wishart_nu_scaling<T: Scalar>(d: usize, nu: T) -> Result<T> {
    let lower = T::from_count(d) - T::one();
    if !(nu > lower) {
        return Err(Error::range("nu", nu.to_f64(), format!("nu > d - 1 = {}", lower.to_f64())));
    }
    let tri = special::multi_trigamma(d, nu * T::c(0.5))?;
    Ok(T::c(4.0) / tri)
}

pub fn wishart_natural_gradient_nu<T: Scalar>(
    params: &WishartVariationalParams<T>,
    grad_nu: T,
) -> Result<T> {
    Ok(wishart_nu_scaling(params.dim(), params.nu)? * grad_nu)
}

/// Monte Carlo estimate of `Cov(∇ log q)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FisherEstimate<T: Scalar> {
    pub matrix: DMatrix<T>,
    pub sample_count: usize,
    /// Mean of the raw scores (should be near zero).
    pub mean_score: DVector<T>,
}

/// Draws `samples` scores with independent substreams of `seed` and returns
/// their sample covariance.
pub fn empirical_fisher<T, F>(score_sampler: F, samples: usize, seed: u64) -> Result<FisherEstimate<T>>
where
    T: Scalar,
    F: Fn(&mut ChaCha8Rng) -> Result<DVector<T>> + Sync,
{
    if samples < 2 {
        return Err(Error::range("sample_count", samples as f64, "S >= 2"));
    }
    let scores: Vec<DVector<T>> = (0..samples)
        .into_par_iter()
        .map(|s| score_sampler(&mut substream(seed, 0, s as u64)))
        .collect::<Result<_>>()?;
    let k = scores[0].len();
    if scores.iter().any(|g| g.len() != k) {
        return Err(Error::dims(k, "scores of varying length"));
    }
    let n = T::from_count(samples);
    let mean = scores.iter().fold(DVector::zeros(k), |acc, g| acc + g) / n;
    let mut cov = DMatrix::zeros(k, k);
    for g in &scores {
        let c = g - &mean;
        cov.ger(T::one(), &c, &c, T::one());
    }
    cov /= n - T::one();
    Ok(FisherEstimate {
        matrix: symmetrize(&cov),
        sample_count: samples,
        mean_score: mean,
    })
}

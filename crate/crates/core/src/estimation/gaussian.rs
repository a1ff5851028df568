use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;

use super::{MonteCarloConfig, VariationalFamily};
use crate::linalg::{self, symmetrize};
use crate::natural_gradient::GaussianVariationalParams;
use crate::rng::standard_normal;
use crate::{Error, Result, Scalar};

/// `N(μ, Σ)` with `Σ⁻¹` and `log|Σ|` precomputed.
#[derive(Debug, Clone)]
pub struct GaussianFamily<T: Scalar> {
    params: GaussianVariationalParams<T>,
    precision: DMatrix<T>,
    log_norm: T,
}

impl<T: Scalar> GaussianFamily<T> {
    pub fn new(params: GaussianVariationalParams<T>) -> Self {
        let d = T::from_count(params.dim());
        let precision = params.sigma.inverse();
        let log_norm = -T::c(0.5) * (d * T::two_pi().ln() + params.sigma.log_det());
        Self {
            params,
            precision,
            log_norm,
        }
    }

    pub fn params(&self) -> &GaussianVariationalParams<T> {
        &self.params
    }

    pub fn precision(&self) -> &DMatrix<T> {
        &self.precision
    }

    fn check(&self, theta: &DVector<T>) -> Result<()> {
        if theta.len() != self.params.dim() {
            return Err(Error::dims(self.params.dim(), theta.len()));
        }
        Ok(())
    }
}

impl<T: Scalar> VariationalFamily<T> for GaussianFamily<T> {
    type Draw = DVector<T>;

    fn flat_len(&self) -> usize {
        self.params.flat_len()
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<DVector<T>> {
        let d = self.params.dim();
        let z = DVector::from_fn(d, |_, _| standard_normal::<T, _>(rng));
        Ok(&self.params.mu + self.params.sigma.cholesky() * z)
    }

    fn log_density(&self, theta: &DVector<T>) -> T {
        let r = theta - &self.params.mu;
        self.log_norm - T::c(0.5) * r.dot(&(&self.precision * &r))
    }

    fn score(&self, theta: &DVector<T>) -> DVector<T> {
        let d = self.params.dim();
        let pr = &self.precision * (theta - &self.params.mu);
        let mut out = DVector::zeros(self.flat_len());
        out.rows_mut(0, d).copy_from(&pr);
        let mut k = d;
        for i in 0..d {
            for j in i..d {
                out[k] = T::c(0.5) * (pr[i] * pr[j] - self.precision[(i, j)]);
                k += 1;
            }
        }
        out
    }
}

/// `S` draws `θ = μ + Lz`, `LLᵀ = Σ`.
pub fn sample_gaussian<T: Scalar>(
    params: &GaussianVariationalParams<T>,
    config: &MonteCarloConfig,
) -> Result<Vec<DVector<T>>> {
    let family = GaussianFamily::new(params.clone());
    (0..config.sample_count)
        .map(|s| family.draw(&mut config.rng_for(s)))
        .collect()
}

pub fn gaussian_log_density<T: Scalar>(params: &GaussianVariationalParams<T>, theta: &DVector<T>) -> Result<T> {
    let family = GaussianFamily::new(params.clone());
    family.check(theta)?;
    Ok(family.log_density(theta))
}

/// `∇_μ = Σ⁻¹(θ−μ)`, `∇_Σ = −½Σ⁻¹ + ½Σ⁻¹(θ−μ)(θ−μ)ᵀΣ⁻¹`.
pub fn gaussian_score<T: Scalar>(
    params: &GaussianVariationalParams<T>,
    theta: &DVector<T>,
) -> Result<(DVector<T>, DMatrix<T>)> {
    let family = GaussianFamily::new(params.clone());
    family.check(theta)?;
    let pr = family.precision() * (theta - &params.mu);
    let g_sigma = symmetrize(&((&pr * pr.transpose() - family.precision()) * T::c(0.5)));
    Ok((pr, g_sigma))
}

/// Splits a flat Gaussian vector into `(μ part, symmetric Σ part)`.
pub fn split_gaussian_flat<T: Scalar>(flat: &DVector<T>, d: usize) -> Result<(DVector<T>, DMatrix<T>)> {
    if flat.len() != d + d * (d + 1) / 2 {
        return Err(Error::dims(d + d * (d + 1) / 2, flat.len()));
    }
    let mu = flat.rows(0, d).into_owned();
    let tri: Vec<T> = flat.iter().skip(d).copied().collect();
    Ok((mu, linalg::from_upper_triangle(&tri, d)?))
}

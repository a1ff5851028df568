use std::borrow::Borrow;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::ChiSquared;

use super::{MonteCarloConfig, VariationalFamily};
use crate::linalg::{self, symmetrize};
use crate::manifold::SpdPoint;
use crate::natural_gradient::special::multivariate_special;
use crate::natural_gradient::WishartVariationalParams;
use crate::rng::standard_normal;
use crate::{Error, Result, Scalar};

/// A draw `V ~ inverse-Wishart` together with `V⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct IwDraw<T: Scalar> {
    pub v: SpdPoint<T>,
    pub v_inv: DMatrix<T>,
}

impl<T: Scalar> Borrow<SpdPoint<T>> for IwDraw<T> {
    fn borrow(&self) -> &SpdPoint<T> {
        &self.v
    }
}

/// `inverse-Wishart(ν, Σ_q)` with the normalising constant, `Σ_q⁻¹` and
/// `ψ_d(ν/2)` precomputed.
#[derive(Debug, Clone)]
pub struct InverseWishartFamily<T: Scalar> {
    params: WishartVariationalParams<T>,
    sigma_inv: DMatrix<T>,
    log_det_sigma: T,
    log_norm: T,
    nu_score_const: T,
    chi: Vec<ChiSquared<f64>>,
}

impl<T: Scalar> InverseWishartFamily<T> {
    pub fn new(params: WishartVariationalParams<T>) -> Result<Self> {
        let d = params.dim();
        let dt = T::from_count(d);
        let half_nu = params.nu * T::c(0.5);
        let special = multivariate_special(d, half_nu)?;
        let log_det_sigma = params.sigma_q.log_det();
        let ln2 = T::c(std::f64::consts::LN_2);
        let log_norm = half_nu * log_det_sigma - dt * half_nu * ln2 - special.ln_gamma;
        let nu_score_const = T::c(0.5) * (log_det_sigma - dt * ln2 - special.digamma);
        let nu = params.nu.to_f64();
        let chi = (0..d)
            .map(|i| {
                ChiSquared::new(nu - i as f64).map_err(|_| {
                    Error::range("nu", nu, format!("nu > d - 1 = {}", d as f64 - 1.0))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            sigma_inv: params.sigma_q.inverse(),
            params,
            log_det_sigma,
            log_norm,
            nu_score_const,
            chi,
        })
    }

    pub fn params(&self) -> &WishartVariationalParams<T> {
        &self.params
    }

    pub fn log_det_sigma(&self) -> T {
        self.log_det_sigma
    }

    /// `log q` from `log|V|` and `V⁻¹`.
    pub fn log_density_with(&self, log_det_v: T, v_inv: &DMatrix<T>) -> T {
        let d = T::from_count(self.params.dim());
        let tr = linalg::frob_inner(self.params.sigma_q.matrix(), v_inv);
        self.log_norm - T::c(0.5) * (self.params.nu + d + T::one()) * log_det_v - T::c(0.5) * tr
    }

    /// `(∇_ν, ∇_Σ)` of `log q` at a draw.
    pub fn score_parts(&self, x: &IwDraw<T>) -> (T, DMatrix<T>) {
        let g_nu = self.nu_score_const - T::c(0.5) * x.v.log_det();
        let g_sigma = symmetrize(&((&self.sigma_inv * self.params.nu - &x.v_inv) * T::c(0.5)));
        (g_nu, g_sigma)
    }
}

impl<T: Scalar> VariationalFamily<T> for InverseWishartFamily<T> {
    type Draw = IwDraw<T>;

    fn flat_len(&self) -> usize {
        self.params.flat_len()
    }

    /// Bartlett: with `Σ_q = CCᵀ` and `A` lower triangular (`A_ii² ~ χ²(ν−i)`,
    /// `A_ij ~ N(0,1)` below the diagonal), `V = (C A⁻ᵀ)(C A⁻ᵀ)ᵀ` and
    /// `V⁻¹ = (C⁻ᵀA)(C⁻ᵀA)ᵀ`.
    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<IwDraw<T>> {
        let d = self.params.dim();
        let mut a = DMatrix::zeros(d, d);
        for i in 0..d {
            let c: f64 = rng.sample(self.chi[i]);
            a[(i, i)] = T::c(c.sqrt());
            for j in 0..i {
                a[(i, j)] = standard_normal::<T, _>(rng);
            }
        }
        let c = self.params.sigma_q.cholesky();
        let a_inv = linalg::lower_inverse(&a)?;
        let b = c * a_inv.transpose();
        let k = c
            .tr_solve_lower_triangular(&a)
            .ok_or_else(|| Error::Numerical("singular scale factor".into()))?;
        let v = SpdPoint::from_symmetrized(&b * b.transpose())?;
        let v_inv = symmetrize(&(&k * k.transpose()));
        Ok(IwDraw { v, v_inv })
    }

    fn log_density(&self, x: &IwDraw<T>) -> T {
        self.log_density_with(x.v.log_det(), &x.v_inv)
    }

    fn score(&self, x: &IwDraw<T>) -> DVector<T> {
        let (g_nu, g_sigma) = self.score_parts(x);
        let mut out = vec![g_nu];
        out.extend(linalg::upper_triangle(&g_sigma));
        DVector::from_vec(out)
    }
}

pub fn sample_inverse_wishart<T: Scalar>(
    params: &WishartVariationalParams<T>,
    config: &MonteCarloConfig,
) -> Result<Vec<SpdPoint<T>>> {
    let family = InverseWishartFamily::new(params.clone())?;
    (0..config.sample_count)
        .map(|s| family.draw(&mut config.rng_for(s)).map(|x| x.v))
        .collect()
}

/// `log IW(V; ν, S)`.
pub fn inverse_wishart_log_density<T: Scalar>(v: &SpdPoint<T>, nu: T, scale: &SpdPoint<T>) -> Result<T> {
    if v.dim() != scale.dim() {
        return Err(Error::dims(scale.dim(), v.dim()));
    }
    let family = InverseWishartFamily::new(WishartVariationalParams::new(nu, scale.clone())?)?;
    Ok(family.log_density_with(v.log_det(), &v.inverse()))
}

/// `∇_ν log q = ½log|Σ_q| − ½d log 2 − ½ψ_d(ν/2) − ½log|V|` and
/// `∇_Σ log q = ½νΣ_q⁻¹ − ½V⁻¹`.
pub fn inverse_wishart_score<T: Scalar>(
    params: &WishartVariationalParams<T>,
    v: &SpdPoint<T>,
) -> Result<(T, DMatrix<T>)> {
    if v.dim() != params.dim() {
        return Err(Error::dims(params.dim(), v.dim()));
    }
    let family = InverseWishartFamily::new(params.clone())?;
    let draw = IwDraw {
        v: v.clone(),
        v_inv: v.inverse(),
    };
    Ok(family.score_parts(&draw))
}

/// Splits a flat Wishart vector into `(ν part, symmetric Σ part)`.
pub fn split_wishart_flat<T: Scalar>(flat: &DVector<T>, d: usize) -> Result<(T, DMatrix<T>)> {
    if flat.len() != 1 + d * (d + 1) / 2 {
        return Err(Error::dims(1 + d * (d + 1) / 2, flat.len()));
    }
    let tri: Vec<T> = flat.iter().skip(1).copied().collect();
    Ok((flat[0], linalg::from_upper_triangle(&tri, d)?))
}

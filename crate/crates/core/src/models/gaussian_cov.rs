use nalgebra::DMatrix;

use super::LogJoint;
use crate::estimation::InverseWishartFamily;
use crate::linalg::{self, symmetrize};
use crate::manifold::SpdPoint;
use crate::natural_gradient::special::ln_multigamma;
use crate::natural_gradient::WishartVariationalParams;
use crate::{Error, Result, Scalar};

/// Zero-mean Gaussian observations with an inverse-Wishart(`ν₀`, `S₀`)
/// prior on the covariance. Only the scatter matrix `Σ yyᵀ` is kept.
#[derive(Debug, Clone)]
pub struct GaussianCovModel<T: Scalar> {
    scatter: DMatrix<T>,
    n: usize,
    prior: InverseWishartFamily<T>,
}

fn scatter<T: Scalar>(y: &DMatrix<T>) -> DMatrix<T> {
    symmetrize(&(y.transpose() * y))
}

impl<T: Scalar> GaussianCovModel<T> {
    /// `y` holds one observation per row.
    pub fn new(y: &DMatrix<T>, nu0: T, s0: SpdPoint<T>) -> Result<Self> {
        if y.ncols() != s0.dim() {
            return Err(Error::dims(s0.dim(), y.ncols()));
        }
        Self::from_scatter(scatter(y), y.nrows(), nu0, s0)
    }

    pub fn from_scatter(scatter: DMatrix<T>, n: usize, nu0: T, s0: SpdPoint<T>) -> Result<Self> {
        linalg::require_shape(&scatter, s0.dim(), s0.dim())?;
        let prior = InverseWishartFamily::new(WishartVariationalParams::new(nu0, s0)?)?;
        Ok(Self { scatter, n, prior })
    }

    pub fn scatter(&self) -> &DMatrix<T> {
        &self.scatter
    }

    pub fn n_observations(&self) -> usize {
        self.n
    }

    pub fn prior(&self) -> &WishartVariationalParams<T> {
        self.prior.params()
    }

    /// The conjugate posterior `IW(ν₀ + n, S₀ + Σ yyᵀ)`.
    pub fn posterior(&self) -> Result<WishartVariationalParams<T>> {
        let p = self.prior.params();
        WishartVariationalParams::new(
            p.nu + T::from_count(self.n),
            SpdPoint::from_symmetrized(p.sigma_q.matrix() + &self.scatter)?,
        )
    }

    pub fn log_marginal_likelihood(&self) -> Result<T> {
        let p = self.prior.params();
        marginal_from_scatter(&self.scatter, self.n, p.nu, &p.sigma_q)
    }
}

impl<T: Scalar> LogJoint<T, SpdPoint<T>> for GaussianCovModel<T> {
    fn parameter_dimension(&self) -> usize {
        self.scatter.nrows()
    }

    fn log_joint(&self, v: &SpdPoint<T>) -> Result<T> {
        if v.dim() != self.scatter.nrows() {
            return Err(Error::dims(self.scatter.nrows(), v.dim()));
        }
        let v_inv = v.inverse();
        let log_det = v.log_det();
        let n = T::from_count(self.n);
        let d = T::from_count(v.dim());
        let ll = -T::c(0.5) * (n * d * T::two_pi().ln() + n * log_det + linalg::frob_inner(&self.scatter, &v_inv));
        Ok(ll + self.prior.log_density_with(log_det, &v_inv))
    }

    fn description(&self) -> String {
        format!(
            "zero-mean Gaussian, d = {}, n = {}, inverse-Wishart prior with nu0 = {}",
            self.scatter.nrows(),
            self.n,
            self.prior.params().nu.to_f64()
        )
    }
}

/// `Σ_i log N(y_i; 0, V) + log IW(V; ν₀, S₀)`.
pub fn gaussian_cov_log_joint<T: Scalar>(v: &SpdPoint<T>, y: &DMatrix<T>, nu0: T, s0: &SpdPoint<T>) -> Result<T> {
    GaussianCovModel::new(y, nu0, s0.clone())?.log_joint(v)
}

pub fn exact_iw_posterior<T: Scalar>(nu0: T, s0: &SpdPoint<T>, y: &DMatrix<T>) -> Result<WishartVariationalParams<T>> {
    GaussianCovModel::new(y, nu0, s0.clone())?.posterior()
}

/// `log p(y)` in closed form.
pub fn iw_log_marginal_likelihood<T: Scalar>(nu0: T, s0: &SpdPoint<T>, y: &DMatrix<T>) -> Result<T> {
    if y.ncols() != s0.dim() {
        return Err(Error::dims(s0.dim(), y.ncols()));
    }
    marginal_from_scatter(&scatter(y), y.nrows(), nu0, s0)
}

fn marginal_from_scatter<T: Scalar>(scatter: &DMatrix<T>, n: usize, nu0: T, s0: &SpdPoint<T>) -> Result<T> {
    let d = s0.dim();
    let nt = T::from_count(n);
    let nu_n = nu0 + nt;
    let s_n = SpdPoint::from_symmetrized(s0.matrix() + scatter)?;
    let half = T::c(0.5);
    Ok(-half * nt * T::from_count(d) * T::pi().ln() + ln_multigamma(d, half * nu_n)?
        - ln_multigamma(d, half * nu0)?
        + half * nu0 * s0.log_det()
        - half * nu_n * s_n.log_det())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{generate_synthetic, SyntheticSpec};
    use crate::natural_gradient::special::ln_gamma;
    use approx::assert_relative_eq;
    use nalgebra::dmatrix;

    #[test]
    fn hand_case_d1() {
        // y = (1, 2), V = 2, ν₀ = 3, S₀ = 1
        let y = dmatrix![1.0; 2.0];
        let v = SpdPoint::new(dmatrix![2.0]).unwrap();
        let s0 = SpdPoint::new(dmatrix![1.0]).unwrap();
        let lj = gaussian_cov_log_joint(&v, &y, 3.0, &s0).unwrap();
        let ll = -(2.0 * std::f64::consts::PI * 2.0).ln() - 5.0 / 4.0;
        // inverse-gamma(3/2, 1/2) density at 2
        let prior = 1.5 * 0.5f64.ln() - ln_gamma(1.5).unwrap() - 2.5 * 2.0f64.ln() - 0.25;
        assert_relative_eq!(lj, ll + prior, epsilon = 1e-12);
    }

    #[test]
    fn hand_case_single_zero_observation() {
        // d = n = 1, V = 1, y = 0, ν₀ = 1, S₀ = 0.01
        let v = SpdPoint::new(dmatrix![1.0]).unwrap();
        let s0 = SpdPoint::new(dmatrix![0.01]).unwrap();
        let lj = gaussian_cov_log_joint(&v, &dmatrix![0.0], 1.0, &s0).unwrap();
        let normal = -0.5 * (2.0 * std::f64::consts::PI).ln();
        let inv_gamma = 0.5 * 0.005f64.ln() - ln_gamma(0.5).unwrap() - 0.005;
        assert_relative_eq!(lj, normal + inv_gamma, epsilon = 1e-12);
    }

    #[test]
    fn no_data_returns_prior() {
        let s0 = SpdPoint::scaled_identity(2, 0.01).unwrap();
        let post = exact_iw_posterior(2.0, &s0, &DMatrix::zeros(0, 2)).unwrap();
        assert_eq!(post.nu, 2.0);
        assert_eq!(post.sigma_q, s0);
        let post = exact_iw_posterior(2.0, &s0, &dmatrix![1.0, 0.0; 0.0, 1.0; 1.0, 1.0]).unwrap();
        assert_eq!(post.nu, 5.0);
    }

    #[test]
    fn scale_update_hand_case() {
        let s0 = SpdPoint::new(dmatrix![0.01]).unwrap();
        let post = exact_iw_posterior(1.0, &s0, &dmatrix![1.0; 2.0]).unwrap();
        assert_relative_eq!(post.sigma_q.matrix()[(0, 0)], 5.01, epsilon = 1e-14);
    }

    #[test]
    fn posterior_update_d1() {
        let y = dmatrix![1.0; -2.0; 0.5];
        let s0 = SpdPoint::new(dmatrix![2.0]).unwrap();
        let post = exact_iw_posterior(4.0, &s0, &y).unwrap();
        assert_relative_eq!(post.nu, 7.0);
        assert_relative_eq!(post.sigma_q.matrix()[(0, 0)], 2.0 + 1.0 + 4.0 + 0.25);
    }

    /// `log p(y) = log p(y, V) − log p(V | y)` at arbitrary `V`.
    #[test]
    fn marginal_matches_candidate_identity() {
        let ds = generate_synthetic(&SyntheticSpec::GaussianCov { d: 3 }, 12, 8).unwrap();
        let y = ds.observations;
        let s0 = SpdPoint::scaled_identity(3, 2.0).unwrap();
        let model = GaussianCovModel::new(&y, 5.0, s0.clone()).unwrap();
        let post = InverseWishartFamily::new(model.posterior().unwrap()).unwrap();
        for v in [SpdPoint::identity(3), SpdPoint::new(dmatrix![2.0, 0.3, 0.0; 0.3, 1.0, -0.2; 0.0, -0.2, 0.7]).unwrap()]
        {
            let implied = model.log_joint(&v).unwrap() - post.log_density_with(v.log_det(), &v.inverse());
            assert_relative_eq!(implied, model.log_marginal_likelihood().unwrap(), epsilon = 1e-10);
        }
        assert_relative_eq!(
            iw_log_marginal_likelihood(5.0, &s0, &y).unwrap(),
            model.log_marginal_likelihood().unwrap(),
            epsilon = 1e-12
        );
    }

    /// Quadrature in `d = 1`: `∫ p(y, V) dV` over a log grid.
    #[test]
    fn marginal_by_quadrature_d1() {
        let y = dmatrix![0.4; -1.1; 2.0; 0.3];
        let s0 = SpdPoint::new(dmatrix![1.5]).unwrap();
        let model = GaussianCovModel::new(&y, 3.0, s0.clone()).unwrap();
        let k = 20000;
        let (lo, hi) = (-8.0f64, 8.0f64);
        let h = (hi - lo) / k as f64;
        let mut total = 0.0;
        for i in 0..k {
            let u = lo + (i as f64 + 0.5) * h;
            let v = SpdPoint::new(dmatrix![u.exp()]).unwrap();
            total += (model.log_joint(&v).unwrap() + u).exp() * h;
        }
        assert_relative_eq!(total.ln(), iw_log_marginal_likelihood(3.0, &s0, &y).unwrap(), epsilon = 1e-8);
    }

    #[test]
    fn permutation_invariant() {
        let ds = generate_synthetic(&SyntheticSpec::GaussianCov { d: 2 }, 6, 1).unwrap();
        let y = ds.observations;
        let mut rev = y.clone();
        for i in 0..y.nrows() {
            rev.set_row(i, &y.row(y.nrows() - 1 - i));
        }
        let s0 = SpdPoint::identity(2);
        let v = SpdPoint::new(dmatrix![1.3, 0.2; 0.2, 0.8]).unwrap();
        assert_relative_eq!(
            gaussian_cov_log_joint(&v, &y, 4.0, &s0).unwrap(),
            gaussian_cov_log_joint(&v, &rev, 4.0, &s0).unwrap(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn rejects_bad_prior() {
        let y = dmatrix![1.0, 2.0];
        assert!(GaussianCovModel::new(&y, 0.5, SpdPoint::identity(2)).is_err());
        assert!(GaussianCovModel::new(&y, 5.0, SpdPoint::identity(3)).is_err());
    }
}

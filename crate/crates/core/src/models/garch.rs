use nalgebra::DVector;

use super::LogJoint;
use crate::linalg::log1p_exp;
use crate::{Error, Result, Scalar};

/// GARCH(1,1) parameters in the stationary parameterization
/// `α = ψ₁(1−ψ₂)`, `β = ψ₁ψ₂` with `ψ₁, ψ₂ ∈ (0, 1)`, so `α + β = ψ₁ < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GarchParams<T> {
    pub w: T,
    pub psi1: T,
    pub psi2: T,
}

fn logistic<T: Scalar>(x: T) -> T {
    if x >= T::zero() {
        T::one() / (T::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (T::one() + e)
    }
}

impl<T: Scalar> GarchParams<T> {
    pub fn from_alpha_beta(w: T, alpha: T, beta: T) -> Result<Self> {
        let psi1 = alpha + beta;
        if !(w > T::zero() && alpha > T::zero() && beta > T::zero() && psi1 < T::one()) {
            return Err(Error::Model("need w > 0, alpha > 0, beta > 0, alpha + beta < 1".into()));
        }
        Ok(Self {
            w,
            psi1,
            psi2: beta / psi1,
        })
    }

    pub fn alpha(&self) -> T {
        self.psi1 * (T::one() - self.psi2)
    }

    pub fn beta(&self) -> T {
        self.psi1 * self.psi2
    }

    /// `(log w, logit ψ₁, logit ψ₂)`.
    pub fn to_unconstrained(&self) -> DVector<T> {
        let logit = |p: T| (p / (T::one() - p)).ln();
        DVector::from_column_slice(&[self.w.ln(), logit(self.psi1), logit(self.psi2)])
    }

    pub fn from_unconstrained(theta: &DVector<T>) -> Result<Self> {
        if theta.len() != 3 {
            return Err(Error::dims(3, theta.len()));
        }
        Ok(Self {
            w: theta[0].exp(),
            psi1: logistic(theta[1]),
            psi2: logistic(theta[2]),
        })
    }
}

/// `σ_t² = w + α σ_{t−1}² + β y_{t−1}²`, starting from `σ₁²`.
pub fn garch_variances<T: Scalar>(y: &[T], w: T, alpha: T, beta: T, initial: T) -> Vec<T> {
    let mut out = Vec::with_capacity(y.len());
    let mut s2 = initial;
    for t in 0..y.len() {
        if t > 0 {
            s2 = w + alpha * s2 + beta * y[t - 1] * y[t - 1];
        }
        out.push(s2);
    }
    out
}

/// Inverse-gamma prior `IG(shape, scale)` on `w`; `ψ₁, ψ₂` are uniform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GarchPrior<T> {
    pub shape: T,
    pub scale: T,
}

impl<T: Scalar> Default for GarchPrior<T> {
    fn default() -> Self {
        Self {
            shape: T::one(),
            scale: T::one(),
        }
    }
}

impl<T: Scalar> GarchPrior<T> {
    pub fn new(shape: T, scale: T) -> Result<Self> {
        if !(shape > T::zero() && scale > T::zero()) {
            return Err(Error::Model("inverse-gamma prior needs shape > 0 and scale > 0".into()));
        }
        Ok(Self { shape, scale })
    }

    /// `log p(w)` at `w = exp(θ_w)`.
    fn log_density(&self, theta_w: T, w: T) -> Result<T> {
        let norm = self.shape * self.scale.ln() - crate::natural_gradient::special::ln_gamma(self.shape)?;
        Ok(norm - (self.shape + T::one()) * theta_w - self.scale / w)
    }
}

/// Gaussian GARCH(1,1) log-likelihood with the default `IG(1,1)` prior on
/// `w`, uniform priors on `ψ₁, ψ₂`, plus the log-Jacobian of the map to
/// `(log w, logit ψ₁, logit ψ₂)`.
pub fn garch_log_joint<T: Scalar>(theta: &DVector<T>, y: &[T], initial_variance: T) -> Result<T> {
    garch_log_joint_with_prior(theta, y, initial_variance, &GarchPrior::default())
}

pub fn garch_log_joint_with_prior<T: Scalar>(
    theta: &DVector<T>,
    y: &[T],
    initial_variance: T,
    prior: &GarchPrior<T>,
) -> Result<T> {
    if y.len() < 2 {
        return Err(Error::Model("GARCH needs at least two observations".into()));
    }
    let p = GarchParams::from_unconstrained(theta)?;
    let variances = garch_variances(y, p.w, p.alpha(), p.beta(), initial_variance);
    let ln_2pi = T::two_pi().ln();
    let mut ll = T::zero();
    for (&s2, &yt) in variances.iter().zip(y) {
        ll -= T::c(0.5) * (ln_2pi + s2.ln() + yt * yt / s2);
    }
    let log_prior = prior.log_density(theta[0], p.w)?;
    // log w + log ψ(1−ψ) for each logit coordinate
    let log_jac = theta[0] - log1p_exp(-theta[1]) - log1p_exp(theta[1]) - log1p_exp(-theta[2]) - log1p_exp(theta[2]);
    let total = ll + log_prior + log_jac;
    if !total.is_finite_val() {
        return Err(Error::Model(format!(
            "non-finite GARCH log-joint at theta = {:?}",
            theta.iter().map(|v| v.to_f64()).collect::<Vec<_>>()
        )));
    }
    Ok(total)
}

/// GARCH(1,1) on unconstrained parameters `(log w, logit ψ₁, logit ψ₂)`.
#[derive(Debug, Clone)]
pub struct GarchModel<T: Scalar> {
    y: Vec<T>,
    initial_variance: T,
    prior: GarchPrior<T>,
}

impl<T: Scalar> GarchModel<T> {
    /// Starts the recursion at the sample variance of `y`.
    pub fn new(y: Vec<T>) -> Result<Self> {
        if y.len() < 2 {
            return Err(Error::Model("GARCH needs at least two observations".into()));
        }
        let n = T::from_count(y.len());
        let mean = y.iter().fold(T::zero(), |s, &v| s + v) / n;
        let var = y.iter().fold(T::zero(), |s, &v| s + (v - mean) * (v - mean)) / (n - T::one());
        Self::with_initial_variance(y, var)
    }

    pub fn with_initial_variance(y: Vec<T>, initial_variance: T) -> Result<Self> {
        if y.len() < 2 {
            return Err(Error::Model("GARCH needs at least two observations".into()));
        }
        if !(initial_variance > T::zero()) {
            return Err(Error::range("initial_variance", initial_variance.to_f64(), "> 0"));
        }
        Ok(Self {
            y,
            initial_variance,
            prior: GarchPrior::default(),
        })
    }

    pub fn with_prior(self, prior: GarchPrior<T>) -> Self {
        Self { prior, ..self }
    }

    pub fn prior(&self) -> &GarchPrior<T> {
        &self.prior
    }

    pub fn observations(&self) -> &[T] {
        &self.y
    }

    pub fn initial_variance(&self) -> T {
        self.initial_variance
    }
}

impl<T: Scalar> LogJoint<T, DVector<T>> for GarchModel<T> {
    fn parameter_dimension(&self) -> usize {
        3
    }

    fn log_joint(&self, theta: &DVector<T>) -> Result<T> {
        garch_log_joint_with_prior(theta, &self.y, self.initial_variance, &self.prior)
    }

    fn description(&self) -> String {
        format!("GARCH(1,1): n = {}, sigma_1^2 = {}", self.y.len(), self.initial_variance.to_f64())
    }
}

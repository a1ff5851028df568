//! Log-gamma, digamma and trigamma, scalar and multivariate.
//!
//! Arguments are shifted above 10 with the usual recurrences, then the
//! Stirling/asymptotic series is summed. Relative accuracy is better than
//! `1e-13` in `f64` for positive arguments.

use crate::{Error, Result, Scalar};

const SHIFT: f64 = 10.0;

fn check_positive<T: Scalar>(x: T) -> Result<()> {
    if x > T::zero() && x.is_finite_val() {
        Ok(())
    } else {
        Err(Error::Pole(x.to_f64()))
    }
}

/// `log Γ(x)` for `x > 0`.
pub fn ln_gamma<T: Scalar>(x: T) -> Result<T> {
    check_positive(x)?;
    let shift = T::c(SHIFT);
    let mut acc = T::zero();
    let mut z = x;
    while z < shift {
        acc += z.ln();
        z += T::one();
    }
    let zi = T::one() / z;
    let zi2 = zi * zi;
    let series = zi
        * (T::c(1.0 / 12.0)
            + zi2
                * (T::c(-1.0 / 360.0)
                    + zi2
                        * (T::c(1.0 / 1260.0)
                            + zi2 * (T::c(-1.0 / 1680.0)
                                + zi2 * (T::c(1.0 / 1188.0)
                                    + zi2 * (T::c(-691.0 / 360360.0) + zi2 * T::c(1.0 / 156.0)))))));
    let half_ln_2pi = T::c(0.918_938_533_204_672_7);
    Ok((z - T::c(0.5)) * z.ln() - z + half_ln_2pi + series - acc)
}

/// `ψ(x) = d/dx log Γ(x)` for `x > 0`.
pub fn digamma<T: Scalar>(x: T) -> Result<T> {
    check_positive(x)?;
    let shift = T::c(SHIFT);
    let mut acc = T::zero();
    let mut z = x;
    while z < shift {
        acc += T::one() / z;
        z += T::one();
    }
    let zi = T::one() / z;
    let zi2 = zi * zi;
    let series = zi2
        * (T::c(1.0 / 12.0)
            - zi2
                * (T::c(1.0 / 120.0)
                    - zi2 * (T::c(1.0 / 252.0) - zi2 * (T::c(1.0 / 240.0)
                            - zi2 * (T::c(1.0 / 132.0) - zi2 * T::c(691.0 / 32760.0))))));
    Ok(z.ln() - T::c(0.5) * zi - series - acc)
}

/// `ψ′(x)` for `x > 0`.
pub fn trigamma<T: Scalar>(x: T) -> Result<T> {
    check_positive(x)?;
    let shift = T::c(SHIFT);
    let mut acc = T::zero();
    let mut z = x;
    while z < shift {
        acc += T::one() / (z * z);
        z += T::one();
    }
    let zi = T::one() / z;
    let zi2 = zi * zi;
    let series = zi
        * (T::one()
            + zi * T::c(0.5)
            + zi2
                * (T::c(1.0 / 6.0)
                    - zi2
                        * (T::c(1.0 / 30.0)
                            - zi2 * (T::c(1.0 / 42.0) - zi2 * (T::c(1.0 / 30.0)
                                    - zi2 * (T::c(5.0 / 66.0) - zi2 * T::c(691.0 / 2730.0)))))));
    Ok(series + acc)
}

/// `(log Γ_d(ν), ψ_d(ν), ψ′_d(ν))`, the multivariate gamma function and its
/// first two log-derivatives. Requires `ν > (d−1)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultivariateSpecial<T> {
    pub ln_gamma: T,
    pub digamma: T,
    pub trigamma: T,
}

pub fn multivariate_special<T: Scalar>(d: usize, nu: T) -> Result<MultivariateSpecial<T>> {
    if d == 0 {
        return Err(Error::range("d", 0.0, "d >= 1"));
    }
    let lower = T::c((d as f64 - 1.0) / 2.0);
    if !(nu > lower) {
        return Err(Error::Pole(nu.to_f64()));
    }
    let df = d as f64;
    let mut out = MultivariateSpecial {
        ln_gamma: T::c(df * (df - 1.0) / 4.0 * std::f64::consts::PI.ln()),
        digamma: T::zero(),
        trigamma: T::zero(),
    };
    for j in 0..d {
        let a = nu - T::c(j as f64 / 2.0);
        out.ln_gamma += ln_gamma(a)?;
        out.digamma += digamma(a)?;
        out.trigamma += trigamma(a)?;
    }
    Ok(out)
}

pub fn ln_multigamma<T: Scalar>(d: usize, nu: T) -> Result<T> {
    multivariate_special(d, nu).map(|m| m.ln_gamma)
}

pub fn multi_digamma<T: Scalar>(d: usize, nu: T) -> Result<T> {
    multivariate_special(d, nu).map(|m| m.digamma)
}

pub fn multi_trigamma<T: Scalar>(d: usize, nu: T) -> Result<T> {
    multivariate_special(d, nu).map(|m| m.trigamma)
}

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use super::Dataset;
use crate::linalg;
use crate::rng::{standard_normal, substream};
use crate::{Error, Result};

/// Generators for the synthetic benchmark datasets.
#[derive(Debug, Clone, PartialEq)]
pub enum SyntheticSpec {
    /// Zero-mean Gaussian with `V_ij = (−0.5)^|i−j|`; columns `y1..yd`.
    GaussianCov { d: usize },
    /// GARCH(1,1) started at its unconditional variance; column `y`.
    Garch { w: f64, alpha: f64, beta: f64 },
    /// Standard normal predictors `x1..xd` and a Bernoulli-logit response
    /// `y`. `beta` includes the intercept first when `intercept` is set;
    /// when absent, coefficients are drawn as `N(0, 1/d)`.
    Logistic {
        d: usize,
        intercept: bool,
        beta: Option<Vec<f64>>,
    },
}

pub fn true_covariance(d: usize) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |i, j| (-0.5f64).powi(i.abs_diff(j) as i32))
}

fn names(prefix: &str, d: usize) -> Vec<String> {
    (1..=d).map(|i| format!("{prefix}{i}")).collect()
}

/// `n` rows of data. Row `i` uses RNG substream `i`, so a prefix of a
/// longer dataset is the shorter dataset (except for GARCH, which is
/// sequential and uses a single stream).
pub fn generate_synthetic(spec: &SyntheticSpec, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::Config("need at least one row".into()));
    }
    match spec {
        SyntheticSpec::GaussianCov { d } => {
            if *d == 0 {
                return Err(Error::Config("d must be positive".into()));
            }
            let chol = linalg::cholesky_lower(&true_covariance(*d))?;
            let mut out = DMatrix::zeros(n, *d);
            for i in 0..n {
                let mut rng = substream(seed, 0, i as u64);
                let z = DVector::from_fn(*d, |_, _| standard_normal::<f64, _>(&mut rng));
                out.set_row(i, &(&chol * z).transpose());
            }
            Dataset::new(out, names("y", *d))
        }
        SyntheticSpec::Garch { w, alpha, beta } => {
            if !(*w > 0.0 && *alpha >= 0.0 && *beta >= 0.0 && alpha + beta < 1.0) {
                return Err(Error::Config("GARCH needs w > 0, alpha, beta >= 0, alpha + beta < 1".into()));
            }
            let mut rng = substream(seed, 0, 0);
            let mut s2 = w / (1.0 - alpha - beta);
            let mut y = DMatrix::zeros(n, 1);
            for t in 0..n {
                if t > 0 {
                    s2 = w + alpha * s2 + beta * y[(t - 1, 0)] * y[(t - 1, 0)];
                }
                y[(t, 0)] = s2.sqrt() * standard_normal::<f64, _>(&mut rng);
            }
            Dataset::new(y, vec!["y".into()])
        }
        SyntheticSpec::Logistic { d, intercept, beta } => {
            let p = d + usize::from(*intercept);
            let coef = match beta {
                Some(b) if b.len() != p => return Err(Error::dims(p, b.len())),
                Some(b) => DVector::from_column_slice(b),
                None => {
                    let mut rng = substream(seed, 1, 0);
                    let sd = 1.0 / (*d as f64).sqrt();
                    DVector::from_fn(p, |_, _| sd * standard_normal::<f64, _>(&mut rng))
                }
            };
            let mut out = DMatrix::zeros(n, d + 1);
            for i in 0..n {
                let mut rng = substream(seed, 0, i as u64);
                let mut eta = if *intercept { coef[0] } else { 0.0 };
                for j in 0..*d {
                    let x = standard_normal::<f64, _>(&mut rng);
                    out[(i, j)] = x;
                    eta += coef[j + usize::from(*intercept)] * x;
                }
                let prob = 1.0 / (1.0 + (-eta).exp());
                out[(i, *d)] = if rng.random::<f64>() < prob { 1.0 } else { 0.0 };
            }
            let mut cols = names("x", *d);
            cols.push("y".into());
            Dataset::new(out, cols)
        }
    }
}

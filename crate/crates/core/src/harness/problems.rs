use nalgebra::DMatrix;

use super::RateProblem;
use crate::linalg::{spd_inv_sqrt, spd_log, spd_sqrt, symmetrize};
use crate::manifold::{spd_retract, spd_transport, SpdPoint, SpdTangent};
use crate::Result;

/// `ℒ(λ) = ½|λ − λ*|²` on `ℝᵏ`.
#[derive(Debug, Clone)]
pub struct QuadraticProblem {
    target: DMatrix<f64>,
    start: DMatrix<f64>,
}

impl QuadraticProblem {
    pub fn new(target: Vec<f64>, start: Vec<f64>) -> Self {
        assert_eq!(target.len(), start.len(), "target and start must have the same length");
        Self {
            target: DMatrix::from_vec(target.len(), 1, target),
            start: DMatrix::from_vec(start.len(), 1, start),
        }
    }
}

impl RateProblem for QuadraticProblem {
    fn initial(&self) -> DMatrix<f64> {
        self.start.clone()
    }

    fn gradient(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        Ok(x - &self.target)
    }

    fn project(&self, _x: &DMatrix<f64>, v: DMatrix<f64>) -> DMatrix<f64> {
        v
    }

    fn retract(&self, x: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        Ok(x + v)
    }

    fn transport(&self, _from: &DMatrix<f64>, _to: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        Ok(v.clone())
    }

    fn norm_sq(&self, _x: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
        v.norm_squared()
    }

    fn distance_sq(&self, x: &DMatrix<f64>) -> f64 {
        (x - &self.target).norm_squared()
    }
}

/// `ℒ(Σ) = ½|log(Σ*^{−1/2} Σ Σ*^{−1/2})|²_F` on the SPD manifold with the
/// affine-invariant metric, so that the Riemannian gradient is
/// `Σ^{1/2} log(Σ^{1/2} Σ*⁻¹ Σ^{1/2}) Σ^{1/2}` and `|∇ℒ|² = 2ℒ`.
#[derive(Debug, Clone)]
pub struct SpdLogProblem {
    target_inv: DMatrix<f64>,
    target_inv_sqrt: DMatrix<f64>,
    start: DMatrix<f64>,
}

impl SpdLogProblem {
    pub fn new(target: &SpdPoint<f64>, start: &SpdPoint<f64>) -> Result<Self> {
        Ok(Self {
            target_inv: target.inverse(),
            target_inv_sqrt: spd_inv_sqrt(target.matrix())?,
            start: start.matrix().clone(),
        })
    }

    /// `Σ*` with entries `0.5^|i−j|` plus `I`, started from `I`.
    pub fn default_problem(d: usize) -> Self {
        let target = DMatrix::from_fn(d, d, |i, j| 0.5f64.powi(i.abs_diff(j) as i32) + if i == j { 1.0 } else { 0.0 });
        Self::new(&SpdPoint::new(target).expect("diagonally dominant"), &SpdPoint::identity(d)).expect("SPD target")
    }

    pub fn cost(&self, x: &DMatrix<f64>) -> Result<f64> {
        let inner = &self.target_inv_sqrt * x * &self.target_inv_sqrt;
        Ok(0.5 * spd_log(&inner)?.norm_squared())
    }
}

fn point(x: &DMatrix<f64>) -> Result<SpdPoint<f64>> {
    SpdPoint::from_symmetrized(x.clone())
}

impl RateProblem for SpdLogProblem {
    fn initial(&self) -> DMatrix<f64> {
        self.start.clone()
    }

    fn gradient(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let half = spd_sqrt(x)?;
        let inner = spd_log(&(&half * &self.target_inv * &half))?;
        Ok(symmetrize(&(&half * inner * &half)))
    }

    fn project(&self, _x: &DMatrix<f64>, v: DMatrix<f64>) -> DMatrix<f64> {
        symmetrize(&v)
    }

    fn retract(&self, x: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let p = point(x)?;
        Ok(spd_retract(&p, &SpdTangent::from_symmetrized(&p, v.clone())?)?.into_matrix())
    }

    fn transport(&self, from: &DMatrix<f64>, to: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let (a, b) = (point(from)?, point(to)?);
        Ok(spd_transport(&a, &b, &SpdTangent::from_symmetrized(&a, v.clone())?)?.matrix().clone())
    }

    fn norm_sq(&self, x: &DMatrix<f64>, v: &DMatrix<f64>) -> f64 {
        match point(x) {
            Ok(p) => {
                let w = p.solve(v);
                (&w * &w).trace()
            }
            Err(_) => f64::INFINITY,
        }
    }

    fn distance_sq(&self, x: &DMatrix<f64>) -> f64 {
        self.cost(x).map(|c| 2.0 * c).unwrap_or(f64::INFINITY)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn gradient_norm_is_twice_cost() {
        let p = SpdLogProblem::default_problem(3);
        let x = DMatrix::from_row_slice(3, 3, &[2.0, 0.1, 0.0, 0.1, 0.7, 0.2, 0.0, 0.2, 1.4]);
        let g = p.gradient(&x).unwrap();
        assert_relative_eq!(p.norm_sq(&x, &g), 2.0 * p.cost(&x).unwrap(), epsilon = 1e-10);
    }

    /// `d/dt ℒ(R_Σ(tξ))` at 0 equals `⟨grad, ξ⟩_Σ`.
    #[test]
    fn gradient_matches_directional_derivative() {
        let p = SpdLogProblem::default_problem(3);
        let x = DMatrix::from_row_slice(3, 3, &[2.0, 0.1, 0.0, 0.1, 0.7, 0.2, 0.0, 0.2, 1.4]);
        let xi = DMatrix::from_row_slice(3, 3, &[0.3, -0.1, 0.2, -0.1, 0.5, 0.0, 0.2, 0.0, -0.4]);
        let h = 1e-5;
        let plus = p.cost(&p.retract(&x, &(&xi * h)).unwrap()).unwrap();
        let minus = p.cost(&p.retract(&x, &(&xi * -h)).unwrap()).unwrap();
        let fd = (plus - minus) / (2.0 * h);
        let sp = point(&x).unwrap();
        let g = p.gradient(&x).unwrap();
        let pairing = (sp.solve(&g) * sp.solve(&xi)).trace();
        assert_relative_eq!(fd, pairing, epsilon = 1e-7);
    }

    #[test]
    fn minimiser_has_zero_gradient() {
        let target = SpdPoint::new(DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0])).unwrap();
        let p = SpdLogProblem::new(&target, &SpdPoint::identity(2)).unwrap();
        assert!(p.gradient(target.matrix()).unwrap().amax() < 1e-12);
        assert!(p.distance_sq(target.matrix()) < 1e-24);
    }
}

use nalgebra::DMatrix;
use rand::Rng;

use crate::linalg::{self, symmetrize};
use crate::rng::standard_normal;
use crate::{Error, Result, Scalar};

/// A symmetric positive definite matrix.
///
/// The lower Cholesky factor is computed on construction (it is the
/// positive-definiteness check) and kept for later solves.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdPoint<T: Scalar> {
    matrix: DMatrix<T>,
    chol: DMatrix<T>,
}

impl<T: Scalar> SpdPoint<T> {
    /// Validates symmetry (relative `1e-12`) and positive definiteness.
    pub fn new(matrix: DMatrix<T>) -> Result<Self> {
        linalg::require_square(&matrix)?;
        let scale = linalg::max_abs(&matrix);
        let asym = linalg::max_asymmetry(&matrix);
        if asym > T::c(1e-12) * scale {
            return Err(Error::NotSymmetric(asym.to_f64()));
        }
        let chol = linalg::cholesky_lower(&matrix)?;
        Ok(Self { matrix, chol })
    }

    /// Symmetrizes `(A + Aᵀ)/2` first, then validates.
    pub fn from_symmetrized(matrix: DMatrix<T>) -> Result<Self> {
        linalg::require_square(&matrix)?;
        Self::new(symmetrize(&matrix))
    }

    pub fn identity(d: usize) -> Self {
        Self::new(DMatrix::identity(d, d)).expect("identity is SPD")
    }

    pub fn scaled_identity(d: usize, s: T) -> Result<Self> {
        Self::new(DMatrix::identity(d, d) * s)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<T> {
        self.matrix
    }

    /// Lower Cholesky factor `L` with `LLᵀ = Σ`.
    pub fn cholesky(&self) -> &DMatrix<T> {
        &self.chol
    }

    pub fn log_det(&self) -> T {
        linalg::log_det_from_cholesky(&self.chol)
    }

    /// `Σ⁻¹ B` via two triangular solves.
    pub fn solve(&self, b: &DMatrix<T>) -> DMatrix<T> {
        let y = self
            .chol
            .solve_lower_triangular(b)
            .expect("Cholesky factor has a positive diagonal");
        self.chol
            .tr_solve_lower_triangular(&y)
            .expect("Cholesky factor has a positive diagonal")
    }

    pub fn inverse(&self) -> DMatrix<T> {
        let d = self.dim();
        symmetrize(&self.solve(&DMatrix::identity(d, d)))
    }

    pub fn zero_tangent(&self) -> SpdTangent<T> {
        let d = self.dim();
        SpdTangent {
            matrix: DMatrix::zeros(d, d),
            base: self.clone(),
        }
    }
}

/// A symmetric tangent vector at an SPD point.
#[derive(Debug, Clone, PartialEq)]
pub struct SpdTangent<T: Scalar> {
    matrix: DMatrix<T>,
    base: SpdPoint<T>,
}

impl<T: Scalar> SpdTangent<T> {
    pub fn new(base: &SpdPoint<T>, matrix: DMatrix<T>) -> Result<Self> {
        linalg::require_shape(&matrix, base.dim(), base.dim())?;
        let scale = linalg::max_abs(&matrix);
        let asym = linalg::max_asymmetry(&matrix);
        if asym > T::c(1e-12) * scale {
            return Err(Error::NotSymmetric(asym.to_f64()));
        }
        Ok(Self {
            matrix,
            base: base.clone(),
        })
    }

    pub fn from_symmetrized(base: &SpdPoint<T>, matrix: DMatrix<T>) -> Result<Self> {
        linalg::require_shape(&matrix, base.dim(), base.dim())?;
        Self::new(base, symmetrize(&matrix))
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn base(&self) -> &SpdPoint<T> {
        &self.base
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            matrix: &self.matrix * s,
            base: self.base.clone(),
        }
    }

    /// `a·self + b·other`; both must share a base point.
    pub fn lincomb(&self, a: T, other: &Self, b: T) -> Result<Self> {
        if self.base != other.base {
            return Err(Error::BaseMismatch);
        }
        Ok(Self {
            matrix: &self.matrix * a + &other.matrix * b,
            base: self.base.clone(),
        })
    }

    pub fn frobenius_norm(&self) -> T {
        self.matrix.norm()
    }

    /// Norm under the affine-invariant metric `trace(Σ⁻¹ξΣ⁻¹ξ)`.
    pub fn affine_invariant_norm(&self) -> T {
        let a = self.base.solve(&self.matrix);
        linalg::frob_inner(&a, &a.transpose()).max(T::zero()).sqrt()
    }
}

/// Second-order retraction `Σ + ξ + ½ ξ Σ⁻¹ ξ`.
///
/// The exact result is always SPD; a failed Cholesky check on the computed
/// matrix is reported as [`Error::StepRejected`] so that callers can shrink
/// the step.
pub fn spd_retract<T: Scalar>(sigma: &SpdPoint<T>, xi: &SpdTangent<T>) -> Result<SpdPoint<T>> {
    if xi.base != *sigma {
        return Err(Error::BaseMismatch);
    }
    let x = xi.matrix();
    let correction = x * sigma.solve(x);
    let out = sigma.matrix() + x + correction * T::c(0.5);
    if out.iter().any(|v| !v.is_finite_val()) {
        return Err(Error::StepRejected);
    }
    match SpdPoint::from_symmetrized(out) {
        Ok(p) => Ok(p),
        Err(Error::NotPositiveDefinite) => Err(Error::StepRejected),
        Err(e) => Err(e),
    }
}

/// Vector transport `E ξ Eᵀ` with `E = (Σ₂Σ₁⁻¹)^{1/2}`.
///
/// `E` is formed as `Σ₁^{1/2} (Σ₁^{-1/2} Σ₂ Σ₁^{-1/2})^{1/2} Σ₁^{-1/2}`, which
/// only takes square roots of symmetric positive definite matrices.
pub fn spd_transport<T: Scalar>(
    from: &SpdPoint<T>,
    to: &SpdPoint<T>,
    xi: &SpdTangent<T>,
) -> Result<SpdTangent<T>> {
    if xi.base != *from {
        return Err(Error::BaseMismatch);
    }
    if from.dim() != to.dim() {
        return Err(Error::dims(from.dim(), to.dim()));
    }
    if from == to {
        return Ok(xi.clone());
    }
    let e = transport_factor(from, to)?;
    SpdTangent::from_symmetrized(to, &e * xi.matrix() * e.transpose())
}

/// The principal square root of `Σ₂Σ₁⁻¹`.
pub fn transport_factor<T: Scalar>(
    from: &SpdPoint<T>,
    to: &SpdPoint<T>,
) -> Result<DMatrix<T>> {
    let s1_half = linalg::spd_sqrt(from.matrix())?;
    let s1_inv_half = linalg::spd_inv_sqrt(from.matrix())?;
    let inner = &s1_inv_half * to.matrix() * &s1_inv_half;
    let inner_half = linalg::spd_sqrt(&inner)?;
    Ok(s1_half * inner_half * s1_inv_half)
}

/// A random SPD matrix `AAᵀ/d + shift·I` with standard normal `A`.
pub fn random_spd<T: Scalar, R: Rng + ?Sized>(d: usize, shift: T, rng: &mut R) -> SpdPoint<T> {
    let a = DMatrix::from_fn(d, d, |_, _| standard_normal::<T, _>(rng));
    let m = &a * a.transpose() / T::from_count(d) + DMatrix::identity(d, d) * shift;
    SpdPoint::from_symmetrized(m).expect("shifted Gram matrix is SPD")
}

use nalgebra::DMatrix;
use rand::Rng;

use super::orth_tol;
use crate::linalg;
use crate::rng::standard_normal;
use crate::{Error, Result, Scalar};

/// An `n×p` matrix with orthonormal columns, `p ≤ n`.
#[derive(Debug, Clone, PartialEq)]
pub struct StiefelPoint<T: Scalar> {
    matrix: DMatrix<T>,
}

impl<T: Scalar> StiefelPoint<T> {
    pub fn new(matrix: DMatrix<T>) -> Result<Self> {
        let (n, p) = matrix.shape();
        if p > n || p == 0 {
            return Err(Error::dims("n x p with 1 <= p <= n", format!("{n}x{p}")));
        }
        let residual = (matrix.transpose() * &matrix - DMatrix::identity(p, p)).abs().max();
        if residual > orth_tol() {
            return Err(Error::NotOrthonormal(residual.to_f64()));
        }
        Ok(Self { matrix })
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn shape(&self) -> (usize, usize) {
        self.matrix.shape()
    }
}

/// `Z` with `ZᵀW + WᵀZ = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StiefelTangent<T: Scalar> {
    matrix: DMatrix<T>,
    base: StiefelPoint<T>,
}

impl<T: Scalar> StiefelTangent<T> {
    pub fn new(base: &StiefelPoint<T>, matrix: DMatrix<T>) -> Result<Self> {
        let (n, p) = base.shape();
        linalg::require_shape(&matrix, n, p)?;
        let r = tangency_residual(base.matrix(), &matrix);
        if r > orth_tol::<T>() * (T::one() + matrix.abs().max()) {
            return Err(Error::NotTangent(r.to_f64()));
        }
        Ok(Self {
            matrix,
            base: base.clone(),
        })
    }

    pub fn zero(base: &StiefelPoint<T>) -> Self {
        let (n, p) = base.shape();
        Self {
            matrix: DMatrix::zeros(n, p),
            base: base.clone(),
        }
    }

    pub fn matrix(&self) -> &DMatrix<T> {
        &self.matrix
    }

    pub fn base(&self) -> &StiefelPoint<T> {
        &self.base
    }

    /// Euclidean metric `trace(ZᵀU)`.
    pub fn inner(&self, other: &Self) -> T {
        linalg::frob_inner(&self.matrix, &other.matrix)
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            matrix: &self.matrix * s,
            base: self.base.clone(),
        }
    }
}

pub(crate) fn tangency_residual<T: Scalar>(w: &DMatrix<T>, z: &DMatrix<T>) -> T {
    let wz = w.transpose() * z;
    (&wz + wz.transpose()).abs().max()
}

pub fn skew<T: Scalar>(a: &DMatrix<T>) -> DMatrix<T> {
    (a - a.transpose()) * T::c(0.5)
}

/// Riemannian gradient under the Euclidean metric from an ambient gradient:
/// `(I − WWᵀ)G + W skew(WᵀG)`.
pub fn stiefel_project<T: Scalar>(w: &StiefelPoint<T>, g: &DMatrix<T>) -> Result<StiefelTangent<T>> {
    let (n, p) = w.shape();
    linalg::require_shape(g, n, p)?;
    let wm = w.matrix();
    let wtg = wm.transpose() * g;
    let normal = wm * &wtg;
    let z = g - normal + wm * skew(&wtg);
    Ok(StiefelTangent {
        matrix: z,
        base: w.clone(),
    })
}

/// QR retraction `qf(W + ξ)` with the positive-diagonal convention on `R`.
pub fn stiefel_retract_qr<T: Scalar>(
    w: &StiefelPoint<T>,
    xi: &StiefelTangent<T>,
) -> Result<StiefelPoint<T>> {
    if xi.base != *w {
        return Err(Error::BaseMismatch);
    }
    if xi.matrix().iter().all(|v| *v == T::zero()) {
        return Ok(w.clone());
    }
    let a = w.matrix() + xi.matrix();
    let p = a.ncols();
    let qr = a.clone().qr();
    let mut q = qr.q();
    let r = qr.r();
    let scale = a.abs().max().max(T::one());
    for j in 0..p {
        let rjj = r[(j, j)];
        if !(rjj.abs() > T::c(1e-12).max(T::eps() * T::c(100.0)) * scale) {
            return Err(Error::Numerical("rank-deficient W + ξ in QR retraction".into()));
        }
        if rjj < T::zero() {
            q.column_mut(j).neg_mut();
        }
    }
    Ok(StiefelPoint { matrix: q })
}

pub fn random_stiefel<T: Scalar, R: Rng + ?Sized>(n: usize, p: usize, rng: &mut R) -> StiefelPoint<T> {
    let a = DMatrix::from_fn(n, p, |_, _| standard_normal::<T, _>(rng));
    let mut q = a.clone().qr().q();
    let r = a.qr().r();
    for j in 0..p {
        if r[(j, j)] < T::zero() {
            q.column_mut(j).neg_mut();
        }
    }
    StiefelPoint::new(q).expect("QR factor has orthonormal columns")
}

/// A random tangent vector at `w`: projection of a standard normal matrix.
pub fn random_tangent<T: Scalar, R: Rng + ?Sized>(w: &StiefelPoint<T>, rng: &mut R) -> StiefelTangent<T> {
    let (n, p) = w.shape();
    let g = DMatrix::from_fn(n, p, |_, _| standard_normal::<T, _>(rng));
    stiefel_project(w, &g).expect("shape matches")
}

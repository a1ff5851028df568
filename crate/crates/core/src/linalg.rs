//! Small dense linear-algebra helpers shared by the manifold and estimation code.

use nalgebra::{DMatrix, DVector};

use crate::{Error, Result, Scalar};

pub fn symmetrize<T: Scalar>(a: &DMatrix<T>) -> DMatrix<T> {
    (a + a.transpose()) * T::c(0.5)
}

pub fn max_abs<T: Scalar>(a: &DMatrix<T>) -> T {
    a.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
}

pub fn max_asymmetry<T: Scalar>(a: &DMatrix<T>) -> T {
    let n = a.nrows();
    let mut m = T::zero();
    for i in 0..n {
        for j in (i + 1)..n {
            m = m.max((a[(i, j)] - a[(j, i)]).abs());
        }
    }
    m
}

/// Frobenius inner product `trace(AᵀB)`.
pub fn frob_inner<T: Scalar>(a: &DMatrix<T>, b: &DMatrix<T>) -> T {
    a.iter().zip(b.iter()).fold(T::zero(), |s, (&x, &y)| s + x * y)
}

pub fn require_square<T: Scalar>(a: &DMatrix<T>) -> Result<usize> {
    if a.nrows() != a.ncols() {
        return Err(Error::dims(
            "square matrix",
            format!("{}x{}", a.nrows(), a.ncols()),
        ));
    }
    Ok(a.nrows())
}

pub fn require_shape<T: Scalar>(a: &DMatrix<T>, rows: usize, cols: usize) -> Result<()> {
    if a.nrows() != rows || a.ncols() != cols {
        return Err(Error::dims(
            format!("{rows}x{cols}"),
            format!("{}x{}", a.nrows(), a.ncols()),
        ));
    }
    Ok(())
}

/// Lower Cholesky factor, or `NotPositiveDefinite`.
pub fn cholesky_lower<T: Scalar>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    let chol = nalgebra::Cholesky::new(a.clone()).ok_or(Error::NotPositiveDefinite)?;
    let l = chol.unpack();
    if l.diagonal().iter().any(|&p| !(p > T::zero()) || !p.is_finite_val()) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(l)
}

/// `log|A|` from a lower Cholesky factor.
pub fn log_det_from_cholesky<T: Scalar>(l: &DMatrix<T>) -> T {
    l.diagonal()
        .iter()
        .fold(T::zero(), |s, &x| s + x.ln())
        * T::c(2.0)
}

/// Inverse of an SPD matrix through its Cholesky factor, symmetrized.
pub fn spd_inverse<T: Scalar>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    let chol = nalgebra::Cholesky::new(a.clone()).ok_or(Error::NotPositiveDefinite)?;
    Ok(symmetrize(&chol.inverse()))
}

/// Inverse of a lower-triangular matrix.
pub fn lower_inverse<T: Scalar>(l: &DMatrix<T>) -> Result<DMatrix<T>> {
    let n = l.nrows();
    l.solve_lower_triangular(&DMatrix::identity(n, n))
        .ok_or_else(|| Error::Numerical("singular triangular factor".into()))
}

/// Applies `f` to the eigenvalues of a symmetric matrix: `U f(Λ) Uᵀ`.
pub fn sym_apply<T, F>(a: &DMatrix<T>, f: F) -> Result<DMatrix<T>>
where
    T: Scalar,
    F: Fn(T) -> Result<T>,
{
    let eig = nalgebra::SymmetricEigen::try_new(symmetrize(a), T::eps(), 0)
        .ok_or_else(|| Error::Numerical("symmetric eigendecomposition did not converge".into()))?;
    let mut vals = eig.eigenvalues.clone();
    for v in vals.iter_mut() {
        *v = f(*v)?;
    }
    let u = &eig.eigenvectors;
    let scaled = DMatrix::from_fn(u.nrows(), u.ncols(), |i, j| u[(i, j)] * vals[j]);
    Ok(symmetrize(&(scaled * u.transpose())))
}

pub fn sym_eigenvalues<T: Scalar>(a: &DMatrix<T>) -> Result<DVector<T>> {
    let eig = nalgebra::SymmetricEigen::try_new(symmetrize(a), T::eps(), 0)
        .ok_or_else(|| Error::Numerical("symmetric eigendecomposition did not converge".into()))?;
    Ok(eig.eigenvalues)
}

fn positive<T: Scalar>(x: T) -> Result<T> {
    if x > T::zero() {
        Ok(x)
    } else {
        Err(Error::NotPositiveDefinite)
    }
}

pub fn spd_sqrt<T: Scalar>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    sym_apply(a, |x| positive(x).map(|x| x.sqrt()))
}

pub fn spd_inv_sqrt<T: Scalar>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    sym_apply(a, |x| positive(x).map(|x| T::one() / x.sqrt()))
}

pub fn spd_log<T: Scalar>(a: &DMatrix<T>) -> Result<DMatrix<T>> {
    sym_apply(a, |x| positive(x).map(|x| x.ln()))
}

/// Row-major upper triangle (diagonal included) of a square matrix.
pub fn upper_triangle<T: Scalar>(a: &DMatrix<T>) -> Vec<T> {
    let n = a.nrows();
    let mut out = Vec::with_capacity(n * (n + 1) / 2);
    for i in 0..n {
        for j in i..n {
            out.push(a[(i, j)]);
        }
    }
    out
}

/// Inverse of [`upper_triangle`]: rebuilds the symmetric matrix.
pub fn from_upper_triangle<T: Scalar>(values: &[T], n: usize) -> Result<DMatrix<T>> {
    if values.len() != n * (n + 1) / 2 {
        return Err(Error::dims(n * (n + 1) / 2, values.len()));
    }
    let mut m = DMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        for j in i..n {
            m[(i, j)] = values[k];
            m[(j, i)] = values[k];
            k += 1;
        }
    }
    Ok(m)
}

/// Weighted log-sum of `log(1 + exp(x))` without overflow.
#[inline]
pub fn log1p_exp<T: Scalar>(x: T) -> T {
    if x > T::zero() {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

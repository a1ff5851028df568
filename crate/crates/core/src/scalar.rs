use nalgebra::RealField;
use num_traits::FromPrimitive;

/// Floating-point scalar used throughout the crate: `f32` or `f64`.
pub trait Scalar: RealField + Copy + FromPrimitive + Send + Sync + 'static {
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn c(x: f64) -> Self {
        nalgebra::convert(x)
    }

    #[inline]
    fn to_f64(self) -> f64 {
        nalgebra::try_convert(self).unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::c(n as f64)
    }

    /// Machine epsilon of the concrete type.
    fn eps() -> Self;

    fn is_finite_val(self) -> bool {
        self.to_f64().is_finite()
    }
}

impl Scalar for f64 {
    fn eps() -> Self {
        f64::EPSILON
    }
}

impl Scalar for f32 {
    fn eps() -> Self {
        f32::EPSILON
    }
}

//! Manifold primitives.
//!
//! Points and tangent vectors are validated newtypes: constructing one checks
//! its invariant, and every operation returns validated values. Tangent
//! vectors carry their base point so that operations can refuse vectors from
//! the wrong tangent space.

mod spd;
mod stiefel;

pub use spd::{random_spd, spd_retract, spd_transport, transport_factor, SpdPoint, SpdTangent};
pub use stiefel::{
    random_stiefel, random_tangent, skew, stiefel_project, stiefel_retract_qr, StiefelPoint,
    StiefelTangent,
};

use crate::Scalar;

/// Tolerance used for orthonormality and tangency checks.
pub(crate) fn orth_tol<T: Scalar>() -> T {
    T::c(1e-10).max(T::eps() * T::c(1000.0))
}

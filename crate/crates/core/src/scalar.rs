//! Scalar abstraction: every numerical kernel is generic over `Float`.

use num_traits::{Float as NumFloat, FloatConst, FromPrimitive, NumAssign};

/// Floating-point scalar usable by the simulation kernels (`f32` or `f64`).
pub trait Float:
    NumFloat + FloatConst + FromPrimitive + NumAssign + Default + std::fmt::Debug + std::fmt::Display + Send + Sync + 'static
{
}

impl Float for f32 {}
impl Float for f64 {}

/// Converts an `f64` literal into the working scalar type.
///
/// Panics only if the target type cannot represent any `f64`, which does not
/// happen for the supported scalars.
#[inline]
pub fn lit<T: Float>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in scalar type")
}

/// Converts a `usize` into the working scalar type.
#[inline]
pub fn lit_usize<T: Float>(n: usize) -> T {
    T::from_usize(n).expect("usize representable in scalar type")
}

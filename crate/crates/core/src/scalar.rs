//! Scalar abstraction: the simulator is generic over `f32`/`f64`.

use core::fmt::Debug;

use num_traits::{Float, FloatConst};

/// Floating-point scalar type the optics and statistics code runs on.
pub trait Scalar: Float + FloatConst + Debug + Send + Sync + 'static {}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Lossy conversion from `f64`, used for constants and noise figures.
pub(crate) fn real<T: Scalar>(x: f64) -> T {
    T::from(x).expect("f64 converts to scalar")
}

/// Conversion from a count, used for averages and closed-form powers.
pub(crate) fn count<T: Scalar>(n: usize) -> T {
    T::from(n).expect("usize converts to scalar")
}

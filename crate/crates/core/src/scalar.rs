//! Floating point abstraction shared by the pointwise kernels.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive};

/// Real scalar usable by the tensor algebra and energy densities: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an `f64` literal. Every implementor represents all the
    /// constants used in this crate, so this never fails.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    /// Machine-precision-scaled threshold below which `det F` is treated as degenerate.
    fn degenerate_det() -> Self;
}

impl Scalar for f32 {
    fn degenerate_det() -> Self {
        1e-6
    }
}

impl Scalar for f64 {
    fn degenerate_det() -> Self {
        1e-12
    }
}

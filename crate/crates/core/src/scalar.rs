use ndarray::ScalarOperand;
use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use std::fmt::{Debug, Display};
use std::iter::Sum;

/// Floating-point scalar usable by the numeric core.
///
/// Implemented for `f32` and `f64`; all algorithms are written against this
/// trait so the same code serves both precisions.
pub trait Scalar:
    Float
    + NumAssign
    + ScalarOperand
    + FromPrimitive
    + ToPrimitive
    + Sum
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Lossless-enough conversion from `f64` for constants and tolerances.
    fn from_f64_c(v: f64) -> Self {
        Self::from_f64(v).expect("f64 constant conversion")
    }
}

impl<T> Scalar for T where
    T: Float
        + NumAssign
        + ScalarOperand
        + FromPrimitive
        + ToPrimitive
        + Sum
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

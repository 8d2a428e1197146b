//! Scalar abstraction shared by the mesh, element and linear algebra layers.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Floating point type the numerical kernels are written against.
///
/// Implemented for `f32` and `f64`. Problem definitions, assembly and the
/// studies built on top run in `f64`; the lower layers stay generic so the
/// element and quadrature code can be exercised at other precisions.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Default + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(value: f64) -> Self {
        Self::from_f64(value).expect("f64 literal representable")
    }

    #[inline]
    fn from_usize_lossy(value: usize) -> Self {
        Self::from_usize(value).expect("usize representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Real for T where
    T: Float
        + FloatConst
        + FromPrimitive
        + NumAssign
        + Default
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

//! Scalar abstraction shared by every numeric kernel.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// A real scalar usable as pixel, feature or displacement storage.
///
/// Reductions (dot products, convolutions, softmax normalizers) widen into
/// `f64` through [`Real::widen`] and narrow back once per output element, so
/// the accumulation precision does not depend on the storage type.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + Default + Debug + Display + Sum + Send + Sync + 'static
{
    fn widen(self) -> f64;
    fn narrow(v: f64) -> Self;

    #[inline]
    fn lit(v: f64) -> Self {
        Self::narrow(v)
    }
}

impl Real for f32 {
    #[inline]
    fn widen(self) -> f64 {
        self as f64
    }
    #[inline]
    fn narrow(v: f64) -> Self {
        v as f32
    }
}

impl Real for f64 {
    #[inline]
    fn widen(self) -> f64 {
        self
    }
    #[inline]
    fn narrow(v: f64) -> Self {
        v
    }
}

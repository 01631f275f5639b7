//! Scalar abstraction shared by every numerical module.
//!
//! All estimators, denoisers and channel builders are written against
//! [`Real`], so the same code runs in `f32` and `f64`. Random draws and the
//! offline stepsize search always happen in `f64` and are cast down, which
//! keeps both precisions on the same random stream.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use ndarray::ScalarOperand;
use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + ScalarOperand
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Error function.
    fn erf(self) -> Self;

    /// Complementary error function.
    fn erfc(self) -> Self;

    /// Lossy cast from `f64`.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable in every Real")
    }

    /// Widening cast to `f64`.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Real always converts to f64")
    }
}

impl Real for f32 {
    #[inline]
    fn erf(self) -> Self {
        libm::erff(self)
    }

    #[inline]
    fn erfc(self) -> Self {
        libm::erfcf(self)
    }
}

impl Real for f64 {
    #[inline]
    fn erf(self) -> Self {
        libm::erf(self)
    }

    #[inline]
    fn erfc(self) -> Self {
        libm::erfc(self)
    }
}

/// Squared modulus without the square root.
#[inline]
pub fn norm_sqr<T: Real>(z: Complex<T>) -> T {
    z.re * z.re + z.im * z.im
}

//! Scalar abstraction shared by every module.

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};
use std::fmt::{Debug, Display};

/// Real floating-point type the numerics are generic over.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
    + rustfft::FftNum
{
    /// Converts an `f64` literal into the scalar type.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Lossy conversion back to `f64`, used for reporting.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex number over a [`Real`] scalar.
pub type Cx<S> = Complex<S>;

/// Real number embedded in the complex plane.
#[inline]
pub fn re<S: Real>(x: S) -> Cx<S> {
    Complex::new(x, S::zero())
}

/// `f64` literal embedded in the complex plane.
#[inline]
pub fn cl<S: Real>(x: f64) -> Cx<S> {
    Complex::new(S::lit(x), S::zero())
}

/// The imaginary unit.
#[inline]
pub fn imag_unit<S: Real>() -> Cx<S> {
    Complex::new(S::zero(), S::one())
}

/// Complex number from two `f64` literals.
#[inline]
pub fn cx<S: Real>(a: f64, b: f64) -> Cx<S> {
    Complex::new(S::lit(a), S::lit(b))
}

/// Double-precision complex literal.
#[inline]
pub fn c64(a: f64, b: f64) -> Cx<f64> {
    Complex::new(a, b)
}

/// Whether both components are finite.
#[inline]
pub fn finite<S: Real>(z: Cx<S>) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

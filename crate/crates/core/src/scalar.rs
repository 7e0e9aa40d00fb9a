//! Floating-point abstraction shared by every numerical module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real scalar the simulation is generic over. Implemented for `f32` and `f64`.
///
/// Tolerances throughout the crate are written for double precision. `loosen`
/// maps such a tolerance onto what the concrete type can actually resolve, so
/// the same validation code works for single precision without spurious
/// failures.
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
    + Sum
    + 'static
{
    /// Smallest tolerance that is meaningful for this type.
    const TOL_FLOOR: f64;

    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in target float type")
    }

    /// A double-precision tolerance, widened to this type's resolution.
    #[inline]
    fn loosen(tol: f64) -> Self {
        Self::lit(tol.max(Self::TOL_FLOOR))
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    const TOL_FLOOR: f64 = 0.0;
}

impl Real for f32 {
    const TOL_FLOOR: f64 = 5.0e-5;
}

/// Complex scalar over a [`Real`].
pub type C<R> = Complex<R>;

#[inline]
pub(crate) fn c<R: Real>(re: R, im: R) -> C<R> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn cr<R: Real>(re: f64) -> C<R> {
    Complex::new(R::lit(re), R::zero())
}

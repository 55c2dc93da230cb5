//! Scalar abstraction shared by the analytic modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating point type the closed forms and solvers are generic over: `f32` or `f64`.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Converts an `f64` literal into `T`.
#[inline]
pub(crate) fn lit<T: Real>(x: f64) -> T {
    T::from_f64(x).expect("f64 literal representable in target scalar")
}

/// Smallest exponent passed to `exp`; below it `f64` underflows to zero.
pub(crate) const MIN_EXPONENT: f64 = -745.0;

/// `exp(x)` with `x` clamped to `[-745, 0]`, for exponents of probabilities.
#[inline]
pub(crate) fn exp_prob<T: Real>(x: T) -> T {
    x.max(lit(MIN_EXPONENT)).min(T::zero()).exp()
}

/// `1 - exp(x)` with the same clamping as [`exp_prob`].
#[inline]
pub(crate) fn one_minus_exp_prob<T: Real>(x: T) -> T {
    -x.max(lit(MIN_EXPONENT)).min(T::zero()).exp_m1()
}

/// Relative tolerance for iterative numerics on `T`, never tighter than `floor`.
#[inline]
pub(crate) fn tolerance<T: Real>(floor: f64) -> T {
    lit::<T>(floor).max(T::epsilon() * lit(64.0))
}

//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar (`f32` or `f64`).
///
/// Tolerances are carried by the type so that checks tuned for `f64`
/// do not spuriously reject `f32` values.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Default + Sum + Send + Sync + 'static
{
    /// Normalization tolerance on Σ|amplitude|².
    fn norm_tol() -> Self;
    /// Entrywise tolerance for Hermiticity, idempotence and similar identities.
    fn herm_tol() -> Self;
    /// Tolerance for completeness / unitarity checks.
    fn completeness_tol() -> Self;
    /// Violations below this slack are numerical noise in inequality audits.
    fn audit_tol() -> Self;

    /// Lossless-enough literal conversion.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }
}

impl Real for f64 {
    fn norm_tol() -> Self {
        1e-10
    }
    fn herm_tol() -> Self {
        1e-12
    }
    fn completeness_tol() -> Self {
        1e-10
    }
    fn audit_tol() -> Self {
        1e-9
    }
}

impl Real for f32 {
    fn norm_tol() -> Self {
        1e-5
    }
    fn herm_tol() -> Self {
        1e-6
    }
    fn completeness_tol() -> Self {
        1e-5
    }
    fn audit_tol() -> Self {
        1e-4
    }
}

/// Complex scalar over a [`Real`].
pub type ComplexScalar<T> = Complex<T>;

#[inline]
pub(crate) fn c<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn cr<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

/// Degrees to radians for any [`Real`].
#[inline]
pub fn deg_to_rad<T: Real>(deg: T) -> T {
    deg * T::PI() / T::lit(180.0)
}

/// Radians to degrees for any [`Real`].
#[inline]
pub fn rad_to_deg<T: Real>(rad: T) -> T {
    rad * T::lit(180.0) / T::PI()
}

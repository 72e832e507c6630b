//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive};

/// Real floating point type the library is generic over (`f32` or `f64`).
///
/// Tolerances quoted in the documentation are for `f64`; the `f32`
/// implementation widens them to something its precision can honour.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + Default
    + Debug
    + Display
    + LowerExp
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Max-norm distance from Hermiticity that is silently symmetrized away.
    fn hermitian_tol() -> Self;

    /// Default relative eigenvalue cutoff used for support detection.
    fn support_cutoff() -> Self;

    /// Absolute threshold under which two eigenvalues count as degenerate.
    fn degeneracy_tol() -> Self;

    /// Convert an `f64` literal. Panics only for values the type cannot hold.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f64 {
    fn hermitian_tol() -> Self {
        1e-9
    }
    fn support_cutoff() -> Self {
        1e-10
    }
    fn degeneracy_tol() -> Self {
        1e-12
    }
}

impl Real for f32 {
    fn hermitian_tol() -> Self {
        1e-4
    }
    fn support_cutoff() -> Self {
        1e-5
    }
    fn degeneracy_tol() -> Self {
        1e-6
    }
}

/// Complex number over the library scalar.
pub type C<T> = Complex<T>;

#[inline]
pub(crate) fn c<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub(crate) fn cr<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}


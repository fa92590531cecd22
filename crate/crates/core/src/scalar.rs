//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign};

/// Real floating point scalar: `f32` or `f64`.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable")
    }

    /// Conversion from a count.
    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over a [`Real`].
pub type C<T> = Complex<T>;

/// `|re| + |im|`, the cheap modulus used for deflation and pivoting tests.
#[inline]
pub fn abs1<T: Real>(z: C<T>) -> T {
    z.re.abs() + z.im.abs()
}

#[inline]
pub fn cplx<T: Real>(re: T, im: T) -> C<T> {
    Complex::new(re, im)
}

#[inline]
pub fn real<T: Real>(re: T) -> C<T> {
    Complex::new(re, T::zero())
}

#[inline]
pub fn imag_unit<T: Real>() -> C<T> {
    Complex::new(T::zero(), T::one())
}

/// Principal branch square root of a real number, returned as a complex value.
#[inline]
pub fn sqrt_real<T: Real>(x: T) -> C<T> {
    if x >= T::zero() {
        real(x.sqrt())
    } else {
        cplx(T::zero(), (-x).sqrt())
    }
}

/// Complex division that avoids the intermediate `|b|^2` (Smith's method).
#[inline]
pub fn cdiv<T: Real>(a: C<T>, b: C<T>) -> C<T> {
    if b.im.abs() <= b.re.abs() {
        let r = b.im / b.re;
        let d = b.re + b.im * r;
        cplx((a.re + a.im * r) / d, (a.im - a.re * r) / d)
    } else {
        let r = b.re / b.im;
        let d = b.im + b.re * r;
        cplx((a.re * r + a.im) / d, (a.im * r - a.re) / d)
    }
}

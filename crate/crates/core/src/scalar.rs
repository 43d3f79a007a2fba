//! Scalar abstraction shared by the numeric kernels.

use nalgebra::RealField;
use num_complex::Complex;

/// Real scalar usable by the kernels: `f32`, `f64`, or any other
/// [`RealField`] that converts losslessly from `f64` literals.
pub trait Real: RealField + Copy {
    /// Converts an `f64` literal into this scalar.
    #[inline]
    fn lit(x: f64) -> Self {
        nalgebra::convert(x)
    }

    #[inline]
    fn to_f64(self) -> f64 {
        nalgebra::try_convert(self).expect("real scalar representable as f64")
    }

    #[inline]
    fn of_usize(n: usize) -> Self {
        Self::lit(n as f64)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `e^{iθ}`.
#[inline]
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

#[inline]
pub fn modulus<T: Real>(z: Complex<T>) -> T {
    z.re.hypot(z.im)
}

#[inline]
pub fn argument<T: Real>(z: Complex<T>) -> T {
    z.im.atan2(z.re)
}

/// Converts a complex number between scalar types.
#[inline]
pub fn complex_to_f64<T: Real>(z: Complex<T>) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

#[inline]
pub fn complex_from_f64<T: Real>(z: Complex<f64>) -> Complex<T> {
    Complex::new(T::lit(z.re), T::lit(z.im))
}

//! Scalar abstraction shared by every numeric routine in the crate.

use nalgebra::RealField;
use num_complex::Complex;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real scalar the library is generic over (`f32` or `f64`).
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive {
    /// Converts an `f64` literal into the scalar type.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    fn of_usize(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// `exp(i x)`.
    fn cis(self) -> Complex<Self> {
        Complex::new(self.cos(), self.sin())
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub(crate) fn modulus<T: Real>(z: Complex<T>) -> T {
    z.norm_sqr().sqrt()
}

/// Uniform node positions `start, start + h, ..., end`.
pub(crate) fn linspace<T: Real>(start: T, end: T, n: usize) -> Vec<T> {
    if n == 1 {
        return vec![start];
    }
    let h = (end - start) / T::of_usize(n - 1);
    (0..n).map(|i| start + h * T::of_usize(i)).collect()
}

/// Composite trapezoidal weights on `n` uniform nodes with spacing `h`.
pub(crate) fn trapezoid_weights<T: Real>(n: usize, h: T) -> Vec<T> {
    let mut w = vec![h; n];
    if n >= 2 {
        let half = h / T::of(2.0);
        w[0] = half;
        w[n - 1] = half;
    }
    w
}

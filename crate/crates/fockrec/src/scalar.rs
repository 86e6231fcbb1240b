//! Scalar abstraction shared by every numeric module.
//!
//! All operator and state types are generic over a real type `T`; amplitudes
//! are `Complex<T>`. `f64` is the production scalar (tolerances such as
//! `1e-12` assume it); `f32` is supported for smoke runs.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar usable by the engine.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Copy
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant, panicking only on non-representable input.
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("f64 literal representable")
    }

    /// Converts a count to the scalar type.
    fn count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("count representable")
    }

    /// Lossy conversion used for reports and JSON output.
    fn as_f64(self) -> f64 {
        ToPrimitive::to_f64(&self).unwrap_or(f64::NAN)
    }

    /// Magnitude below which arithmetic results are treated as exact zeros.
    fn zero_threshold() -> Self {
        <Self as Float>::epsilon() * Self::lit(16.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex amplitude over the scalar `T`.
pub type Amp<T> = Complex<T>;

/// Shorthand constructor for a real-valued amplitude.
pub fn re<T: Real>(x: T) -> Amp<T> {
    Complex::new(x, T::zero())
}

/// Converts an `f64` complex literal into `Amp<T>`.
pub fn amp<T: Real>(z: Complex<f64>) -> Amp<T> {
    Complex::new(T::lit(z.re), T::lit(z.im))
}

/// Modulus of a complex amplitude.
pub fn modulus<T: Real>(z: Amp<T>) -> T {
    Float::sqrt(z.re * z.re + z.im * z.im)
}

/// `n!` as `u128`, enough for every factorial the engine forms.
pub fn factorial(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// Binomial coefficient `C(n, k)`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i as u128 + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_small_values() {
        assert_eq!(binomial(5, 2), 10);
        assert_eq!(binomial(7, 3), 35);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(factorial(8), 40320);
    }

    #[test]
    fn thresholds_scale_with_precision() {
        assert!(f64::zero_threshold() < 1e-14);
        assert!(f32::zero_threshold() > 1e-7);
    }
}

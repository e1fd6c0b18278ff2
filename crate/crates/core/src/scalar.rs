//! Real scalar abstraction shared by the `f64` and double-double code paths.
//!
//! Every dense routine in [`crate::linalg`] is generic over [`Real`], so the
//! same eigensolver runs in plain double precision or in the ~32-digit
//! [`Extended`] type when a sweep sits close to a high-order exceptional point.

use std::fmt::Debug;
use std::ops::{AddAssign, DivAssign, MulAssign, Neg, SubAssign};

use num_complex::Complex;
use num_traits::Num;
use serde::{Deserialize, Serialize};

/// Double-double scalar (about 106 mantissa bits).
pub type Extended = qd::Quad;

pub trait Real:
    Num
    + Copy
    + PartialOrd
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Debug
    + Send
    + Sync
    + 'static
{
    /// Unit roundoff of the representation.
    fn epsilon() -> Self;
    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn ln(self) -> Self;
    fn exp(self) -> Self;
    fn is_finite(self) -> bool;

    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    /// `sqrt(a² + b²)` without intermediate overflow.
    fn hypot(a: Self, b: Self) -> Self {
        let (a, b) = (a.abs(), b.abs());
        let m = a.max(b);
        if m == Self::zero() {
            return m;
        }
        let (x, y) = (a / m, b / m);
        m * (x * x + y * y).sqrt()
    }

    /// `self^(1/n)` for non-negative `self`.
    fn nth_root(self, n: usize) -> Self {
        if self == Self::zero() {
            return self;
        }
        (self.ln() / Self::from_usize(n)).exp()
    }
}

impl Real for f64 {
    fn epsilon() -> Self {
        f64::EPSILON
    }
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn ln(self) -> Self {
        f64::ln(self)
    }
    fn exp(self) -> Self {
        f64::exp(self)
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
    fn hypot(a: Self, b: Self) -> Self {
        f64::hypot(a, b)
    }
    fn nth_root(self, n: usize) -> Self {
        self.powf(1.0 / n as f64)
    }
}

impl Real for Extended {
    fn epsilon() -> Self {
        Extended::EPSILON
    }
    fn from_f64(x: f64) -> Self {
        Extended::from(x)
    }
    fn to_f64(self) -> f64 {
        self.0 + self.1
    }
    fn sqrt(self) -> Self {
        if self.0 == 0.0 {
            return Extended::ZERO;
        }
        Extended::sqrt(self)
    }
    fn abs(self) -> Self {
        Extended::abs(self)
    }
    fn ln(self) -> Self {
        Extended::ln(self)
    }
    fn exp(self) -> Self {
        Extended::exp(self)
    }
    fn is_finite(self) -> bool {
        Extended::is_finite(self)
    }
}

/// Modulus of a complex number.
pub fn cabs<T: Real>(z: Complex<T>) -> T {
    T::hypot(z.re, z.im)
}

/// Principal square root of a complex number.
pub fn csqrt<T: Real>(z: Complex<T>) -> Complex<T> {
    let zero = T::zero();
    let half = T::from_f64(0.5);
    let r = cabs(z);
    if r == zero {
        return Complex::new(zero, zero);
    }
    if z.re >= zero {
        let t = ((r + z.re) * half).sqrt();
        Complex::new(t, z.im / (t + t))
    } else {
        let t = ((r - z.re) * half).sqrt();
        let re = z.im.abs() / (t + t);
        if z.im < zero {
            Complex::new(re, -t)
        } else {
            Complex::new(re, t)
        }
    }
}

pub fn to_c64<T: Real>(z: Complex<T>) -> Complex<f64> {
    Complex::new(z.re.to_f64(), z.im.to_f64())
}

pub fn from_c64<T: Real>(z: Complex<f64>) -> Complex<T> {
    Complex::new(T::from_f64(z.re), T::from_f64(z.im))
}

/// Arithmetic used for the dense eigenproblems of a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Precision {
    Double,
    #[default]
    Extended,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn extended_roundtrip_keeps_small_values() {
        let x = <Extended as Real>::from_f64(1e-6);
        assert_eq!(x.to_f64(), 1e-6);
        let one = Extended::from(1.0);
        let third = one / Extended::from(3.0);
        let err = (third * Extended::from(3.0) - one).abs();
        assert!(err.to_f64() < 1e-30);
    }

    #[test]
    fn csqrt_squares_back() {
        for &(re, im) in &[(0.3, -1.7), (-4.0, 0.0), (-4.0, -0.0), (2.0, 1e-9), (0.0, 0.0)] {
            let z = Complex::new(re, im);
            let r = csqrt(z);
            assert!((r * r - z).norm() < 1e-14, "{z}");
            assert!(r.re >= 0.0);
        }
        let z: Complex<Extended> = from_c64(Complex::new(0.3, -1.7));
        let r = csqrt(z);
        let back = r * r - z;
        assert!(cabs(back).to_f64() < 1e-30);
    }

    #[test]
    fn nth_root_matches_powf() {
        let x = <Extended as Real>::from_f64(1e-12);
        let r = x.nth_root(6).to_f64();
        assert!((r - 1e-2).abs() < 1e-15);
        assert_eq!(0.0f64.nth_root(3), 0.0);
    }
}

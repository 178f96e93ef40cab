//! Complex numbers carried as `mantissa * exp(exponent)` with a real exponent.
//!
//! Phases stay in the mantissa; only magnitudes are moved into the exponent, which is
//! all that is needed for quantities such as `f_{N-1}(|l|^2) exp(-|l|^2)` at `|l|^2 ~ N ~ 500`.

use std::cmp::Ordering;
use std::fmt;
use std::iter::{Product, Sum};
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Largest exponent `e` for which `exp(e)` is finite in f64.
pub const MAX_NATIVE_EXPONENT: f64 = 709.782_712_893_384;

const E: f64 = std::f64::consts::E;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScaledComplex {
    pub mantissa: Complex64,
    pub exponent: f64,
}

impl ScaledComplex {
    pub const ZERO: ScaledComplex = ScaledComplex {
        mantissa: Complex64::new(0.0, 0.0),
        exponent: 0.0,
    };
    pub const ONE: ScaledComplex = ScaledComplex {
        mantissa: Complex64::new(1.0, 0.0),
        exponent: 0.0,
    };

    /// Builds `mantissa * exp(exponent)` and normalizes it.
    pub fn new(mantissa: Complex64, exponent: f64) -> Self {
        ScaledComplex { mantissa, exponent }.normalized()
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::new(z, 0.0)
    }

    pub fn from_real(x: f64) -> Self {
        Self::new(Complex64::new(x, 0.0), 0.0)
    }

    /// `exp(z)` without overflow.
    pub fn exp(z: Complex64) -> Self {
        Self::new(Complex64::from_polar(1.0, z.im), z.re)
    }

    /// Brings `|mantissa|` into `[1, e)`; zero becomes `(0, 0)`. Non-finite mantissas are left alone
    /// so that NaN propagates visibly.
    pub fn normalized(self) -> Self {
        let ScaledComplex {
            mut mantissa,
            mut exponent,
        } = self;
        if mantissa.re == 0.0 && mantissa.im == 0.0 {
            return Self::ZERO;
        }
        if !mantissa.re.is_finite() || !mantissa.im.is_finite() || !exponent.is_finite() {
            return ScaledComplex { mantissa, exponent };
        }
        let a = mantissa.norm();
        if !(1.0..E).contains(&a) {
            let shift = a.ln().floor();
            mantissa *= (-shift).exp();
            exponent += shift;
            // exp/ln rounding can leave the modulus a hair outside the interval
            let a = mantissa.norm();
            if a >= E {
                mantissa /= E;
                exponent += 1.0;
            } else if a < 1.0 {
                mantissa *= E;
                exponent -= 1.0;
            }
        }
        ScaledComplex { mantissa, exponent }
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.re == 0.0 && self.mantissa.im == 0.0
    }

    pub fn is_finite(&self) -> bool {
        self.mantissa.re.is_finite() && self.mantissa.im.is_finite() && self.exponent.is_finite()
    }

    /// Natural log of the modulus; `-inf` for zero.
    pub fn ln_abs(&self) -> f64 {
        if self.is_zero() {
            f64::NEG_INFINITY
        } else {
            self.mantissa.norm().ln() + self.exponent
        }
    }

    /// Principal complex logarithm.
    pub fn ln(&self) -> Complex64 {
        Complex64::new(self.ln_abs(), self.mantissa.arg())
    }

    pub fn abs(&self) -> ScaledComplex {
        ScaledComplex::new(Complex64::new(self.mantissa.norm(), 0.0), self.exponent)
    }

    pub fn conj(&self) -> ScaledComplex {
        ScaledComplex {
            mantissa: self.mantissa.conj(),
            exponent: self.exponent,
        }
    }

    pub fn recip(&self) -> ScaledComplex {
        ScaledComplex::new(self.mantissa.inv(), -self.exponent)
    }

    pub fn scale(&self, factor: f64) -> ScaledComplex {
        ScaledComplex::new(self.mantissa * factor, self.exponent)
    }

    pub fn powi(&self, n: i32) -> ScaledComplex {
        if n == 0 {
            return Self::ONE;
        }
        if self.is_zero() {
            return if n > 0 { Self::ZERO } else { Self::new(Complex64::new(f64::INFINITY, 0.0), 0.0) };
        }
        // powi on a mantissa in [1,e) stays finite for |n| up to ~700; go through logs beyond that
        if n.unsigned_abs() <= 512 {
            ScaledComplex::new(self.mantissa.powi(n), self.exponent * n as f64)
        } else {
            let l = self.ln() * n as f64;
            ScaledComplex::exp(l)
        }
    }

    /// Value as a plain complex number; fails if the modulus exceeds the f64 range.
    /// Values below the range underflow to zero.
    pub fn to_complex(&self) -> Result<Complex64> {
        if self.is_zero() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let total = self.exponent + self.mantissa.norm().ln();
        if total > MAX_NATIVE_EXPONENT || total.is_nan() {
            return Err(Error::Overflow {
                exponent: self.exponent,
            });
        }
        Ok(self.mantissa * self.exponent.exp())
    }

    /// Like [`to_complex`](Self::to_complex) but saturating to infinity.
    pub fn to_complex_lossy(&self) -> Complex64 {
        self.to_complex()
            .unwrap_or_else(|_| self.mantissa / self.mantissa.norm() * f64::INFINITY)
    }

    /// `|a - b| / max(|a|, |b|)`, zero when both vanish.
    pub fn rel_diff(&self, other: &ScaledComplex) -> f64 {
        let d = (*self - *other).ln_abs();
        let m = self.ln_abs().max(other.ln_abs());
        if m == f64::NEG_INFINITY {
            0.0
        } else {
            (d - m).exp()
        }
    }

    /// Compares moduli.
    pub fn cmp_abs(&self, other: &ScaledComplex) -> Ordering {
        self.ln_abs().total_cmp(&other.ln_abs())
    }
}

impl Default for ScaledComplex {
    fn default() -> Self {
        Self::ZERO
    }
}

impl From<Complex64> for ScaledComplex {
    fn from(z: Complex64) -> Self {
        Self::from_complex(z)
    }
}

impl From<f64> for ScaledComplex {
    fn from(x: f64) -> Self {
        Self::from_real(x)
    }
}

impl fmt::Display for ScaledComplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}{:+}i)*exp({})",
            self.mantissa.re, self.mantissa.im, self.exponent
        )
    }
}

impl Mul for ScaledComplex {
    type Output = ScaledComplex;
    fn mul(self, rhs: ScaledComplex) -> ScaledComplex {
        ScaledComplex::new(self.mantissa * rhs.mantissa, self.exponent + rhs.exponent)
    }
}

impl Div for ScaledComplex {
    type Output = ScaledComplex;
    fn div(self, rhs: ScaledComplex) -> ScaledComplex {
        ScaledComplex::new(self.mantissa / rhs.mantissa, self.exponent - rhs.exponent)
    }
}

impl Add for ScaledComplex {
    type Output = ScaledComplex;
    fn add(self, rhs: ScaledComplex) -> ScaledComplex {
        if self.is_zero() {
            return rhs;
        }
        if rhs.is_zero() {
            return self;
        }
        let (big, small) = if self.exponent >= rhs.exponent {
            (self, rhs)
        } else {
            (rhs, self)
        };
        // exp of a large negative gap underflows to 0 and the small term drops out
        let m = big.mantissa + small.mantissa * (small.exponent - big.exponent).exp();
        ScaledComplex::new(m, big.exponent)
    }
}

impl Neg for ScaledComplex {
    type Output = ScaledComplex;
    fn neg(self) -> ScaledComplex {
        ScaledComplex {
            mantissa: -self.mantissa,
            exponent: self.exponent,
        }
    }
}

impl Sub for ScaledComplex {
    type Output = ScaledComplex;
    fn sub(self, rhs: ScaledComplex) -> ScaledComplex {
        self + (-rhs)
    }
}

macro_rules! mixed_ops {
    ($t:ty) => {
        impl Mul<$t> for ScaledComplex {
            type Output = ScaledComplex;
            fn mul(self, rhs: $t) -> ScaledComplex {
                self * ScaledComplex::from(rhs)
            }
        }
        impl Div<$t> for ScaledComplex {
            type Output = ScaledComplex;
            fn div(self, rhs: $t) -> ScaledComplex {
                self / ScaledComplex::from(rhs)
            }
        }
        impl Add<$t> for ScaledComplex {
            type Output = ScaledComplex;
            fn add(self, rhs: $t) -> ScaledComplex {
                self + ScaledComplex::from(rhs)
            }
        }
        impl Sub<$t> for ScaledComplex {
            type Output = ScaledComplex;
            fn sub(self, rhs: $t) -> ScaledComplex {
                self - ScaledComplex::from(rhs)
            }
        }
    };
}
mixed_ops!(f64);
mixed_ops!(Complex64);

impl<T> AddAssign<T> for ScaledComplex
where
    ScaledComplex: Add<T, Output = ScaledComplex>,
{
    fn add_assign(&mut self, rhs: T) {
        *self = *self + rhs;
    }
}

impl<T> SubAssign<T> for ScaledComplex
where
    ScaledComplex: Sub<T, Output = ScaledComplex>,
{
    fn sub_assign(&mut self, rhs: T) {
        *self = *self - rhs;
    }
}

impl<T> MulAssign<T> for ScaledComplex
where
    ScaledComplex: Mul<T, Output = ScaledComplex>,
{
    fn mul_assign(&mut self, rhs: T) {
        *self = *self * rhs;
    }
}

impl<T> DivAssign<T> for ScaledComplex
where
    ScaledComplex: Div<T, Output = ScaledComplex>,
{
    fn div_assign(&mut self, rhs: T) {
        *self = *self / rhs;
    }
}

impl Sum for ScaledComplex {
    fn sum<I: Iterator<Item = ScaledComplex>>(iter: I) -> Self {
        iter.fold(ScaledComplex::ZERO, |a, b| a + b)
    }
}

impl Product for ScaledComplex {
    fn product<I: Iterator<Item = ScaledComplex>>(iter: I) -> Self {
        iter.fold(ScaledComplex::ONE, |a, b| a * b)
    }
}

/// `a * b`
pub fn sc_mul(a: ScaledComplex, b: ScaledComplex) -> ScaledComplex {
    a * b
}

/// `a + b`, factoring out the larger exponent.
pub fn sc_add(a: ScaledComplex, b: ScaledComplex) -> ScaledComplex {
    a + b
}

/// Plain complex value, or an overflow error.
pub fn sc_to_float(a: ScaledComplex) -> Result<Complex64> {
    a.to_complex()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn mul_examples() {
        let one = ScaledComplex::new(c(1.0, 0.0), 0.0);
        assert_eq!(one * one, ScaledComplex::ONE);

        let p = ScaledComplex::new(c(2.0, 0.0), 10.0) * ScaledComplex::new(c(3.0, 0.0), 20.0);
        assert!(p.mantissa.norm() >= 1.0 && p.mantissa.norm() < E);
        let expected = 6f64.ln() + 30.0;
        assert!((p.ln_abs() - expected).abs() < 1e-14);

        let z = ScaledComplex::ZERO * ScaledComplex::new(c(5.0, 0.0), 100.0);
        assert_eq!(z, ScaledComplex::ZERO);
    }

    #[test]
    fn add_examples() {
        let s = ScaledComplex::ONE + ScaledComplex::new(c(-1.0, 0.0), 0.0);
        assert_eq!(s, ScaledComplex::ZERO);

        let s = ScaledComplex::new(c(1.0, 0.0), 100.0) + ScaledComplex::ONE;
        assert!((s.mantissa - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(s.exponent, 100.0);

        let two = ScaledComplex::ONE + ScaledComplex::ONE;
        assert!((two.to_complex().unwrap() - c(2.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn to_float_examples() {
        assert_eq!(ScaledComplex::ONE.to_complex().unwrap(), c(1.0, 0.0));
        let two = ScaledComplex::new(c(1.0, 0.0), 2f64.ln());
        assert!((two.to_complex().unwrap() - c(2.0, 0.0)).norm() < 1e-15);
        assert!(matches!(
            ScaledComplex::new(c(1.0, 0.0), 1e6).to_complex(),
            Err(Error::Overflow { .. })
        ));
    }

    #[test]
    fn exp_keeps_phase() {
        let z = c(1000.0, 2.5);
        let s = ScaledComplex::exp(z);
        assert!((s.ln() - z).norm() < 1e-12);
    }

    #[test]
    fn powi_large_exponent() {
        let x = ScaledComplex::from_complex(c(1.5, 0.5));
        let p = x.powi(2000);
        let expected = c(1.5, 0.5).ln() * 2000.0;
        assert!((p.ln_abs() - expected.re).abs() < 1e-10);
    }
}

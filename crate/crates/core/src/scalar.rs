//! Scalar abstraction shared by every numerical routine.
//!
//! The core math is written once against [`Real`], which is implemented for
//! `f32`, `f64` and the multiprecision [`Mp`](crate::mp::Mp). Complex values
//! are `num_complex::Complex<T>`; the transcendental functions on them live in
//! [`ComplexFn`] because the inherent `Complex` methods require `Copy` floats.

use std::fmt;
use std::ops::Neg;

use num_bigint::BigInt;
use num_complex::Complex;
use num_traits::{Num, ToPrimitive};

pub trait Real:
    Clone + fmt::Debug + fmt::Display + PartialOrd + Send + Sync + 'static + Num + Neg<Output = Self>
{
    /// Converts an `f64` literal at the current working precision.
    fn cst(x: f64) -> Self;

    fn int(i: i64) -> Self;

    fn from_bigint(b: &BigInt) -> Self;

    /// Nearest `f64`; magnitudes outside the `f64` range saturate.
    fn to_f64_approx(&self) -> f64;

    fn pi() -> Self;

    /// Unit roundoff of the current working precision.
    fn epsilon() -> Self;

    fn mantissa_bits() -> u32;

    fn abs(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn exp(&self) -> Self;
    fn expm1(&self) -> Self;
    fn ln(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn sinh(&self) -> Self;
    fn cosh(&self) -> Self;
    fn atan2(&self, x: &Self) -> Self;

    fn is_finite(&self) -> bool;

    fn powi(&self, n: i32) -> Self {
        let mut base = if n < 0 {
            Self::one() / self.clone()
        } else {
            self.clone()
        };
        let mut k = n.unsigned_abs();
        let mut acc = Self::one();
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            k >>= 1;
        }
        acc
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn usize(n: usize) -> Self {
        Self::int(n as i64)
    }
}

macro_rules! impl_real_float {
    ($t:ty, $bits:expr) => {
        impl Real for $t {
            fn cst(x: f64) -> Self {
                x as $t
            }
            fn int(i: i64) -> Self {
                i as $t
            }
            fn from_bigint(b: &BigInt) -> Self {
                b.to_f64().unwrap_or(f64::NAN) as $t
            }
            fn to_f64_approx(&self) -> f64 {
                *self as f64
            }
            fn pi() -> Self {
                std::f64::consts::PI as $t
            }
            fn epsilon() -> Self {
                <$t>::EPSILON
            }
            fn mantissa_bits() -> u32 {
                $bits
            }
            fn abs(&self) -> Self {
                <$t>::abs(*self)
            }
            fn sqrt(&self) -> Self {
                <$t>::sqrt(*self)
            }
            fn exp(&self) -> Self {
                <$t>::exp(*self)
            }
            fn expm1(&self) -> Self {
                <$t>::exp_m1(*self)
            }
            fn ln(&self) -> Self {
                <$t>::ln(*self)
            }
            fn sin(&self) -> Self {
                <$t>::sin(*self)
            }
            fn cos(&self) -> Self {
                <$t>::cos(*self)
            }
            fn sinh(&self) -> Self {
                <$t>::sinh(*self)
            }
            fn cosh(&self) -> Self {
                <$t>::cosh(*self)
            }
            fn atan2(&self, x: &Self) -> Self {
                <$t>::atan2(*self, *x)
            }
            fn is_finite(&self) -> bool {
                <$t>::is_finite(*self)
            }
            fn powi(&self, n: i32) -> Self {
                <$t>::powi(*self, n)
            }
        }
    };
}

impl_real_float!(f32, 24);
impl_real_float!(f64, 53);

/// Transcendental functions on `Complex<T>` for any [`Real`] `T`.
pub trait ComplexFn<T: Real>: Sized {
    fn cabs(&self) -> T;
    fn carg(&self) -> T;
    fn cexp(&self) -> Self;
    /// `exp(z) - 1` without cancellation for small `|z|`.
    fn cexpm1(&self) -> Self;
    /// Principal logarithm.
    fn cln(&self) -> Self;
    /// Principal square root.
    fn csqrt(&self) -> Self;
    fn csin(&self) -> Self;
    fn ccos(&self) -> Self;
    fn ccot(&self) -> Self;
    fn cpowi(&self, n: i64) -> Self;
    fn rscale(&self, s: &T) -> Self;
    /// Unit complex number `exp(i·theta)`.
    fn ccis(theta: &T) -> Self;
}

impl<T: Real> ComplexFn<T> for Complex<T> {
    fn cabs(&self) -> T {
        let a = self.re.abs();
        let b = self.im.abs();
        let (big, small) = if a >= b { (a, b) } else { (b, a) };
        if big.is_zero() {
            return T::zero();
        }
        let r = small / big.clone();
        big * (T::one() + r.clone() * r).sqrt()
    }

    fn carg(&self) -> T {
        self.im.atan2(&self.re)
    }

    fn cexp(&self) -> Self {
        let m = self.re.exp();
        Complex::new(m.clone() * self.im.cos(), m * self.im.sin())
    }

    fn cexpm1(&self) -> Self {
        // e^a cos b - 1 = expm1(a) cos b - 2 sin^2(b/2)
        let em1 = self.re.expm1();
        let half = self.im.clone() / T::int(2);
        let s = half.sin();
        let re = em1.clone() * self.im.cos() - T::int(2) * s.clone() * s;
        let im = (em1 + T::one()) * self.im.sin();
        Complex::new(re, im)
    }

    fn cln(&self) -> Self {
        Complex::new(self.cabs().ln(), self.carg())
    }

    fn csqrt(&self) -> Self {
        if self.re.is_zero() && self.im.is_zero() {
            return Complex::new(T::zero(), T::zero());
        }
        let r = self.cabs();
        let two = T::int(2);
        if self.re >= T::zero() {
            let t = ((r + self.re.clone()) / two.clone()).sqrt();
            Complex::new(t.clone(), self.im.clone() / (two * t))
        } else {
            let t = ((r - self.re.clone()) / two.clone()).sqrt();
            let re = self.im.abs() / (two * t.clone());
            let im = if self.im < T::zero() { -t } else { t };
            Complex::new(re, im)
        }
    }

    fn csin(&self) -> Self {
        Complex::new(
            self.re.sin() * self.im.cosh(),
            self.re.cos() * self.im.sinh(),
        )
    }

    fn ccos(&self) -> Self {
        Complex::new(
            self.re.cos() * self.im.cosh(),
            -(self.re.sin() * self.im.sinh()),
        )
    }

    fn ccot(&self) -> Self {
        // cot(a+ib) = (sin 2a - i sinh 2b) / (2 (sin^2 a + sinh^2 b))
        let two = T::int(2);
        let sa = self.re.sin();
        let shb = self.im.sinh();
        let den = two.clone() * (sa.clone() * sa + shb.clone() * shb);
        let re = (two.clone() * self.re.clone()).sin() / den.clone();
        let im = -((two * self.im.clone()).sinh() / den);
        Complex::new(re, im)
    }

    fn cpowi(&self, n: i64) -> Self {
        let mut base = if n < 0 {
            Complex::new(T::one(), T::zero()) / self.clone()
        } else {
            self.clone()
        };
        let mut k = n.unsigned_abs();
        let mut acc = Complex::new(T::one(), T::zero());
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base.clone();
            }
            base = base.clone() * base;
            k >>= 1;
        }
        acc
    }

    fn rscale(&self, s: &T) -> Self {
        Complex::new(self.re.clone() * s.clone(), self.im.clone() * s.clone())
    }

    fn ccis(theta: &T) -> Self {
        Complex::new(theta.cos(), theta.sin())
    }
}

/// Shorthand constructors.
pub fn c<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

pub fn cre<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

pub fn cf<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::cst(re), T::cst(im))
}

/// Converts a complex value between scalar types through `f64`.
pub fn to_c64<T: Real>(z: &Complex<T>) -> Complex<f64> {
    Complex::new(z.re.to_f64_approx(), z.im.to_f64_approx())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cot_matches_cos_over_sin() {
        for &(a, b) in &[(0.7, 0.0), (0.3, 0.2), (2.5, -1.1), (-0.4, 3.0)] {
            let z: Complex<f64> = Complex::new(a, b);
            let direct = z.ccos() / z.csin();
            assert!((z.ccot() - direct).norm() < 1e-13 * direct.norm().max(1.0));
        }
    }

    #[test]
    fn expm1_is_accurate_near_zero() {
        let z = Complex::new(1e-12, -2e-12);
        let e = z.cexpm1();
        assert!((e - z).norm() < 1e-22);
    }

    #[test]
    fn principal_sqrt_branch() {
        let z = Complex::new(-4.0, -0.0);
        let s = z.csqrt();
        assert!((s * s - z).norm() < 1e-15);
        assert!(s.re >= 0.0);
        let w = Complex::new(-1.0, 1e-20).csqrt();
        assert!(w.im > 0.0);
    }

    #[test]
    fn pi_is_exact_for_f64() {
        assert_eq!(<f64 as Real>::pi(), std::f64::consts::PI);
        assert_eq!(<f64 as Real>::powi(&2.0, -3), 0.125);
    }
}

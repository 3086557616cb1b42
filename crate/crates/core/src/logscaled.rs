use std::fmt;
use std::ops::{Div, Mul};

use num_complex::Complex;
use num_traits::{One, Zero};

use crate::scalar::{ComplexFn, Real};

/// Overflow-free representation `exp(log_magnitude) · phase` of a complex
/// number. A zero phase encodes the value zero.
#[derive(Clone, Debug, PartialEq)]
pub struct LogScaledValue<T> {
    log_magnitude: T,
    phase: Complex<T>,
}

impl<T: Real> LogScaledValue<T> {
    pub fn from_parts(log_magnitude: T, phase: Complex<T>) -> Self {
        let m = phase.cabs();
        if m.is_zero() {
            return Self::zero();
        }
        LogScaledValue {
            log_magnitude,
            phase: Complex::new(phase.re / m.clone(), phase.im / m),
        }
    }

    /// `exp(log_magnitude) · exp(i·angle)`.
    pub fn from_polar_log(log_magnitude: T, angle: T) -> Self {
        LogScaledValue {
            log_magnitude,
            phase: Complex::ccis(&angle),
        }
    }

    pub fn from_complex(z: &Complex<T>) -> Self {
        let m = z.cabs();
        if m.is_zero() {
            return Self::zero();
        }
        LogScaledValue {
            log_magnitude: m.ln(),
            phase: Complex::new(z.re.clone() / m.clone(), z.im.clone() / m),
        }
    }

    pub fn from_real(x: &T) -> Self {
        Self::from_complex(&Complex::new(x.clone(), T::zero()))
    }

    pub fn one() -> Self {
        LogScaledValue {
            log_magnitude: T::zero(),
            phase: Complex::one(),
        }
    }

    pub fn zero() -> Self {
        LogScaledValue {
            log_magnitude: T::zero(),
            phase: Complex::zero(),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.phase.is_zero()
    }

    /// Natural log of the magnitude (`-inf` semantics are left to callers
    /// through [`is_zero`](Self::is_zero)).
    pub fn log_magnitude(&self) -> &T {
        &self.log_magnitude
    }

    pub fn phase(&self) -> &Complex<T> {
        &self.phase
    }

    pub fn angle(&self) -> T {
        self.phase.carg()
    }

    pub fn to_complex(&self) -> Complex<T> {
        if self.is_zero() {
            return Complex::zero();
        }
        self.phase.rscale(&self.log_magnitude.exp())
    }

    pub fn powi(&self, n: i64) -> Self {
        if self.is_zero() {
            return if n == 0 { Self::one() } else { Self::zero() };
        }
        LogScaledValue {
            log_magnitude: self.log_magnitude.clone() * T::int(n),
            phase: Complex::ccis(&(self.angle() * T::int(n))),
        }
    }

    pub fn recip(&self) -> Self {
        LogScaledValue {
            log_magnitude: -self.log_magnitude.clone(),
            phase: self.phase.conj(),
        }
    }

    pub fn mul_complex(&self, z: &Complex<T>) -> Self {
        self.clone() * LogScaledValue::from_complex(z)
    }

    /// `|self / other - 1|`, evaluated without forming either value.
    pub fn rel_deviation(&self, other: &Self) -> T {
        match (self.is_zero(), other.is_zero()) {
            (true, true) => return T::zero(),
            (false, true) | (true, false) => return T::cst(f64::INFINITY),
            _ => {}
        }
        let d = self.log_magnitude.clone() - other.log_magnitude.clone();
        let q = self.phase.clone() * other.phase.conj();
        let em1 = d.expm1();
        let r = q.rscale(&em1) + (q - Complex::one());
        r.cabs()
    }

    /// Deviation of the magnitudes only, `| |self|/|other| - 1 |`.
    pub fn rel_deviation_abs(&self, other: &Self) -> T {
        (self.log_magnitude.clone() - other.log_magnitude.clone())
            .expm1()
            .abs()
    }

    pub fn to_f64(&self) -> LogScaledValue<f64> {
        LogScaledValue {
            log_magnitude: self.log_magnitude.to_f64_approx(),
            phase: Complex::new(self.phase.re.to_f64_approx(), self.phase.im.to_f64_approx()),
        }
    }
}

impl<T: Real> Mul for LogScaledValue<T> {
    type Output = Self;
    fn mul(self, rhs: Self) -> Self {
        if self.is_zero() || rhs.is_zero() {
            return Self::zero();
        }
        LogScaledValue::from_parts(
            self.log_magnitude + rhs.log_magnitude,
            self.phase * rhs.phase,
        )
    }
}

impl<T: Real> Div for LogScaledValue<T> {
    type Output = Self;
    fn div(self, rhs: Self) -> Self {
        self * rhs.recip()
    }
}

impl<T: Real> fmt::Display for LogScaledValue<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        write!(
            f,
            "exp({:.15})·exp(i·{:.15})",
            self.log_magnitude.to_f64_approx(),
            self.angle().to_f64_approx()
        )
    }
}

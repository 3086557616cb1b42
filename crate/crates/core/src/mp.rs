//! Multiprecision real scalar backed by `astro-float`.
//!
//! Arithmetic runs at a thread-local working precision which is set through
//! [`PrecisionContext::enter`]. Values keep whatever mantissa they were
//! created with; every operation rounds its result to the working precision.

use std::cell::{Cell, RefCell};
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::BigInt;
use num_traits::{Num, One, Zero};

use crate::error::{Error, Result};
use crate::scalar::Real;

const RM: RoundingMode = RoundingMode::ToEven;

/// Working precision used when no context has been entered.
pub const DEFAULT_BITS: u32 = 128;

thread_local! {
    static WORKING_BITS: Cell<u32> = const { Cell::new(DEFAULT_BITS) };
    static CONSTS: RefCell<Consts> = RefCell::new(
        Consts::new().expect("astro-float constant cache allocation")
    );
}

fn bits() -> usize {
    WORKING_BITS.with(|b| b.get()) as usize
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|cc| f(&mut cc.borrow_mut()))
}

/// Mantissa budget and tolerance policy for extended-precision evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrecisionContext {
    mantissa_bits: u32,
}

impl PrecisionContext {
    pub const MIN_BITS: u32 = 64;

    pub fn new(mantissa_bits: u32) -> Result<Self> {
        if mantissa_bits < Self::MIN_BITS {
            return Err(Error::Parameter(format!(
                "mantissa_bits must be at least {}, got {mantissa_bits}",
                Self::MIN_BITS
            )));
        }
        Ok(PrecisionContext { mantissa_bits })
    }

    /// Default policy for order-`n` determinants: `max(128, 64 + 16 n)`.
    pub fn for_order(n: usize) -> Self {
        let bits = (64 + 16 * n as u32).max(128);
        PrecisionContext { mantissa_bits: bits }
    }

    pub fn mantissa_bits(&self) -> u32 {
        self.mantissa_bits
    }

    /// Comparison tolerance `2^(-bits/2)`.
    pub fn tolerance_f64(&self) -> f64 {
        2f64.powi(-(self.mantissa_bits as i32) / 2)
    }

    pub fn tolerance<T: Real>(&self) -> T {
        T::cst(2.0).powi(-(self.mantissa_bits as i32) / 2)
    }

    /// Sets the thread's working precision until the guard is dropped.
    pub fn enter(&self) -> PrecisionGuard {
        let previous = WORKING_BITS.with(|b| b.replace(self.mantissa_bits));
        PrecisionGuard { previous }
    }

    pub fn run<R>(&self, f: impl FnOnce() -> R) -> R {
        let _guard = self.enter();
        f()
    }
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext {
            mantissa_bits: DEFAULT_BITS,
        }
    }
}

#[must_use = "the working precision reverts when the guard is dropped"]
pub struct PrecisionGuard {
    previous: u32,
}

impl Drop for PrecisionGuard {
    fn drop(&mut self) {
        WORKING_BITS.with(|b| b.set(self.previous));
    }
}

#[derive(Clone)]
pub struct Mp(BigFloat);

impl Mp {
    pub fn from_bigfloat(b: BigFloat) -> Self {
        Mp(b)
    }

    pub fn as_bigfloat(&self) -> &BigFloat {
        &self.0
    }

    /// Parses a decimal literal at the working precision.
    pub fn parse(s: &str) -> Option<Self> {
        let v = with_consts(|cc| BigFloat::parse(s, Radix::Dec, bits(), RM, cc));
        if v.is_nan() {
            None
        } else {
            Some(Mp(v))
        }
    }

    fn atan(&self) -> Self {
        Mp(with_consts(|cc| self.0.atan(bits(), RM, cc)))
    }
}

impl fmt::Debug for Mp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Mp({})", self.0)
    }
}

impl fmt::Display for Mp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.0, f)
    }
}

impl PartialEq for Mp {
    fn eq(&self, other: &Self) -> bool {
        self.0.cmp(&other.0) == Some(0)
    }
}

impl PartialOrd for Mp {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.0.cmp(&other.0).map(|c| c.cmp(&0))
    }
}

macro_rules! binop {
    ($tr:ident, $f:ident) => {
        impl $tr for Mp {
            type Output = Mp;
            fn $f(self, rhs: Mp) -> Mp {
                Mp(self.0.$f(&rhs.0, bits(), RM))
            }
        }
    };
}

binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl Rem for Mp {
    type Output = Mp;
    fn rem(self, rhs: Mp) -> Mp {
        Mp(self.0.rem(&rhs.0))
    }
}

impl Neg for Mp {
    type Output = Mp;
    fn neg(self) -> Mp {
        Mp(self.0.neg())
    }
}

impl Zero for Mp {
    fn zero() -> Self {
        Mp(BigFloat::from_u8(0, bits()))
    }
    fn is_zero(&self) -> bool {
        self.0.is_zero()
    }
}

impl One for Mp {
    fn one() -> Self {
        Mp(BigFloat::from_u8(1, bits()))
    }
}

impl Num for Mp {
    type FromStrRadixErr = Error;

    fn from_str_radix(s: &str, radix: u32) -> Result<Self> {
        if radix != 10 {
            return Err(Error::Parameter(format!("unsupported radix {radix}")));
        }
        Mp::parse(s).ok_or_else(|| Error::Parameter(format!("not a number: {s:?}")))
    }
}

impl Real for Mp {
    fn cst(x: f64) -> Self {
        Mp(BigFloat::from_f64(x, bits()))
    }

    fn int(i: i64) -> Self {
        Mp(BigFloat::from_i64(i, bits()))
    }

    fn from_bigint(b: &BigInt) -> Self {
        let (sign, digits) = b.to_u64_digits();
        let p = bits() + 64;
        let radix = BigFloat::from_u8(2, p).powi(64, p, RM);
        let mut acc = BigFloat::from_u8(0, p);
        for &d in digits.iter().rev() {
            acc = acc
                .mul(&radix, p, RM)
                .add(&BigFloat::from_u64(d, p), p, RM);
        }
        let mut v = Mp(acc);
        v.0.set_precision(bits(), RM).ok();
        if sign == num_bigint::Sign::Minus {
            -v
        } else {
            v
        }
    }

    fn to_f64_approx(&self) -> f64 {
        if self.0.is_nan() {
            return f64::NAN;
        }
        if self.0.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.0.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        let Some((words, _, sign, exp, _)) = self.0.as_raw_parts() else {
            return f64::NAN;
        };
        let top = match words.last() {
            Some(&w) if w != 0 => w,
            _ => return 0.0,
        };
        let next = if words.len() > 1 {
            words[words.len() - 2]
        } else {
            0
        };
        // value = 0.m * 2^exp with the top word holding the leading bits
        let mant = top as f64 + next as f64 * 2f64.powi(-64);
        let e = exp as i64 - 64;
        let v = if e > 1100 {
            f64::INFINITY
        } else if e < -1200 {
            0.0
        } else {
            let half = (e / 2) as i32;
            mant * 2f64.powi(half) * 2f64.powi(e as i32 - half)
        };
        match sign {
            Sign::Neg => -v,
            Sign::Pos => v,
        }
    }

    fn pi() -> Self {
        Mp(with_consts(|cc| cc.pi(bits(), RM)))
    }

    fn epsilon() -> Self {
        let p = bits();
        Mp(BigFloat::from_u8(2, p).powi(p - 1, p, RM).reciprocal(p, RM))
    }

    fn mantissa_bits() -> u32 {
        bits() as u32
    }

    fn abs(&self) -> Self {
        Mp(self.0.abs())
    }

    fn sqrt(&self) -> Self {
        Mp(self.0.sqrt(bits(), RM))
    }

    fn exp(&self) -> Self {
        Mp(with_consts(|cc| self.0.exp(bits(), RM, cc)))
    }

    fn expm1(&self) -> Self {
        // guard bits absorb the cancellation in e^x - 1 for |x| < 1
        let p = bits();
        let extra = match self.0.exponent() {
            Some(e) if e < 0 => (-e) as usize + 64,
            _ => 64,
        };
        let q = p + extra;
        let e = with_consts(|cc| self.0.exp(q, RM, cc));
        let one = BigFloat::from_u8(1, q);
        let mut r = e.sub(&one, q, RM);
        r.set_precision(p, RM).ok();
        Mp(r)
    }

    fn ln(&self) -> Self {
        Mp(with_consts(|cc| self.0.ln(bits(), RM, cc)))
    }

    fn sin(&self) -> Self {
        Mp(with_consts(|cc| self.0.sin(bits(), RM, cc)))
    }

    fn cos(&self) -> Self {
        Mp(with_consts(|cc| self.0.cos(bits(), RM, cc)))
    }

    fn sinh(&self) -> Self {
        if self.0.is_zero() {
            return self.clone();
        }
        Mp(with_consts(|cc| self.0.sinh(bits(), RM, cc)))
    }

    fn cosh(&self) -> Self {
        Mp(with_consts(|cc| self.0.cosh(bits(), RM, cc)))
    }

    fn atan2(&self, x: &Self) -> Self {
        let zero = Mp::zero();
        if x.is_zero() {
            let half_pi = Mp::pi() / Mp::int(2);
            return match self.partial_cmp(&zero) {
                Some(Ordering::Greater) => half_pi,
                Some(Ordering::Less) => -half_pi,
                _ => zero,
            };
        }
        let base = (self.clone() / x.clone()).atan();
        if *x > zero {
            base
        } else if *self >= zero {
            base + Mp::pi()
        } else {
            base - Mp::pi()
        }
    }

    fn is_finite(&self) -> bool {
        !(self.0.is_nan() || self.0.is_inf())
    }

    fn powi(&self, n: i32) -> Self {
        let p = bits();
        let v = self.0.powi(n.unsigned_abs() as usize, p, RM);
        if n < 0 {
            Mp(v.reciprocal(p, RM))
        } else {
            Mp(v)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn to_f64_round_trips() {
        let _g = PrecisionContext::new(192).unwrap().enter();
        for &x in &[1.0, -3.5, 0.75, 1e-300, 12345.678, 6.02e23, -2.5e-7] {
            assert_eq!(Mp::cst(x).to_f64_approx(), x);
        }
        assert_eq!(Mp::zero().to_f64_approx(), 0.0);
    }

    #[test]
    fn bigint_conversion_is_exact() {
        let _g = PrecisionContext::new(256).unwrap().enter();
        let f: BigInt = (1..=30u32).map(BigInt::from).product();
        let m = Mp::from_bigint(&f);
        let back = Mp::parse("265252859812191058636308480000000").unwrap();
        assert_eq!(m, back);
        let neg = Mp::from_bigint(&-f);
        assert_eq!(neg, -back);
    }

    #[test]
    fn working_precision_is_scoped() {
        assert_eq!(Mp::mantissa_bits(), DEFAULT_BITS);
        {
            let _g = PrecisionContext::new(320).unwrap().enter();
            assert_eq!(Mp::mantissa_bits(), 320);
        }
        assert_eq!(Mp::mantissa_bits(), DEFAULT_BITS);
    }

    #[test]
    fn transcendental_identities_hold_at_high_precision() {
        let ctx = PrecisionContext::new(256).unwrap();
        ctx.run(|| {
            let x = Mp::cst(0.7);
            let s = x.sin();
            let c = x.cos();
            let one = s.clone() * s + c.clone() * c;
            assert!((one - Mp::one()).abs() < Mp::epsilon() * Mp::int(8));
            let e = x.exp().ln();
            assert!((e - x.clone()).abs() < Mp::epsilon() * Mp::int(8));
            let em1 = Mp::cst(1e-30).expm1();
            let rel = (em1 - Mp::cst(1e-30)) / Mp::cst(1e-30);
            assert!(rel.abs() < Mp::cst(1e-29));
            let a = Mp::cst(-1.0).atan2(&Mp::cst(-1.0));
            let want = -(Mp::pi() * Mp::int(3) / Mp::int(4));
            assert!((a - want).abs() < Mp::epsilon() * Mp::int(8));
        });
    }

    #[test]
    fn context_policy() {
        assert_eq!(PrecisionContext::for_order(1).mantissa_bits(), 128);
        assert_eq!(PrecisionContext::for_order(12).mantissa_bits(), 256);
        assert!(PrecisionContext::new(32).is_err());
        assert_eq!(PrecisionContext::new(128).unwrap().tolerance_f64(), 2f64.powi(-64));
    }
}

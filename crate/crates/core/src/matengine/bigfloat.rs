//! Arbitrary-precision binary floating point for the extended-precision paths.
//!
//! A value is `(-1)^neg * mag * 2^exp`. Results are rounded to nearest at the
//! thread-local working precision, set with [`with_precision`].

use std::cell::Cell;
use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Rem, Sub};

use num_bigint::BigUint;
use num_traits::{Float, One, ToPrimitive, Zero};

pub const DEFAULT_BITS: u32 = 128;

thread_local! {
    static WORKING_BITS: Cell<u32> = const { Cell::new(DEFAULT_BITS) };
}

/// Runs `f` with the working precision set to `bits`, restoring the previous value afterwards.
pub fn with_precision<R>(bits: u32, f: impl FnOnce() -> R) -> R {
    struct Restore(u32);
    impl Drop for Restore {
        fn drop(&mut self) {
            WORKING_BITS.with(|b| b.set(self.0));
        }
    }
    let prev = WORKING_BITS.with(|b| b.replace(bits.max(2)));
    let _restore = Restore(prev);
    f()
}

pub fn working_bits() -> u32 {
    WORKING_BITS.with(|b| b.get())
}

#[derive(Clone)]
pub struct BigFloat {
    neg: bool,
    mag: BigUint,
    exp: i64,
}

impl BigFloat {
    fn from_parts(neg: bool, mag: BigUint, exp: i64) -> Self {
        let bits = working_bits() as u64;
        if mag.is_zero() {
            return BigFloat { neg: false, mag, exp: 0 };
        }
        let len = mag.bits();
        if len <= bits {
            return BigFloat { neg, mag, exp };
        }
        let shift = len - bits;
        let round_up = mag.bit(shift - 1);
        let mut m = mag >> shift;
        let mut e = exp + shift as i64;
        if round_up {
            m += 1u32;
            if m.bits() > bits {
                m >>= 1;
                e += 1;
            }
        }
        BigFloat { neg, mag: m, exp: e }
    }

    pub fn from_f64(x: f64) -> Self {
        assert!(x.is_finite(), "cannot convert non-finite value {x}");
        if x == 0.0 {
            return Self::zero();
        }
        let (m, e, s) = x.integer_decode();
        Self::from_parts(s < 0, BigUint::from(m), e as i64)
    }

    pub fn to_f64(&self) -> f64 {
        if self.mag.is_zero() {
            return 0.0;
        }
        let len = self.mag.bits();
        let (top, shift) = if len > 64 {
            ((&self.mag >> (len - 64)).to_u64().unwrap(), (len - 64) as i64)
        } else {
            (self.mag.to_u64().unwrap(), 0)
        };
        let v = ldexp(top as f64, self.exp + shift);
        if self.neg {
            -v
        } else {
            v
        }
    }

    pub fn is_negative(&self) -> bool {
        self.neg && !self.mag.is_zero()
    }

    pub fn abs(&self) -> Self {
        BigFloat { neg: false, mag: self.mag.clone(), exp: self.exp }
    }

    /// Position of the leading bit, `floor(log2 |x|)`; `None` for zero.
    fn top_bit(&self) -> Option<i64> {
        if self.mag.is_zero() {
            None
        } else {
            Some(self.exp + self.mag.bits() as i64 - 1)
        }
    }

    pub fn sqrt(&self) -> Self {
        assert!(!self.is_negative(), "square root of a negative number");
        if self.mag.is_zero() {
            return Self::zero();
        }
        let bits = working_bits() as i64;
        let len = self.mag.bits() as i64;
        let mut k = (2 * bits + 2 - len).max(0);
        if (self.exp - k).rem_euclid(2) != 0 {
            k += 1;
        }
        let m = &self.mag << (k as u64);
        Self::from_parts(false, m.sqrt(), (self.exp - k) / 2)
    }

    /// `exp(x)` by argument halving, a Taylor series, and repeated squaring.
    pub fn exp(&self) -> Self {
        let bits = working_bits();
        let Some(tb) = self.top_bit() else {
            return Self::one();
        };
        let k = (tb + 10).max(0) as u32;
        let guard = bits + k + 32;
        let r = with_precision(guard, || {
            let y = BigFloat { neg: self.neg, mag: self.mag.clone(), exp: self.exp - k as i64 };
            let mut sum = Self::one();
            let mut term = Self::one();
            let mut i = 1u32;
            loop {
                term = &(&term * &y) / &BigFloat::from_f64(i as f64);
                sum = &sum + &term;
                match term.top_bit() {
                    Some(t) if t > -(guard as i64) - 2 => {}
                    _ => break,
                }
                i += 1;
            }
            for _ in 0..k {
                sum = &sum * &sum;
            }
            sum
        });
        Self::from_parts(r.neg, r.mag, r.exp)
    }

    /// Natural logarithm rounded to double precision; works far outside the `f64` range.
    pub fn ln_to_f64(&self) -> f64 {
        assert!(!self.is_negative() && !self.mag.is_zero(), "logarithm of a non-positive number");
        let len = self.mag.bits();
        let (top, shift) = if len > 64 {
            ((&self.mag >> (len - 64)).to_u64().unwrap(), (len - 64) as i64)
        } else {
            (self.mag.to_u64().unwrap(), 0)
        };
        (top as f64).ln() + (self.exp + shift) as f64 * std::f64::consts::LN_2
    }

    /// `2^(-bits)` at the working precision.
    pub fn epsilon() -> Self {
        BigFloat { neg: false, mag: BigUint::one(), exp: -(working_bits() as i64) }
    }

    fn add_signed(&self, other: &Self, negate_other: bool) -> Self {
        let other_neg = other.neg ^ negate_other;
        if other.mag.is_zero() {
            return Self::from_parts(self.neg, self.mag.clone(), self.exp);
        }
        if self.mag.is_zero() {
            return Self::from_parts(other_neg, other.mag.clone(), other.exp);
        }
        let bits = working_bits() as i64;
        let (ta, tb) = (self.top_bit().unwrap(), other.top_bit().unwrap());
        // the smaller operand cannot affect the rounded result
        if ta - tb > bits + 2 {
            return Self::from_parts(self.neg, self.mag.clone(), self.exp);
        }
        if tb - ta > bits + 2 {
            return Self::from_parts(other_neg, other.mag.clone(), other.exp);
        }
        let exp = self.exp.min(other.exp);
        let a = &self.mag << ((self.exp - exp) as u64);
        let b = &other.mag << ((other.exp - exp) as u64);
        if self.neg == other_neg {
            Self::from_parts(self.neg, a + b, exp)
        } else {
            match a.cmp(&b) {
                Ordering::Greater => Self::from_parts(self.neg, a - b, exp),
                Ordering::Less => Self::from_parts(other_neg, b - a, exp),
                Ordering::Equal => Self::zero(),
            }
        }
    }

    fn mul_ref(&self, other: &Self) -> Self {
        Self::from_parts(self.neg ^ other.neg, &self.mag * &other.mag, self.exp + other.exp)
    }

    fn div_ref(&self, other: &Self) -> Self {
        assert!(!other.mag.is_zero(), "division by zero");
        if self.mag.is_zero() {
            return Self::zero();
        }
        let bits = working_bits() as i64;
        let k = (bits + 2 + other.mag.bits() as i64 - self.mag.bits() as i64).max(0);
        let q = (&self.mag << (k as u64)) / &other.mag;
        Self::from_parts(self.neg ^ other.neg, q, self.exp - other.exp - k)
    }

    fn cmp_value(&self, other: &Self) -> Ordering {
        let d = self.add_signed(other, true);
        if d.mag.is_zero() {
            Ordering::Equal
        } else if d.neg {
            Ordering::Less
        } else {
            Ordering::Greater
        }
    }
}

fn ldexp(mut v: f64, mut e: i64) -> f64 {
    while e > 1000 {
        v *= 2f64.powi(1000);
        e -= 1000;
        if v.is_infinite() {
            return v;
        }
    }
    while e < -1000 {
        v *= 2f64.powi(-1000);
        e += 1000;
        if v == 0.0 {
            return v;
        }
    }
    v * 2f64.powi(e as i32)
}

impl fmt::Debug for BigFloat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BigFloat({:e})", self.to_f64())
    }
}

impl PartialEq for BigFloat {
    fn eq(&self, other: &Self) -> bool {
        self.cmp_value(other) == Ordering::Equal
    }
}

impl PartialOrd for BigFloat {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp_value(other))
    }
}

impl Zero for BigFloat {
    fn zero() -> Self {
        BigFloat { neg: false, mag: BigUint::zero(), exp: 0 }
    }

    fn is_zero(&self) -> bool {
        self.mag.is_zero()
    }
}

impl One for BigFloat {
    fn one() -> Self {
        BigFloat { neg: false, mag: BigUint::one(), exp: 0 }
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $body:expr) => {
        impl $tr for BigFloat {
            type Output = BigFloat;
            fn $method(self, rhs: BigFloat) -> BigFloat {
                $body(&self, &rhs)
            }
        }
        impl<'a> $tr<&'a BigFloat> for &'a BigFloat {
            type Output = BigFloat;
            fn $method(self, rhs: &'a BigFloat) -> BigFloat {
                $body(self, rhs)
            }
        }
    };
}

binop!(Add, add, |a: &BigFloat, b: &BigFloat| a.add_signed(b, false));
binop!(Sub, sub, |a: &BigFloat, b: &BigFloat| a.add_signed(b, true));
binop!(Mul, mul, |a: &BigFloat, b: &BigFloat| a.mul_ref(b));
binop!(Div, div, |a: &BigFloat, b: &BigFloat| a.div_ref(b));

impl Rem for BigFloat {
    type Output = BigFloat;

    fn rem(self, _rhs: BigFloat) -> BigFloat {
        unimplemented!("remainder is not defined for BigFloat")
    }
}

impl Neg for BigFloat {
    type Output = BigFloat;

    fn neg(self) -> BigFloat {
        BigFloat { neg: !self.neg, mag: self.mag, exp: self.exp }
    }
}

impl num_traits::Num for BigFloat {
    type FromStrRadixErr = ();

    fn from_str_radix(_s: &str, _radix: u32) -> Result<Self, ()> {
        Err(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bf(x: f64) -> BigFloat {
        BigFloat::from_f64(x)
    }

    #[test]
    fn exact_roundtrip_of_doubles() {
        for x in [1.0, -2.5, 1e-300, 3.141592653589793, -7.0e250, 0.1] {
            assert_eq!(bf(x).to_f64(), x);
        }
    }

    #[test]
    fn arithmetic_matches_double_when_exact() {
        assert_eq!((bf(1.5) + bf(2.25)).to_f64(), 3.75);
        assert_eq!((bf(1.5) - bf(2.25)).to_f64(), -0.75);
        assert_eq!((bf(-1.5) * bf(2.0)).to_f64(), -3.0);
        assert_eq!((bf(3.0) / bf(4.0)).to_f64(), 0.75);
        assert_eq!(bf(16.0).sqrt().to_f64(), 4.0);
        assert_eq!((bf(2.0) - bf(2.0)).to_f64(), 0.0);
    }

    #[test]
    fn extra_bits_are_kept() {
        // (1 + 2^-80) - 1 vanishes in double but not at 128 bits
        with_precision(128, || {
            let tiny = bf(2f64.powi(-80));
            let d = (bf(1.0) + tiny.clone()) - bf(1.0);
            assert_eq!(d.to_f64(), 2f64.powi(-80));
        });
        with_precision(64, || {
            let tiny = bf(2f64.powi(-80));
            let d = (bf(1.0) + tiny) - bf(1.0);
            assert_eq!(d.to_f64(), 0.0);
        });
    }

    #[test]
    fn sqrt_two_squared() {
        with_precision(200, || {
            let s = bf(2.0).sqrt();
            let err = (&s * &s) - bf(2.0);
            assert!(err.abs() < BigFloat::from_f64(1e-58));
        });
    }

    #[test]
    fn division_precision() {
        with_precision(160, || {
            let third = bf(1.0) / bf(3.0);
            let err = (third * bf(3.0)) - bf(1.0);
            assert!(err.abs() < BigFloat::from_f64(1e-47));
        });
    }

    #[test]
    fn exp_and_log() {
        with_precision(200, || {
            let e = bf(1.0).exp();
            assert!((e.to_f64() - std::f64::consts::E).abs() < 1e-15);
            let big = bf(1500.0).exp();
            assert!((big.ln_to_f64() - 1500.0).abs() < 1e-12);
            let prod = bf(-37.25).exp() * bf(37.25).exp();
            assert!((prod - bf(1.0)).abs() < BigFloat::from_f64(1e-50));
        });
    }

    #[test]
    fn ordering() {
        assert!(bf(1.0) < bf(2.0));
        assert!(bf(-3.0) < bf(-2.0));
        assert!(bf(0.0) == BigFloat::zero());
    }
}

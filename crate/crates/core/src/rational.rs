//! Exact unbounded rational arithmetic.
//!
//! [`ExactRational`] is the ground-truth number type used by the rounding
//! oracle and the theorem scanners. It is a thin wrapper over
//! [`num_rational::BigRational`], which keeps values in lowest terms with a
//! positive denominator, exactly the invariants we rely on.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// An exact rational number: unbounded signed numerator over unbounded
/// positive denominator, always in lowest terms.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactRational(BigRational);

impl ExactRational {
    pub fn new(numerator: impl Into<BigInt>, denominator: impl Into<BigInt>) -> Self {
        let den = denominator.into();
        assert!(!den.is_zero(), "rational with zero denominator");
        ExactRational(BigRational::new(numerator.into(), den))
    }

    pub fn from_integer(value: impl Into<BigInt>) -> Self {
        ExactRational(BigRational::from_integer(value.into()))
    }

    /// 2^k for any (possibly negative) k.
    pub fn pow2(k: i32) -> Self {
        let one = BigInt::one();
        if k >= 0 {
            ExactRational(BigRational::from_integer(one << k as usize))
        } else {
            ExactRational(BigRational::new(one.clone(), one << (-k) as usize))
        }
    }

    /// The value `significand / 2^(precision-1) * 2^exponent` of a normal
    /// floating-point number.
    pub fn from_significand(significand: u64, exponent: i32, precision: u32) -> Self {
        let v = ExactRational::from_integer(significand);
        v * ExactRational::pow2(exponent - (precision as i32 - 1))
    }

    pub fn zero() -> Self {
        ExactRational(BigRational::zero())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        ExactRational(self.0.recip())
    }

    pub fn div(&self, other: &Self) -> Self {
        assert!(!other.is_zero(), "division by zero");
        ExactRational(&self.0 / &other.0)
    }

    /// True iff the value is `2^k` for some integer k.
    pub fn is_power_of_two(&self) -> bool {
        if !self.is_positive() {
            return false;
        }
        let n = self.numer().magnitude();
        let d = self.denom().magnitude();
        (n.is_one() || (n.count_ones() == 1 && d.is_one()))
            && (d.is_one() || d.count_ones() == 1)
    }

    /// Largest e with 2^e <= self. Requires self > 0.
    pub fn floor_log2(&self) -> i32 {
        assert!(self.is_positive(), "floor_log2 of non-positive value");
        let n = self.numer().magnitude();
        let d = self.denom().magnitude();
        let mut e = n.bits() as i64 - d.bits() as i64;
        // 2^e <= n/d < 2^(e+2); one comparison settles which binade.
        let scaled_ge = if e >= 0 {
            n >= &(d << e as u64)
        } else {
            &(n << (-e) as u64) >= d
        };
        if !scaled_ge {
            e -= 1;
        }
        e as i32
    }

    /// Exact square root, if the value is a perfect square of a rational
    /// (numerator and denominator both perfect squares once reduced).
    pub fn sqrt_exact(&self) -> Option<Self> {
        if self.is_zero() {
            return Some(Self::zero());
        }
        if !self.is_positive() {
            return None;
        }
        let n = self.numer().magnitude();
        let d = self.denom().magnitude();
        let ns = n.sqrt();
        if &ns * &ns != *n {
            return None;
        }
        let ds = d.sqrt();
        if &ds * &ds != *d {
            return None;
        }
        Some(ExactRational(BigRational::new(
            BigInt::from(ns),
            BigInt::from(ds),
        )))
    }

    /// Approximate f64 value, for display only.
    pub fn to_f64_lossy(&self) -> f64 {
        num_traits::ToPrimitive::to_f64(&self.0).unwrap_or(f64::NAN)
    }

    /// Floor division of numerator by denominator with remainder:
    /// `self = quotient + remainder/denom`, `0 <= remainder < denom`.
    /// Requires self >= 0.
    pub fn floor_with_remainder(&self) -> (BigInt, BigInt) {
        assert!(!self.0.is_negative());
        self.numer().div_rem(self.denom())
    }
}

impl fmt::Display for ExactRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom().is_one() {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl Add for &ExactRational {
    type Output = ExactRational;
    fn add(self, rhs: &ExactRational) -> ExactRational {
        ExactRational(&self.0 + &rhs.0)
    }
}

impl Sub for &ExactRational {
    type Output = ExactRational;
    fn sub(self, rhs: &ExactRational) -> ExactRational {
        ExactRational(&self.0 - &rhs.0)
    }
}

impl Mul for &ExactRational {
    type Output = ExactRational;
    fn mul(self, rhs: &ExactRational) -> ExactRational {
        ExactRational(&self.0 * &rhs.0)
    }
}

impl Add for ExactRational {
    type Output = ExactRational;
    fn add(self, rhs: ExactRational) -> ExactRational {
        ExactRational(self.0 + rhs.0)
    }
}

impl Sub for ExactRational {
    type Output = ExactRational;
    fn sub(self, rhs: ExactRational) -> ExactRational {
        ExactRational(self.0 - rhs.0)
    }
}

impl Mul for ExactRational {
    type Output = ExactRational;
    fn mul(self, rhs: ExactRational) -> ExactRational {
        ExactRational(self.0 * rhs.0)
    }
}

impl Neg for ExactRational {
    type Output = ExactRational;
    fn neg(self) -> ExactRational {
        ExactRational(-self.0)
    }
}

impl PartialOrd<u64> for ExactRational {
    fn partial_cmp(&self, other: &u64) -> Option<Ordering> {
        Some(self.0.cmp(&BigRational::from_integer(BigInt::from(*other))))
    }
}

impl PartialEq<u64> for ExactRational {
    fn eq(&self, other: &u64) -> bool {
        self.0 == BigRational::from_integer(BigInt::from(*other))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lowest_terms_and_positive_denominator() {
        let v = ExactRational::new(-6, -8);
        assert_eq!(v.numer(), &BigInt::from(3));
        assert_eq!(v.denom(), &BigInt::from(4));
        let w = ExactRational::new(10, -4);
        assert_eq!(w.numer(), &BigInt::from(-5));
        assert_eq!(w.denom(), &BigInt::from(2));
    }

    #[test]
    fn pow2_and_floor_log2() {
        assert_eq!(ExactRational::pow2(0), ExactRational::from_integer(1));
        assert_eq!(ExactRational::pow2(-3), ExactRational::new(1, 8));
        assert_eq!(ExactRational::new(1, 10).floor_log2(), -4);
        assert_eq!(ExactRational::from_integer(1).floor_log2(), 0);
        assert_eq!(ExactRational::new(3, 2).floor_log2(), 0);
        assert_eq!(ExactRational::from_integer(2).floor_log2(), 1);
        assert_eq!(ExactRational::new(2047, 1024).floor_log2(), 0);
    }

    #[test]
    fn power_of_two_detection() {
        assert!(ExactRational::pow2(17).is_power_of_two());
        assert!(ExactRational::pow2(-9).is_power_of_two());
        assert!(!ExactRational::new(3, 4).is_power_of_two());
        assert!(!ExactRational::new(-4, 1).is_power_of_two());
    }

    #[test]
    fn exact_square_roots() {
        let v = ExactRational::new(9, 16);
        assert_eq!(v.sqrt_exact(), Some(ExactRational::new(3, 4)));
        assert_eq!(ExactRational::new(9, 8).sqrt_exact(), None);
        assert_eq!(ExactRational::from_integer(2).sqrt_exact(), None);
    }

    #[test]
    fn from_significand_matches_definition() {
        // 0xC00000 / 2^23 * 2^0 = 1.5
        let v = ExactRational::from_significand(0xC0_0000, 0, 24);
        assert_eq!(v, ExactRational::new(3, 2));
        // significand 0b110 at precision 3, exponent -1 -> 0.75
        let w = ExactRational::from_significand(0b110, -1, 3);
        assert_eq!(w, ExactRational::new(3, 4));
    }
}

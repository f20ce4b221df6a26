//! Exact rounding oracle.
//!
//! Everything here works in [`ExactRational`] arithmetic, so results are
//! correct by construction and serve as ground truth for the correction
//! kernels and the sweep harness. Speed is a non-goal; exhaustive
//! single-precision runs only need a few tens of millions of evaluations.
//!
//! Each result carries `exact` and `tie` flags. The `tie` flag records
//! whether the nearest-even tie rule actually fired; for reciprocal,
//! division and square root of normal inputs it must never fire, and the
//! harness asserts exactly that.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use crate::formats::{Decoded, FpFormat, RoundingMode};
use crate::rational::ExactRational;

/// A correctly rounded positive normal number plus rounding telemetry.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Rounded {
    pub significand: u64,
    pub exponent: i32,
    /// The exact value was representable; no rounding occurred.
    pub exact: bool,
    /// Nearest-even only: the exact value was a midpoint and the tie rule
    /// decided the result.
    pub tie: bool,
}

impl Rounded {
    pub fn value(&self, format: &FpFormat) -> ExactRational {
        format.value_of(self.significand, self.exponent)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RangeError {
    /// Result would fall below the smallest normal (subnormal territory).
    Underflow { exponent: i32 },
    /// Result would exceed the largest normal.
    Overflow { exponent: i32 },
    /// Input was not a positive finite value.
    NotPositive,
}

impl fmt::Display for RangeError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RangeError::Underflow { exponent } => {
                write!(f, "result exponent {exponent} underflows the normal range")
            }
            RangeError::Overflow { exponent } => {
                write!(f, "result exponent {exponent} overflows the normal range")
            }
            RangeError::NotPositive => write!(f, "oracle requires a positive finite input"),
        }
    }
}

impl std::error::Error for RangeError {}

/// Round a positive rational to the format under the given mode.
///
/// Exact midpoints round to the even significand in nearest-even mode and
/// set the `tie` flag. Positive values round identically under
/// toward-negative and toward-zero.
pub fn round_exact(
    value: &ExactRational,
    format: &FpFormat,
    mode: RoundingMode,
) -> Result<Rounded, RangeError> {
    if !value.is_positive() {
        return Err(RangeError::NotPositive);
    }
    let mut exponent = value.floor_log2();
    // significand = value * 2^(n-1-e), truncated; remainder decides rounding
    let scaled = value * &ExactRational::pow2(format.precision as i32 - 1 - exponent);
    let (mut significand, remainder) = scaled.floor_with_remainder();
    let exact = remainder.is_zero();
    let mut tie = false;
    if !exact {
        let round_up = match mode {
            RoundingMode::NearestEven => {
                let twice: BigInt = remainder << 1;
                match twice.cmp(scaled.denom()) {
                    std::cmp::Ordering::Greater => true,
                    std::cmp::Ordering::Less => false,
                    std::cmp::Ordering::Equal => {
                        tie = true;
                        significand.is_odd()
                    }
                }
            }
            RoundingMode::TowardPositive => true,
            RoundingMode::TowardNegative | RoundingMode::TowardZero => false,
        };
        if round_up {
            significand += 1;
        }
    }
    let top = BigInt::from(1u64) << format.precision;
    if significand == top {
        significand >>= 1;
        exponent += 1;
    }
    let significand = u64::try_from(significand).expect("significand fits u64 by construction");
    debug_assert!(
        significand >= format.min_significand() && significand <= format.max_significand()
    );
    if exponent < format.min_exponent() {
        return Err(RangeError::Underflow { exponent });
    }
    if exponent > format.max_exponent() {
        return Err(RangeError::Overflow { exponent });
    }
    Ok(Rounded {
        significand,
        exponent,
        exact,
        tie,
    })
}

/// Correctly rounded 1/x for a positive normal x.
pub fn correctly_rounded_recip(
    x: Decoded,
    format: &FpFormat,
    mode: RoundingMode,
) -> Result<Rounded, RangeError> {
    let value = format.value_of(x.significand, x.exponent);
    round_exact(&value.recip(), format, mode)
}

/// Correctly rounded a/b for positive normal a, b.
pub fn correctly_rounded_div(
    a: Decoded,
    b: Decoded,
    format: &FpFormat,
    mode: RoundingMode,
) -> Result<Rounded, RangeError> {
    let va = format.value_of(a.significand, a.exponent);
    let vb = format.value_of(b.significand, b.exponent);
    round_exact(&va.div(&vb), format, mode)
}

/// Correctly rounded sqrt(x) for a positive normal x.
///
/// Works through an exact integer square root with remainder: the
/// significand is isqrt(x * 2^(2(n-1-f))) for the result exponent f, the
/// division remainder acts as a sticky flag, and the nearest/directed
/// decisions compare x against (s + 1/2)^2 resp. s^2 exactly. No
/// irrational value is ever materialized.
pub fn correctly_rounded_sqrt(
    x: Decoded,
    format: &FpFormat,
    mode: RoundingMode,
) -> Result<Rounded, RangeError> {
    let value = format.value_of(x.significand, x.exponent);
    if !value.is_positive() {
        return Err(RangeError::NotPositive);
    }
    // result exponent f: 2^(2f) <= x < 2^(2f+2)
    let e = value.floor_log2();
    let f = e.div_euclid(2);
    let n = format.precision;
    // target integer T = x * 2^(2(n-1-f)); significand = floor(sqrt(T))
    let scaled = &value * &ExactRational::pow2(2 * (n as i32 - 1 - f));
    let (t_int, t_rem) = scaled.floor_with_remainder();
    let root = t_int.sqrt();
    let root_rem = &t_int - &root * &root;
    let exact = t_rem.is_zero() && root_rem.is_zero();
    let mut significand = u64::try_from(&root).expect("root fits u64 for supported formats");
    let mut exponent = f;
    let mut tie = false;
    if !exact {
        let round_up = match mode {
            RoundingMode::NearestEven => {
                // sqrt(x) vs s + 1/2  <=>  4*x*2^(2(n-1-f)) vs (2s+1)^2
                let lhs = ExactRational::from_integer(4) * scaled.clone();
                let odd = (&root << 1) + BigInt::from(1);
                let rhs = ExactRational::from_integer(&odd * &odd);
                match lhs.cmp(&rhs) {
                    std::cmp::Ordering::Greater => true,
                    std::cmp::Ordering::Less => false,
                    std::cmp::Ordering::Equal => {
                        tie = true;
                        significand % 2 == 1
                    }
                }
            }
            RoundingMode::TowardPositive => true,
            RoundingMode::TowardNegative | RoundingMode::TowardZero => false,
        };
        if round_up {
            significand += 1;
        }
    }
    if significand == 1u64 << n {
        significand >>= 1;
        exponent += 1;
    }
    debug_assert!(
        significand >= format.min_significand() && significand <= format.max_significand(),
        "sqrt significand out of range: {significand:#x}"
    );
    if exponent < format.min_exponent() {
        return Err(RangeError::Underflow { exponent });
    }
    if exponent > format.max_exponent() {
        return Err(RangeError::Overflow { exponent });
    }
    Ok(Rounded {
        significand,
        exponent,
        exact,
        tie,
    })
}

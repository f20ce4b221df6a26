//! Unsigned fixed-point values with explicit bit structure.
//!
//! A [`Fixed`] carries its value in `bits` together with a width ledger:
//! `total` is the number of low-order bits that may be nonzero and `frac`
//! is the number of fraction bits, so the numeric value is exactly
//! `bits * 2^(-frac)`. `frac` may exceed `total`, meaning the binary point
//! sits left of the most significant stored bit and the leading fraction
//! bits are structurally zero.
//!
//! Widths are capped at 64 bits: the single-precision correction datapath
//! peaks at 48 bits, and anything wider belongs to [`crate::rational`].

use std::fmt;

use crate::rational::ExactRational;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Fixed {
    bits: u64,
    total: u32,
    frac: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FixedError {
    /// `bits` does not fit in `total` bits.
    ValueTooWide { bits: u64, total: u32 },
    /// A declared width exceeds 64 bits, or a product would.
    WidthOverflow { total: u32 },
    /// Slice bounds out of range or inverted.
    BadSlice { hi: u32, lo: u32, total: u32, frac: u32 },
}

impl fmt::Display for FixedError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FixedError::ValueTooWide { bits, total } => {
                write!(f, "value {bits:#x} does not fit in {total} bits")
            }
            FixedError::WidthOverflow { total } => {
                write!(f, "fixed-point width {total} exceeds the 64-bit cap")
            }
            FixedError::BadSlice { hi, lo, total, frac } => {
                write!(f, "slice [{hi}:{lo}] invalid for a ({total},{frac}) value")
            }
        }
    }
}

impl std::error::Error for FixedError {}

impl Fixed {
    /// A `(total, frac)` value. Fails if `bits` needs more than `total`
    /// bits or `total` exceeds 64.
    pub fn new(bits: u64, total: u32, frac: u32) -> Result<Fixed, FixedError> {
        if total > 64 {
            return Err(FixedError::WidthOverflow { total });
        }
        if total < 64 && bits >> total != 0 {
            return Err(FixedError::ValueTooWide { bits, total });
        }
        Ok(Fixed { bits, total, frac })
    }

    pub const fn bits(&self) -> u64 {
        self.bits
    }

    pub const fn total_bits(&self) -> u32 {
        self.total
    }

    pub const fn frac_bits(&self) -> u32 {
        self.frac
    }

    /// Exact numeric value `bits * 2^(-frac)`.
    pub fn value(&self) -> ExactRational {
        ExactRational::from_integer(self.bits) * ExactRational::pow2(-(self.frac as i32))
    }

    /// Extract bits `hi..=lo` (little-endian positions). The result is a
    /// `(hi-lo+1, frac-lo)` value, so bit 0 of the slice keeps the place
    /// value it had in `self` divided by 2^lo.
    pub fn slice(&self, hi: u32, lo: u32) -> Result<Fixed, FixedError> {
        if hi < lo || hi > 63 || lo > self.frac {
            return Err(FixedError::BadSlice {
                hi,
                lo,
                total: self.total,
                frac: self.frac,
            });
        }
        let width = hi - lo + 1;
        let mask = if width == 64 { u64::MAX } else { (1u64 << width) - 1 };
        Fixed::new((self.bits >> lo) & mask, width, self.frac - lo)
    }
}

/// Exact product: bits multiply, widths and fraction bits add.
/// Errs when the combined width would exceed the 64-bit cap.
pub fn fixed_mul(a: &Fixed, b: &Fixed) -> Result<Fixed, FixedError> {
    let total = a.total + b.total;
    if total > 64 {
        return Err(FixedError::WidthOverflow { total });
    }
    let wide = (a.bits as u128) * (b.bits as u128);
    debug_assert!(total == 64 || wide >> total == 0);
    Fixed::new(wide as u64, total, a.frac + b.frac)
}

impl fmt::Display for Fixed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#x}_({},{})", self.bits, self.total, self.frac)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fx(bits: u64, total: u32, frac: u32) -> Fixed {
        Fixed::new(bits, total, frac).unwrap()
    }

    #[test]
    fn value_is_bits_scaled() {
        assert_eq!(fx(6, 3, 2).value(), ExactRational::new(3, 2));
        // frac > total: leading fraction bits structurally zero
        assert_eq!(fx(1, 1, 4).value(), ExactRational::new(1, 16));
        assert_eq!(fx(0, 1, 0).value(), ExactRational::zero());
    }

    #[test]
    fn rejects_overwide_values() {
        assert!(Fixed::new(8, 3, 0).is_err());
        assert!(Fixed::new(u64::MAX, 64, 0).is_ok());
        assert!(Fixed::new(0, 65, 0).is_err());
    }

    #[test]
    fn mul_examples() {
        // 1.0 as (24,23) times 0.5 as (24,24) -> 0.5 as (48,47)
        let a = fx(1 << 23, 24, 23);
        let b = fx(1 << 23, 24, 24);
        let p = fixed_mul(&a, &b).unwrap();
        assert_eq!(p, fx(1 << 46, 48, 47));
        assert_eq!(p.value(), ExactRational::new(1, 2));

        // 1.5 * 1.5 = 2.25 exactly at (6,4)
        let c = fx(6, 3, 2);
        let p = fixed_mul(&c, &c).unwrap();
        assert_eq!(p, fx(36, 6, 4));
        assert_eq!(p.value(), ExactRational::new(9, 4));

        // direct integer multiply at full single-precision width
        let x = fx(0xC0_0000, 24, 23);
        let y = fx(0xAA_AAAB, 24, 24);
        let p = fixed_mul(&x, &y).unwrap();
        assert_eq!(p.bits(), 0xC0_0000u64 * 0xAA_AAAB);
        assert_eq!(p.bits(), (1u64 << 47) + (1 << 22));
        assert_eq!(p.total_bits(), 48);
        assert_eq!(p.frac_bits(), 47);
    }

    #[test]
    fn mul_overflow_is_reported() {
        let a = fx(1, 40, 0);
        let b = fx(1, 40, 0);
        assert_eq!(fixed_mul(&a, &b), Err(FixedError::WidthOverflow { total: 80 }));
    }

    #[test]
    fn slice_matches_shift_and_mask() {
        // R_(48,47)[26:22] is a (5,25) value
        let r = fx(88_919_240, 48, 47);
        let s = r.slice(26, 22).unwrap();
        assert_eq!(s.bits(), (88_919_240 >> 22) & 0x1F);
        assert_eq!(s.total_bits(), 5);
        assert_eq!(s.frac_bits(), 25);

        // Y_(24,24)[23:20] is a (4,4) value
        let y = fx(0xAA_AAAB, 24, 24);
        let s = y.slice(23, 20).unwrap();
        assert_eq!(s.bits(), 0xA);
        assert_eq!(s.total_bits(), 4);
        assert_eq!(s.frac_bits(), 4);
    }
}

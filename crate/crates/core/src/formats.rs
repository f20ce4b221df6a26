//! Floating-point format parameters, encode/decode of normal numbers, ulp
//! semantics and binades.
//!
//! Only positive/negative *normal* encodings are handled. Zero-exponent
//! fields (zero, subnormals) and all-ones exponent fields (infinities,
//! NaNs) are rejected with a distinct error; the correction datapaths and
//! scanners in this crate operate strictly on normal significands.

use std::fmt;

use crate::rational::ExactRational;

/// Parameters of a binary floating-point format.
///
/// `precision` counts significand bits *including* the implicit leading
/// one, so an encoding stores `precision - 1` fraction bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct FpFormat {
    pub name: &'static str,
    pub precision: u32,
    pub exponent_bits: u32,
    pub bias: i32,
}

/// IEEE 754 binary64.
pub const IEEE_DOUBLE: FpFormat = FpFormat::new("double", 53, 11, 1023);
/// IEEE 754 binary32.
pub const IEEE_SINGLE: FpFormat = FpFormat::new("single", 24, 8, 127);
/// IEEE 754 binary16 with the standard exponent bias of 15.
pub const IEEE_HALF: FpFormat = FpFormat::new("half", 11, 5, 15);
/// A binary16 variant with exponent bias 7. Some published format tables
/// list binary16 with this bias; it disagrees with IEEE 754 (bias 15), so
/// both are provided. Bias only shifts the exponent range; encode/decode
/// behave identically otherwise.
pub const HALF_BIAS7: FpFormat = FpFormat::new("half-b7", 11, 5, 7);
/// IBM DLFloat16: 6 exponent bits, 9 fraction bits.
pub const DLFLOAT16: FpFormat = FpFormat::new("dlfloat16", 10, 6, 32);
/// Google bfloat16: 8 exponent bits, 7 fraction bits.
pub const BFLOAT16: FpFormat = FpFormat::new("bfloat16", 8, 8, 127);

/// All built-in formats, in declaration order.
pub const KNOWN_FORMATS: [FpFormat; 6] = [
    IEEE_DOUBLE,
    IEEE_SINGLE,
    IEEE_HALF,
    HALF_BIAS7,
    DLFLOAT16,
    BFLOAT16,
];

impl FpFormat {
    pub const fn new(name: &'static str, precision: u32, exponent_bits: u32, bias: i32) -> Self {
        assert!(precision >= 2);
        assert!(exponent_bits >= 2);
        assert!(1 + exponent_bits + (precision - 1) <= 64);
        FpFormat {
            name,
            precision,
            exponent_bits,
            bias,
        }
    }

    pub fn by_name(name: &str) -> Option<FpFormat> {
        KNOWN_FORMATS.iter().copied().find(|f| f.name == name)
    }

    pub const fn total_bits(&self) -> u32 {
        1 + self.exponent_bits + (self.precision - 1)
    }

    /// Smallest unbiased exponent of a normal number (exponent field 1).
    pub const fn min_exponent(&self) -> i32 {
        1 - self.bias
    }

    /// Largest unbiased exponent of a normal number (exponent field
    /// 2^w - 2; the all-ones field is reserved).
    pub const fn max_exponent(&self) -> i32 {
        ((1u64 << self.exponent_bits) - 2) as i32 - self.bias
    }

    pub const fn min_significand(&self) -> u64 {
        1u64 << (self.precision - 1)
    }

    pub const fn max_significand(&self) -> u64 {
        (1u64 << self.precision) - 1
    }

    pub fn contains_exponent(&self, e: i32) -> bool {
        self.min_exponent() <= e && e <= self.max_exponent()
    }

    /// The exact value `significand / 2^(precision-1) * 2^exponent`.
    pub fn value_of(&self, significand: u64, exponent: i32) -> ExactRational {
        ExactRational::from_significand(significand, exponent, self.precision)
    }
}

impl fmt::Display for FpFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name)
    }
}

/// A decoded normal number: `(-1)^sign * significand / 2^(n-1) * 2^exponent`
/// with `2^(n-1) <= significand < 2^n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Decoded {
    pub sign: bool,
    pub exponent: i32,
    pub significand: u64,
}

/// The set of floating-point numbers sharing one exponent: [2^e, 2^(e+1)).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Binade {
    pub exponent: i32,
}

impl Binade {
    pub fn of(exponent: i32) -> Self {
        Binade { exponent }
    }

    pub fn lower(&self) -> ExactRational {
        ExactRational::pow2(self.exponent)
    }

    pub fn upper(&self) -> ExactRational {
        ExactRational::pow2(self.exponent + 1)
    }

    pub fn contains(&self, v: &ExactRational) -> bool {
        v >= &self.lower() && v < &self.upper()
    }

    /// The normal value `significand / 2^(n-1) * 2^e` for a significand in
    /// [2^(n-1), 2^n); unique given this binade.
    pub fn value(&self, significand: u64, precision: u32) -> ExactRational {
        ExactRational::from_significand(significand, self.exponent, precision)
    }
}

/// The four binary IEEE 754 rounding modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RoundingMode {
    NearestEven,
    TowardPositive,
    TowardNegative,
    TowardZero,
}

impl RoundingMode {
    pub const ALL: [RoundingMode; 4] = [
        RoundingMode::NearestEven,
        RoundingMode::TowardPositive,
        RoundingMode::TowardNegative,
        RoundingMode::TowardZero,
    ];

    pub fn by_name(name: &str) -> Option<RoundingMode> {
        match name {
            "ne" | "nearest-even" => Some(RoundingMode::NearestEven),
            "up" | "toward-positive" => Some(RoundingMode::TowardPositive),
            "down" | "toward-negative" => Some(RoundingMode::TowardNegative),
            "zero" | "toward-zero" => Some(RoundingMode::TowardZero),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            RoundingMode::NearestEven => "nearest-even",
            RoundingMode::TowardPositive => "toward-positive",
            RoundingMode::TowardNegative => "toward-negative",
            RoundingMode::TowardZero => "toward-zero",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FormatError {
    /// Exponent field is zero: the encoding is a zero or subnormal.
    SubnormalOrZero,
    /// Exponent field is all ones: the encoding is an infinity or NaN.
    InfinityOrNan,
    /// Encoding has bits set above the format's total width.
    EncodingTooWide { encoding: u64, total_bits: u32 },
    /// Significand outside [2^(n-1), 2^n).
    SignificandOutOfRange { significand: u64 },
    /// Exponent outside the format's normal range.
    ExponentOutOfRange { exponent: i32 },
}

impl fmt::Display for FormatError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormatError::SubnormalOrZero => {
                write!(f, "zero exponent field (zero/subnormal) is not supported")
            }
            FormatError::InfinityOrNan => {
                write!(f, "all-ones exponent field (inf/NaN) is not supported")
            }
            FormatError::EncodingTooWide {
                encoding,
                total_bits,
            } => write!(
                f,
                "encoding {encoding:#x} wider than the format's {total_bits} bits"
            ),
            FormatError::SignificandOutOfRange { significand } => {
                write!(f, "significand {significand:#x} outside [2^(n-1), 2^n)")
            }
            FormatError::ExponentOutOfRange { exponent } => {
                write!(f, "exponent {exponent} outside the format's normal range")
            }
        }
    }
}

impl std::error::Error for FormatError {}

/// Unpack a normal encoding into (sign, unbiased exponent, significand with
/// the implicit leading one restored).
pub fn decode(format: &FpFormat, encoding: u64) -> Result<Decoded, FormatError> {
    let total = format.total_bits();
    if total < 64 && encoding >> total != 0 {
        return Err(FormatError::EncodingTooWide {
            encoding,
            total_bits: total,
        });
    }
    let frac_bits = format.precision - 1;
    let exp_field = (encoding >> frac_bits) & ((1u64 << format.exponent_bits) - 1);
    if exp_field == 0 {
        return Err(FormatError::SubnormalOrZero);
    }
    if exp_field == (1u64 << format.exponent_bits) - 1 {
        return Err(FormatError::InfinityOrNan);
    }
    let sign = (encoding >> (total - 1)) & 1 == 1;
    let fraction = encoding & ((1u64 << frac_bits) - 1);
    Ok(Decoded {
        sign,
        exponent: exp_field as i32 - format.bias,
        significand: (1u64 << frac_bits) | fraction,
    })
}

/// Pack a normal number back into its encoding. Inverse of [`decode`].
pub fn encode(format: &FpFormat, value: Decoded) -> Result<u64, FormatError> {
    let frac_bits = format.precision - 1;
    if value.significand < format.min_significand()
        || value.significand > format.max_significand()
    {
        return Err(FormatError::SignificandOutOfRange {
            significand: value.significand,
        });
    }
    if !format.contains_exponent(value.exponent) {
        return Err(FormatError::ExponentOutOfRange {
            exponent: value.exponent,
        });
    }
    let exp_field = (value.exponent + format.bias) as u64;
    let fraction = value.significand & ((1u64 << frac_bits) - 1);
    let sign = (value.sign as u64) << (format.total_bits() - 1);
    Ok(sign | (exp_field << frac_bits) | fraction)
}

/// Unit in the last place for a given binade: exactly 2^(e - (n-1)).
/// Constant across the binade; the place value of the lowest significand
/// bit.
pub fn ulp(format: &FpFormat, exponent: i32) -> ExactRational {
    debug_assert!(format.contains_exponent(exponent));
    ExactRational::pow2(exponent - (format.precision as i32 - 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn decode_single_worked_example() {
        // sign=0, exponent field=127, fraction bits 22 and 20 -> 1.625
        let encoding = (127u64 << 23) | (1 << 22) | (1 << 20);
        let d = decode(&IEEE_SINGLE, encoding).unwrap();
        assert!(!d.sign);
        assert_eq!(d.exponent, 0);
        assert_eq!(
            IEEE_SINGLE.value_of(d.significand, d.exponent),
            ExactRational::new(13, 8)
        );
    }

    #[test]
    fn decode_single_one() {
        let encoding = 127u64 << 23; // 1.0f32
        let d = decode(&IEEE_SINGLE, encoding).unwrap();
        assert_eq!(
            d,
            Decoded {
                sign: false,
                exponent: 0,
                significand: 1 << 23
            }
        );
    }

    #[test]
    fn decode_bfloat16_one_and_a_half() {
        // 1.5 in bfloat16: exponent field 127, top fraction bit set
        let encoding = (127u64 << 7) | (1 << 6);
        let d = decode(&BFLOAT16, encoding).unwrap();
        assert_eq!(d.exponent, 0);
        assert_eq!(d.significand, 0b1100_0000);
    }

    #[test]
    fn decode_rejects_non_normal() {
        assert_eq!(
            decode(&IEEE_SINGLE, 0x0040_0000),
            Err(FormatError::SubnormalOrZero)
        );
        assert_eq!(
            decode(&IEEE_SINGLE, 0x7F80_0000),
            Err(FormatError::InfinityOrNan)
        );
        assert_eq!(
            decode(&IEEE_HALF, 1 << 20),
            Err(FormatError::EncodingTooWide {
                encoding: 1 << 20,
                total_bits: 16
            })
        );
    }

    #[test]
    fn encode_decode_identity_single_samples() {
        for encoding in [
            0x3F80_0000u64, // 1.0
            0x3FC0_0000,    // 1.5
            0x7F7F_FFFF,    // largest normal
            0x0080_0000,    // smallest normal
            0xBF99_999A,    // -1.2
        ] {
            let d = decode(&IEEE_SINGLE, encoding).unwrap();
            assert_eq!(encode(&IEEE_SINGLE, d).unwrap(), encoding);
        }
    }

    #[test]
    fn table_constants() {
        assert_eq!(IEEE_DOUBLE.total_bits(), 64);
        assert_eq!(IEEE_SINGLE.total_bits(), 32);
        assert_eq!(IEEE_HALF.total_bits(), 16);
        assert_eq!(HALF_BIAS7.total_bits(), 16);
        assert_eq!(DLFLOAT16.total_bits(), 16);
        assert_eq!(BFLOAT16.total_bits(), 16);
        assert_eq!(IEEE_SINGLE.min_exponent(), -126);
        assert_eq!(IEEE_SINGLE.max_exponent(), 127);
        // the bias-7 binary16 variant shifts the range, nothing else
        assert_eq!(HALF_BIAS7.min_exponent(), -6);
        assert_eq!(HALF_BIAS7.max_exponent(), 23);
    }

    #[test]
    fn ulp_examples() {
        assert_eq!(ulp(&IEEE_SINGLE, 0), ExactRational::pow2(-23));
        assert_eq!(ulp(&IEEE_SINGLE, -1), ExactRational::pow2(-24));
        assert_eq!(ulp(&IEEE_HALF, 3), ExactRational::pow2(-7));
        assert_eq!(ulp(&HALF_BIAS7, 3), ExactRational::pow2(-7));
    }

    #[test]
    fn binade_membership() {
        let b = Binade::of(0);
        assert!(b.contains(&ExactRational::new(3, 2)));
        assert!(b.contains(&ExactRational::from_integer(1)));
        assert!(!b.contains(&ExactRational::from_integer(2)));
        assert!(!b.contains(&ExactRational::new(99, 100)));
        assert_eq!(b.value(0xC0_0000, 24), ExactRational::new(3, 2));
    }
}

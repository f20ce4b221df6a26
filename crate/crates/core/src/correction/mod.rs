//! The Final Correction kernels.
//!
//! Given an approximation of 1/x, a/b or sqrt(x) that underestimates the
//! true value by at most a few ulps, these kernels return the correctly
//! rounded result using only fixed-point integer adds, multiplies and
//! *strict* comparisons. The exact residual (1 - x*y, a - b*q, x - y^2)
//! is an exactly representable proxy for the error; a cheap leading-bits
//! estimate narrows the correction to two adjacent candidates c and c+1,
//! and one exact comparison of the residual against the branch point
//! between them decides. Equality at a branch point would mean the true
//! result sits on a rounding boundary, which the theorems verified in
//! [`crate::theory`] rule out, so no equality test is needed; the kernels
//! still count equality observations so sweeps can assert they never
//! happen.
//!
//! All kernels are generic over the significand width n (single precision
//! is n = 24 and reproduces the reference C realization bit for bit) and
//! are pure functions safe for concurrent use.

mod div;
mod recip;
mod sqrt;

pub use div::{correct_div_fixed, correct_div_fixed_traced, DivTrace};
pub use recip::{
    compute_residual_recip, correct_recip_fixed, correct_recip_fixed_traced,
    correct_recip_general, correct_recip_general_traced, GeneralRecipTrace, RecipTrace,
};
pub use sqrt::{correct_sqrt_fixed, correct_sqrt_fixed_traced, SqrtTrace};

use std::fmt;

/// Widths and bounds of one correction variant.
///
/// The correction estimate is `((R >> r_shift) * (Y >> y_shift) + addend)
/// >> post_shift`, where the shifts follow from the leading-bit widths and
/// the format precision; `max_correction_value` is the hard cap asserted
/// inside the kernel (the correction register width) and
/// `max_correctable_ulps` is the documented error budget the variant is
/// meant to repair.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CorrectionConfig {
    pub name: &'static str,
    /// Leading bits of the residual feeding the small multiplier.
    pub residual_leading_bits: u32,
    /// Leading bits of the approximation feeding the small multiplier.
    pub approx_leading_bits: u32,
    /// Optional power-of-two addend applied before the final shift; turns
    /// the truncating estimate into a rounding one.
    pub rounding_addend: Option<u64>,
    /// Final right shift of the small product.
    pub post_shift: u32,
    /// Kernel assertion cap on the correction integer C.
    pub max_correction_value: u64,
    /// Documented maximum error (in ulps of injected underestimate) the
    /// variant corrects.
    pub max_correctable_ulps: u32,
}

/// 4-by-3 multiply, no rounding addend; corrects up to 3 ulps.
pub const MUL_4X3: CorrectionConfig = CorrectionConfig {
    name: "4x3",
    residual_leading_bits: 4,
    approx_leading_bits: 3,
    rounding_addend: None,
    post_shift: 5,
    max_correction_value: 3,
    max_correctable_ulps: 3,
};

/// 5-by-3 multiply with rounding addend 2^4.
pub const MUL_5X3_ROUNDED: CorrectionConfig = CorrectionConfig {
    name: "5x3r",
    residual_leading_bits: 5,
    approx_leading_bits: 3,
    rounding_addend: Some(1 << 4),
    post_shift: 5,
    max_correction_value: 7,
    max_correctable_ulps: 6,
};

/// 5-by-4 multiply with rounding addend 2^4; the widest shipped variant.
pub const MUL_5X4_ROUNDED: CorrectionConfig = CorrectionConfig {
    name: "5x4r",
    residual_leading_bits: 5,
    approx_leading_bits: 4,
    rounding_addend: Some(1 << 4),
    post_shift: 5,
    max_correction_value: 7,
    max_correctable_ulps: 7,
};

pub const VARIANTS: [&CorrectionConfig; 3] = [&MUL_4X3, &MUL_5X3_ROUNDED, &MUL_5X4_ROUNDED];

impl CorrectionConfig {
    pub fn by_name(name: &str) -> Option<&'static CorrectionConfig> {
        VARIANTS.iter().copied().find(|v| v.name == name)
    }

    /// Shift extracting the approximation's leading bits at precision n.
    pub fn approx_shift(&self, precision: u32) -> u32 {
        precision - self.approx_leading_bits
    }

    /// Shift extracting the residual's leading bits at precision n; chosen
    /// so that the scaled product estimates the error in ulps:
    /// residual_shift + approx_shift + post_shift = 2n - 1.
    pub fn residual_shift(&self, precision: u32) -> u32 {
        (2 * precision - 1) - self.post_shift - self.approx_shift(precision)
    }
}

impl fmt::Display for CorrectionConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name)
    }
}

/// Structured kernel failures. A kernel never silently produces a wrong
/// result: violated preconditions surface as one of these.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum KernelError {
    /// Operand widths do not match the expected (total, frac) shapes.
    ShapeMismatch { expected_precision: u32, what: &'static str },
    /// Significand width outside the supported 8..=30 range.
    UnsupportedPrecision { precision: u32 },
    /// The approximation overestimates the true value: the residual would
    /// be negative. `excess` is how far x*y (resp. b*q, y^2) overshoots.
    NegativeResidual { excess: u64 },
    /// Residual too large for the variant's error window.
    ResidualTooLarge { residual: u64, limit: u64 },
    /// Correction estimate exceeds the variant's register cap.
    CorrectionTooLarge { correction: u64, limit: u64 },
    /// Requested error bound exceeds what the datapath widths admit.
    ErrorBoundTooLarge { bound: u32, limit: u32 },
    /// Corrected result left the output binade.
    ResultOutOfBinade { bits: u64 },
}

impl fmt::Display for KernelError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelError::ShapeMismatch {
                expected_precision,
                what,
            } => write!(f, "{what} has the wrong shape for precision {expected_precision}"),
            KernelError::UnsupportedPrecision { precision } => {
                write!(f, "precision {precision} outside supported range 8..=30")
            }
            KernelError::NegativeResidual { excess } => write!(
                f,
                "approximation overestimates the true value (residual negative by {excess:#x})"
            ),
            KernelError::ResidualTooLarge { residual, limit } => {
                write!(f, "residual {residual:#x} at or above limit {limit:#x}")
            }
            KernelError::CorrectionTooLarge { correction, limit } => {
                write!(f, "correction {correction} above cap {limit}")
            }
            KernelError::ErrorBoundTooLarge { bound, limit } => {
                write!(f, "error bound {bound} ulps above datapath limit {limit}")
            }
            KernelError::ResultOutOfBinade { bits } => {
                write!(f, "corrected result {bits:#x} left the output binade")
            }
        }
    }
}

impl std::error::Error for KernelError {}

pub(crate) const MIN_PRECISION: u32 = 8;
pub(crate) const MAX_PRECISION: u32 = 30;

pub(crate) fn check_precision(n: u32) -> Result<(), KernelError> {
    if !(MIN_PRECISION..=MAX_PRECISION).contains(&n) {
        return Err(KernelError::UnsupportedPrecision { precision: n });
    }
    Ok(())
}

/// Leading-bits error estimate for the division-flavoured datapaths:
/// `floor((residual >> t) / ((denominator >> t) + 1))` with t sized to
/// keep a ~6-bit divisor. Always an underestimate of
/// residual/denominator, and by less than 1.5, so the true correction is
/// this estimate or the next integer up.
pub(crate) fn leading_bits_quotient(residual: u64, denominator: u64, t: u32) -> u64 {
    (residual >> t) / ((denominator >> t) + 1)
}

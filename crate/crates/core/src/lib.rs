//! Bit-exact correction of floating-point reciprocal, division and square
//! root estimates, together with the machinery needed to verify it.
//!
//! The library has three layers:
//!
//! * exact ground truth: [`ExactRational`] arithmetic and the rounding
//!   oracle in [`oracle`], which produce the correctly rounded result for
//!   any supported format and rounding mode;
//! * the correction kernels in [`correction`], which repair an approximate
//!   reciprocal/quotient/root (up to a per-variant ulp budget) into the
//!   correctly rounded result using only fixed-point adds, multiplies and
//!   strict comparisons;
//! * verification: brute-force midpoint scanners in [`theory`] and the
//!   sweep harness in [`harness`], which check the kernels against the
//!   oracle exhaustively at desk scale.
//!
//! All types are plain values and all operations are pure functions, so
//! everything here is safe to call from any number of threads.

pub mod correction;
pub mod fixed;
pub mod formats;
pub mod harness;
pub mod oracle;
pub mod rational;
pub mod theory;

pub use correction::{
    correct_div_fixed, correct_recip_fixed, correct_recip_general, correct_sqrt_fixed,
    compute_residual_recip, CorrectionConfig, KernelError, MUL_4X3, MUL_5X3_ROUNDED,
    MUL_5X4_ROUNDED, VARIANTS,
};
pub use fixed::Fixed;
pub use formats::{Binade, Decoded, FpFormat, RoundingMode};
pub use oracle::{correctly_rounded_div, correctly_rounded_recip, correctly_rounded_sqrt, Rounded};
pub use rational::ExactRational;
pub use theory::{classify_exact, ScanReport, Verdict};

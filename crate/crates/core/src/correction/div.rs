//! Division correction.
//!
//! Mirrors the reciprocal structure: exact residual r = a - b*q at double
//! width, a leading-bits estimate of the error, and one exact strict
//! comparison against the branch point (2c+1)*delta/2 with delta = b*ulp.
//! The reciprocal kernel can estimate the error with a tiny multiply
//! because an approximate 1/x is sitting right there in the datapath;
//! division has no reciprocal operand, so the estimate is a tiny division
//! of leading bits instead (in hardware, a lookup on the top bits of r
//! and b). The quotient exponent is the caller's business; in
//! significand space the output binade is [1,2) when the numerator
//! significand is at least the denominator's and (1/2,1) otherwise.

use crate::fixed::Fixed;

use super::{check_precision, leading_bits_quotient, CorrectionConfig, KernelError};

#[derive(Clone, Copy, Debug)]
pub struct DivTrace {
    pub precision: u32,
    pub variant: &'static str,
    pub a_bits: u64,
    pub b_bits: u64,
    pub q_input_bits: u64,
    /// Quotient approximation after the clamp onto the binade's lower
    /// endpoint.
    pub q_bits: u64,
    /// Output in [1,2) (true) or (1/2,1) (false).
    pub upper_binade: bool,
    /// Residual a - b*q, fraction bits 2n-2 (upper) or 2n-1 (lower).
    pub residual_bits: u64,
    /// Leading-bits estimate of the error in ulps.
    pub correction: u64,
    /// Branch point (2C+1)*B in residual scale.
    pub branch_point_bits: u64,
    pub candidate_low: u64,
    pub candidate_high: u64,
    pub tie: bool,
    pub took_upper: bool,
    pub result_bits: u64,
}

impl DivTrace {
    pub fn result(&self) -> Fixed {
        let frac = if self.upper_binade {
            self.precision - 1
        } else {
            self.precision
        };
        Fixed::new(self.result_bits, self.precision, frac)
            .expect("kernel result fits its declared shape")
    }
}

/// Correct an underestimated quotient approximation to round-to-nearest-
/// even.
///
/// `a` and `b` are (n, n-1) significands in [1,2); `q` approximates a/b
/// from below by at most the variant's error budget, shaped (n, n-1) when
/// a.bits >= b.bits and (n, n) otherwise.
pub fn correct_div_fixed(
    a: &Fixed,
    b: &Fixed,
    q: &Fixed,
    config: &CorrectionConfig,
) -> Result<Fixed, KernelError> {
    correct_div_fixed_traced(a, b, q, config).map(|t| t.result())
}

pub fn correct_div_fixed_traced(
    a: &Fixed,
    b: &Fixed,
    q: &Fixed,
    config: &CorrectionConfig,
) -> Result<DivTrace, KernelError> {
    let n = a.total_bits();
    check_precision(n)?;
    if a.frac_bits() != n - 1 {
        return Err(KernelError::ShapeMismatch {
            expected_precision: n,
            what: "a",
        });
    }
    if b.total_bits() != n || b.frac_bits() != n - 1 {
        return Err(KernelError::ShapeMismatch {
            expected_precision: n,
            what: "b",
        });
    }
    let upper_binade = a.bits() >= b.bits();
    let expected_frac = if upper_binade { n - 1 } else { n };
    if q.total_bits() != n || q.frac_bits() != expected_frac {
        return Err(KernelError::ShapeMismatch {
            expected_precision: n,
            what: "q",
        });
    }

    // Clamp onto the binade's lower endpoint: 1.0 as (n,n-1) or 0.5 as
    // (n,n), both the same bit pattern.
    let low = 1u64 << (n - 1);
    let q_bits = q.bits().max(low);

    let mut trace = DivTrace {
        precision: n,
        variant: config.name,
        a_bits: a.bits(),
        b_bits: b.bits(),
        q_input_bits: q.bits(),
        q_bits,
        upper_binade,
        residual_bits: 0,
        correction: 0,
        branch_point_bits: 0,
        candidate_low: 0,
        candidate_high: 0,
        tie: false,
        took_upper: false,
        result_bits: 0,
    };

    // r = a - b*q; scaling a by the quotient's fraction width puts the
    // ulp-sized step delta = b*ulp(q) at exactly b.bits in residual scale.
    let scale = if upper_binade { n - 1 } else { n };
    let scaled_a = (a.bits() as i128) << scale;
    let residual = scaled_a - (b.bits() as i128) * (q_bits as i128);
    if residual < 0 {
        return Err(KernelError::NegativeResidual {
            excess: residual.unsigned_abs() as u64,
        });
    }
    let residual = residual as u64;
    trace.residual_bits = residual;

    // error < budget + 1  <=>  2r < (2 budget + 2) * delta
    let window = (2 * config.max_correctable_ulps as u64 + 2) * b.bits();
    if 2 * residual >= window {
        return Err(KernelError::ResidualTooLarge {
            residual,
            limit: window.div_ceil(2),
        });
    }

    let correction = leading_bits_quotient(residual, b.bits(), n - 6);
    trace.correction = correction;
    if correction > config.max_correction_value {
        return Err(KernelError::CorrectionTooLarge {
            correction,
            limit: config.max_correction_value,
        });
    }

    let branch_point = (2 * correction + 1) * b.bits();
    trace.branch_point_bits = branch_point;
    trace.candidate_low = q_bits + correction;
    trace.candidate_high = q_bits + correction + 1;
    trace.tie = 2 * residual == branch_point;
    trace.took_upper = 2 * residual >= branch_point;
    trace.result_bits = if trace.took_upper {
        trace.candidate_high
    } else {
        trace.candidate_low
    };
    if trace.result_bits >= 1u64 << n {
        return Err(KernelError::ResultOutOfBinade {
            bits: trace.result_bits,
        });
    }
    Ok(trace)
}

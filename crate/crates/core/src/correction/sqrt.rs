//! Square-root correction.
//!
//! Square root maps the two input binades [1,2) and [2,4) onto [1,2), so
//! the input significand arrives pre-scaled: x.bits = X in
//! [2^(n-1), 2^(n+1)) with fraction n-1. The residual r = x - y^2 is
//! exact at double width. The rounding boundary between corrections c and
//! c+1 sits where sqrt(x) = y + (c + 1/2)u, i.e. where
//! r = (2c+1)*y*u + ((2c+1)u)^2 / 4, and both terms are exact once
//! everything is scaled by 4. The error estimate divides the residual's
//! leading bits by those of 2y, since r ~ error * u * 2y.

use crate::fixed::Fixed;

use super::{check_precision, leading_bits_quotient, CorrectionConfig, KernelError};

#[derive(Clone, Copy, Debug)]
pub struct SqrtTrace {
    pub precision: u32,
    pub variant: &'static str,
    /// Input X = x * 2^(n-1) for x in [1, 4).
    pub x_bits: u64,
    pub y_input_bits: u64,
    pub y_bits: u64,
    /// x == 1 shortcut.
    pub shortcut: bool,
    /// Residual x - y^2, fraction bits 2n-2.
    pub residual_bits: u64,
    pub correction: u64,
    /// Branch point comparison at fraction 2n: lhs = 4r,
    /// rhs = 4(2C+1)y + (2C+1)^2.
    pub compare_lhs: u64,
    pub compare_rhs: u64,
    pub candidate_low: u64,
    pub candidate_high: u64,
    pub tie: bool,
    pub took_upper: bool,
    pub result_bits: u64,
}

impl SqrtTrace {
    pub fn result(&self) -> Fixed {
        Fixed::new(self.result_bits, self.precision, self.precision - 1)
            .expect("kernel result fits its declared shape")
    }
}

/// Correct an underestimated square-root approximation to round-to-
/// nearest-even.
///
/// `x` holds a value in [1, 4) as a (n+1, n-1) fixed-point number (values
/// below 2 also pass shape (n, n-1)); `y` approximates sqrt(x) from below
/// by at most the variant's error budget, shaped (n, n-1).
pub fn correct_sqrt_fixed(
    x: &Fixed,
    y: &Fixed,
    config: &CorrectionConfig,
) -> Result<Fixed, KernelError> {
    correct_sqrt_fixed_traced(x, y, config).map(|t| t.result())
}

pub fn correct_sqrt_fixed_traced(
    x: &Fixed,
    y: &Fixed,
    config: &CorrectionConfig,
) -> Result<SqrtTrace, KernelError> {
    let n = y.total_bits();
    check_precision(n)?;
    if y.frac_bits() != n - 1 {
        return Err(KernelError::ShapeMismatch {
            expected_precision: n,
            what: "y",
        });
    }
    if x.frac_bits() != n - 1 || x.total_bits() < n || x.total_bits() > n + 1 {
        return Err(KernelError::ShapeMismatch {
            expected_precision: n,
            what: "x",
        });
    }

    let one = 1u64 << (n - 1);
    let mut trace = SqrtTrace {
        precision: n,
        variant: config.name,
        x_bits: x.bits(),
        y_input_bits: y.bits(),
        y_bits: y.bits(),
        shortcut: false,
        residual_bits: 0,
        correction: 0,
        compare_lhs: 0,
        compare_rhs: 0,
        candidate_low: 0,
        candidate_high: 0,
        tie: false,
        took_upper: false,
        result_bits: 0,
    };

    if x.bits() == one {
        trace.shortcut = true;
        trace.result_bits = one;
        return Ok(trace);
    }

    let y_bits = y.bits().max(one);
    trace.y_bits = y_bits;

    // r = x - y^2 at fraction 2n-2
    let scaled_x = (x.bits() as i128) << (n - 1);
    let residual = scaled_x - (y_bits as i128) * (y_bits as i128);
    if residual < 0 {
        return Err(KernelError::NegativeResidual {
            excess: residual.unsigned_abs() as u64,
        });
    }
    let residual = residual as u64;
    trace.residual_bits = residual;

    // r = e*(2Y + e) for error e in ulps; cap at e < budget + 1
    let budget = config.max_correctable_ulps as u64;
    let window = (budget + 1) * (2 * y_bits + budget + 1);
    if residual >= window {
        return Err(KernelError::ResidualTooLarge {
            residual,
            limit: window,
        });
    }

    let correction = leading_bits_quotient(residual, 2 * y_bits, n - 5);
    trace.correction = correction;
    if correction > config.max_correction_value {
        return Err(KernelError::CorrectionTooLarge {
            correction,
            limit: config.max_correction_value,
        });
    }

    // sqrt(x) vs y + (c + 1/2)u  <=>  4r vs 4(2c+1)Y + (2c+1)^2
    let odd = 2 * correction + 1;
    let lhs = 4 * residual;
    let rhs = 4 * odd * y_bits + odd * odd;
    trace.compare_lhs = lhs;
    trace.compare_rhs = rhs;
    trace.candidate_low = y_bits + correction;
    trace.candidate_high = y_bits + correction + 1;
    trace.tie = lhs == rhs;
    trace.took_upper = lhs >= rhs;
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

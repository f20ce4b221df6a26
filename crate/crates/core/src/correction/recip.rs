//! Reciprocal correction kernels.
//!
//! `correct_recip_fixed` is the underestimate-only nearest-even datapath:
//! at n = 24 it reproduces the reference C realization bit for bit,
//! including the x == 1 shortcut, the clamp of low approximations up to
//! 0.5, the exact residual R = 1 - X*Y at double width, the small
//! leading-bits multiply (with optional rounding addend) that estimates
//! the correction C, the branch point B = (2C+1)*X and the strict
//! comparison 2R < B selecting between Y+C and Y+C+1.
//!
//! `correct_recip_general` accepts signed errors and all four rounding
//! modes. For nearest modes the branch points sit at odd multiples of
//! delta/2 = x*ulp/2; for directed modes they sit at whole multiples of
//! delta. Both facts follow from the interval structure of equal
//! correction; only strict comparisons are ever performed.

use crate::fixed::Fixed;
use crate::formats::RoundingMode;

use super::{
    check_precision, leading_bits_quotient, CorrectionConfig, KernelError,
};

/// Full record of one fixed-kernel evaluation; every intermediate of the
/// datapath, for tracing and width-ledger checks.
#[derive(Clone, Copy, Debug)]
pub struct RecipTrace {
    pub precision: u32,
    pub variant: &'static str,
    /// Input X, a (n, n-1) value in [1, 2).
    pub x_bits: u64,
    /// Approximation Y as passed, (n, n) shape.
    pub y_input_bits: u64,
    /// Y after the clamp up to 0.5.
    pub y_bits: u64,
    /// Took the x == 1 shortcut; later fields are zero.
    pub shortcut: bool,
    /// Residual R = 1 - X*Y, a (2n, 2n-1) value.
    pub residual_bits: u64,
    /// R >> residual_shift, left multiplier operand.
    pub residual_top_bits: u64,
    /// Y >> approx_shift, right multiplier operand.
    pub approx_top_bits: u64,
    /// Correction integer C, in ulps.
    pub correction: u64,
    /// Branch point B = (2C+1)*X, a (n+4, 2n-1) value.
    pub branch_point_bits: u64,
    /// Candidates Y+C and Y+C+1.
    pub candidate_low: u64,
    pub candidate_high: u64,
    /// The strict comparison 2R < B came out equal (must never happen).
    pub tie: bool,
    pub took_upper: bool,
    /// Selected significand. (n, n) shape, or (n, n-1) on the shortcut
    /// path (the output binade of a power of two differs).
    pub result_bits: u64,
}

impl RecipTrace {
    pub fn result(&self) -> Fixed {
        let frac = if self.shortcut {
            self.precision - 1
        } else {
            self.precision
        };
        Fixed::new(self.result_bits, self.precision, frac)
            .expect("kernel result fits its declared shape")
    }
}

fn expect_shape(v: &Fixed, total: u32, frac: u32, what: &'static str) -> Result<(), KernelError> {
    if v.total_bits() != total || v.frac_bits() != frac {
        return Err(KernelError::ShapeMismatch {
            expected_precision: total,
            what,
        });
    }
    Ok(())
}

/// Exact residual 1 - x*y as a (2n, 2n-1) value. Errs if the product
/// exceeds one (the approximation overestimates) or widths overflow.
pub fn compute_residual_recip(x: &Fixed, y: &Fixed) -> Result<Fixed, KernelError> {
    let n = x.total_bits();
    check_precision(n)?;
    if x.frac_bits() != n - 1 {
        return Err(KernelError::ShapeMismatch {
            expected_precision: n,
            what: "x",
        });
    }
    // y is (n, n) in the datapath; (n+1, n) is tolerated so that the exact
    // value 1.0 can be expressed.
    if y.frac_bits() != n || y.total_bits() > n + 1 {
        return Err(KernelError::ShapeMismatch {
            expected_precision: n,
            what: "y",
        });
    }
    let one = 1u64 << (2 * n - 1);
    let product = x.bits() * y.bits();
    if product > one {
        return Err(KernelError::NegativeResidual {
            excess: product - one,
        });
    }
    Ok(Fixed::new(one - product, 2 * n, 2 * n - 1).expect("residual fits double width"))
}

/// Underestimate-form nearest-even reciprocal correction.
///
/// `x` is a (n, n-1) significand in [1, 2); `y` a (n, n) approximation of
/// 1/x that does not exceed it and is short by at most the variant's
/// error budget. Returns the correctly rounded significand of 1/x.
pub fn correct_recip_fixed(
    x: &Fixed,
    y: &Fixed,
    config: &CorrectionConfig,
) -> Result<Fixed, KernelError> {
    correct_recip_fixed_traced(x, y, config).map(|t| t.result())
}

pub fn correct_recip_fixed_traced(
    x: &Fixed,
    y: &Fixed,
    config: &CorrectionConfig,
) -> Result<RecipTrace, KernelError> {
    let n = x.total_bits();
    check_precision(n)?;
    expect_shape(x, n, n - 1, "x")?;
    expect_shape(y, n, n, "y")?;

    let one_x = 1u64 << (n - 1);
    let mut trace = RecipTrace {
        precision: n,
        variant: config.name,
        x_bits: x.bits(),
        y_input_bits: y.bits(),
        y_bits: y.bits(),
        shortcut: false,
        residual_bits: 0,
        residual_top_bits: 0,
        approx_top_bits: 0,
        correction: 0,
        branch_point_bits: 0,
        candidate_low: 0,
        candidate_high: 0,
        tie: false,
        took_upper: false,
        result_bits: 0,
    };

    // x == 1 <=> 1/x == 1; the output binade shifts, the pattern repeats.
    if x.bits() == one_x {
        trace.shortcut = true;
        trace.result_bits = one_x;
        return Ok(trace);
    }

    // The 1.0 pattern at (n, n) reads as 0.5: approximations left of the
    // output binade are projected onto its lower endpoint.
    let half = one_x;
    let y_bits = y.bits().max(half);
    trace.y_bits = y_bits;

    let one_r = 1u64 << (2 * n - 1);
    let product = x.bits() * y_bits;
    if product > one_r {
        return Err(KernelError::NegativeResidual {
            excess: product - one_r,
        });
    }
    let residual = one_r - product;
    trace.residual_bits = residual;
    // Within an 8-ulp error budget the subtraction cancels down to n+3
    // bits; wider residuals mean the precondition was violated.
    let residual_limit = 1u64 << (n + 3);
    if residual >= residual_limit {
        return Err(KernelError::ResidualTooLarge {
            residual,
            limit: residual_limit,
        });
    }

    let residual_top = residual >> config.residual_shift(n);
    let approx_top = y_bits >> config.approx_shift(n);
    trace.residual_top_bits = residual_top;
    trace.approx_top_bits = approx_top;
    let correction =
        (residual_top * approx_top + config.rounding_addend.unwrap_or(0)) >> config.post_shift;
    trace.correction = correction;
    if correction > config.max_correction_value {
        return Err(KernelError::CorrectionTooLarge {
            correction,
            limit: config.max_correction_value,
        });
    }

    let branch_point = (2 * correction + 1) * x.bits();
    trace.branch_point_bits = branch_point;
    trace.candidate_low = y_bits + correction;
    trace.candidate_high = y_bits + correction + 1;
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

/// Trace of the signed-error, any-mode reciprocal correction.
#[derive(Clone, Copy, Debug)]
pub struct GeneralRecipTrace {
    pub precision: u32,
    pub mode: RoundingMode,
    pub x_bits: u64,
    pub y_input_bits: u64,
    pub y_bits: u64,
    pub shortcut: bool,
    /// Residual 1 - x*y may be negative here.
    pub residual_negative: bool,
    pub residual_magnitude: u64,
    /// Leading-bits estimate of |error| in ulps.
    pub estimate: u64,
    /// Signed correction applied, in ulps.
    pub correction: i64,
    /// Odd multiple (2k+1) of delta/2 at the decisive nearest-mode branch
    /// point, or the whole multiple k of delta for directed modes.
    pub branch_multiple: i64,
    pub tie: bool,
    pub result_bits: u64,
}

impl GeneralRecipTrace {
    pub fn result(&self) -> Fixed {
        let frac = if self.shortcut {
            self.precision - 1
        } else {
            self.precision
        };
        Fixed::new(self.result_bits, self.precision, frac)
            .expect("kernel result fits its declared shape")
    }
}

/// Signed-error reciprocal correction for all four rounding modes.
///
/// `y` may miss 1/x in either direction by at most `error_bound_ulps`
/// ulps. Branch points are odd multiples of delta/2 for nearest-even and
/// whole multiples of delta for the directed modes; every comparison is
/// strict. Power-of-two inputs other than 1 must be handled by the caller
/// (their reciprocal is exact and lives in a different binade).
pub fn correct_recip_general(
    x: &Fixed,
    y: &Fixed,
    error_bound_ulps: u32,
    mode: RoundingMode,
) -> Result<Fixed, KernelError> {
    correct_recip_general_traced(x, y, error_bound_ulps, mode).map(|t| t.result())
}

pub fn correct_recip_general_traced(
    x: &Fixed,
    y: &Fixed,
    error_bound_ulps: u32,
    mode: RoundingMode,
) -> Result<GeneralRecipTrace, KernelError> {
    let n = x.total_bits();
    check_precision(n)?;
    expect_shape(x, n, n - 1, "x")?;
    expect_shape(y, n, n, "y")?;
    if error_bound_ulps > 15 {
        return Err(KernelError::ErrorBoundTooLarge {
            bound: error_bound_ulps,
            limit: 15,
        });
    }

    let one_x = 1u64 << (n - 1);
    let mut trace = GeneralRecipTrace {
        precision: n,
        mode,
        x_bits: x.bits(),
        y_input_bits: y.bits(),
        y_bits: y.bits(),
        shortcut: false,
        residual_negative: false,
        residual_magnitude: 0,
        estimate: 0,
        correction: 0,
        branch_multiple: 0,
        tie: false,
        result_bits: 0,
    };

    if x.bits() == one_x {
        trace.shortcut = true;
        trace.result_bits = one_x;
        return Ok(trace);
    }

    let y_bits = y.bits().max(one_x);
    trace.y_bits = y_bits;

    let one_r = 1i128 << (2 * n - 1);
    let residual = one_r - (x.bits() as i128) * (y_bits as i128);
    trace.residual_negative = residual < 0;
    let magnitude = residual.unsigned_abs() as u64;
    trace.residual_magnitude = magnitude;

    // |error| < bound + 1  <=>  2|R| < (2 bound + 2) * X
    let window = (2 * error_bound_ulps as u64 + 2) * x.bits();
    if 2 * magnitude >= window {
        return Err(KernelError::ResidualTooLarge {
            residual: magnitude,
            limit: window.div_ceil(2),
        });
    }

    // |R|/X estimates |error| in ulps; delta = x*ulp is X in residual
    // scale.
    let t = n - 6;
    let estimate = leading_bits_quotient(magnitude, x.bits(), t);
    trace.estimate = estimate;
    let x_bits = x.bits();

    // Strict residual comparisons against branch points. k*delta can never
    // equal |R| (that would make 1/x representable), and odd multiples of
    // delta/2 can never equal 2|R| (that would make 1/x a midpoint); both
    // are counted as ties if they somehow occur.
    let correction_magnitude;
    match mode {
        RoundingMode::NearestEven => {
            // nearest integer to |R|/X: estimate, estimate+1 or estimate+2
            let below_first = 2 * magnitude < (2 * estimate + 1) * x_bits;
            if 2 * magnitude == (2 * estimate + 1) * x_bits {
                trace.tie = true;
            }
            if below_first {
                correction_magnitude = estimate;
                trace.branch_multiple = 2 * estimate as i64 + 1;
            } else {
                let below_second = 2 * magnitude < (2 * estimate + 3) * x_bits;
                if 2 * magnitude == (2 * estimate + 3) * x_bits {
                    trace.tie = true;
                }
                trace.branch_multiple = 2 * estimate as i64 + 3;
                correction_magnitude = if below_second {
                    estimate + 1
                } else {
                    estimate + 2
                };
            }
        }
        _ => {
            // floor of |R|/X: estimate or estimate+1 when the residual is
            // nonnegative; ceiling when it is negative.
            let first = magnitude < (estimate + 1) * x_bits;
            if magnitude == (estimate + 1) * x_bits {
                trace.tie = true;
            }
            if !trace.residual_negative {
                trace.branch_multiple = estimate as i64 + 1;
                correction_magnitude = if first { estimate } else { estimate + 1 };
            } else {
                // |error| is strictly between consecutive integers
                trace.branch_multiple = estimate as i64 + 1;
                correction_magnitude = if first { estimate + 1 } else { estimate + 2 };
            }
        }
    }

    let signed_magnitude = if trace.residual_negative {
        -(correction_magnitude as i64)
    } else {
        correction_magnitude as i64
    };
    let correction = match mode {
        RoundingMode::NearestEven => signed_magnitude,
        RoundingMode::TowardNegative | RoundingMode::TowardZero => {
            // floor(error): for negative residuals the magnitude above is
            // already the ceiling of |error|, i.e. -floor(error)
            signed_magnitude
        }
        RoundingMode::TowardPositive => {
            // 1/x is never on the grid for interior x: ceiling = floor + 1
            signed_magnitude + 1
        }
    };
    trace.correction = correction;

    let result = y_bits as i64 + correction;
    if result < one_x as i64 || result >= (1i64 << n) {
        return Err(KernelError::ResultOutOfBinade {
            bits: result.max(0) as u64,
        });
    }
    trace.result_bits = result as u64;
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correction::{MUL_4X3, MUL_5X3_ROUNDED, MUL_5X4_ROUNDED};
    use crate::formats::{Decoded, IEEE_SINGLE};
    use crate::oracle::correctly_rounded_recip;

    fn fx(bits: u64, total: u32, frac: u32) -> Fixed {
        Fixed::new(bits, total, frac).unwrap()
    }

    fn single_oracle_bits(x_bits: u64) -> u64 {
        correctly_rounded_recip(
            Decoded {
                sign: false,
                exponent: 0,
                significand: x_bits,
            },
            &IEEE_SINGLE,
            RoundingMode::NearestEven,
        )
        .unwrap()
        .significand
    }

    #[test]
    fn shortcut_for_one() {
        let one = fx(1 << 23, 24, 23);
        let junk = fx(0x91_1111, 24, 24);
        let r = correct_recip_fixed_traced(&one, &junk, &MUL_5X4_ROUNDED).unwrap();
        assert!(r.shortcut);
        assert_eq!(r.result_bits, 1 << 23);
        assert_eq!(r.result().frac_bits(), 23);
    }

    #[test]
    fn residual_shifts_match_reference_realization() {
        // n = 24: the three variants shift R by 21/21/22 and Y by 21/21/20
        assert_eq!(MUL_4X3.residual_shift(24), 21);
        assert_eq!(MUL_4X3.approx_shift(24), 21);
        assert_eq!(MUL_5X3_ROUNDED.residual_shift(24), 21);
        assert_eq!(MUL_5X3_ROUNDED.approx_shift(24), 21);
        assert_eq!(MUL_5X4_ROUNDED.residual_shift(24), 22);
        assert_eq!(MUL_5X4_ROUNDED.approx_shift(24), 20);
    }

    #[test]
    fn corrects_seven_ulp_underestimate_of_0xaaaaaa() {
        let x = fx(0xAA_AAAA, 24, 23);
        let true_bits = single_oracle_bits(0xAA_AAAA);
        assert_eq!(true_bits, 0xC0_0001);
        for err in 1..=7u64 {
            let y = fx(true_bits - err, 24, 24);
            let r = correct_recip_fixed_traced(&x, &y, &MUL_5X4_ROUNDED).unwrap();
            assert_eq!(r.result_bits, true_bits, "err={err}");
            assert!(!r.tie);
        }
    }

    #[test]
    fn zero_correction_path_returns_y() {
        // 1/1.625 rounds down, so the oracle value itself is a valid
        // underestimate and must come back unchanged
        let x_bits = 0xD0_0000u64;
        let true_bits = single_oracle_bits(x_bits);
        let x = fx(x_bits, 24, 23);
        let y = fx(true_bits, 24, 24);
        let r = correct_recip_fixed_traced(&x, &y, &MUL_5X4_ROUNDED).unwrap();
        assert_eq!(r.correction, 0);
        assert!(!r.took_upper);
        assert_eq!(r.result_bits, true_bits);
    }

    #[test]
    fn floor_of_two_thirds_needs_one_ulp_up() {
        // RN(1/1.5) rounds up; the floor value is 0.6667 - 0.33 ulp short
        let x = fx(0xC0_0000, 24, 23);
        let y = fx(0xAA_AAAA, 24, 24);
        let r = correct_recip_fixed_traced(&x, &y, &MUL_5X4_ROUNDED).unwrap();
        assert_eq!(r.correction, 0);
        assert!(r.took_upper);
        assert_eq!(r.result_bits, 0xAA_AAAB);
        assert_eq!(r.result_bits, single_oracle_bits(0xC0_0000));
    }

    #[test]
    fn overestimate_is_rejected_not_corrected() {
        // RN(1/x) for x = 0xAAAAAA overestimates 1/x by 1/4 ulp
        let x = fx(0xAA_AAAA, 24, 23);
        let y = fx(0xC0_0001, 24, 24);
        let e = correct_recip_fixed_traced(&x, &y, &MUL_5X4_ROUNDED).unwrap_err();
        assert!(matches!(e, KernelError::NegativeResidual { .. }));
    }

    #[test]
    fn clamp_handles_binade_exit_below() {
        // x near 2: oracle is barely above 0.5, so a 7-ulp underestimate
        // falls below the binade and gets projected back onto 0.5
        let x_bits = 0xFF_FFFFu64;
        let true_bits = single_oracle_bits(x_bits);
        let x = fx(x_bits, 24, 23);
        let y_low = true_bits - 7;
        assert!(y_low < (1 << 23));
        let y = fx(y_low, 24, 24);
        let r = correct_recip_fixed_traced(&x, &y, &MUL_5X4_ROUNDED).unwrap();
        assert_eq!(r.y_bits, 1 << 23);
        assert_eq!(r.result_bits, true_bits);
    }

    #[test]
    fn width_ledger_is_enforced() {
        let x = fx(0xC0_0000, 24, 23);
        // absurdly low approximation: residual exceeds the 2^27 window
        let y = fx(0x80_1000, 24, 24);
        let e = correct_recip_fixed_traced(&x, &y, &MUL_5X4_ROUNDED).unwrap_err();
        assert!(matches!(e, KernelError::ResidualTooLarge { limit: 0x800_0000, .. }));
    }

    #[test]
    fn residual_op_matches_fixture() {
        let x = fx(0xC0_0000, 24, 23);
        let y = fx(1 << 23, 24, 24);
        let r = compute_residual_recip(&x, &y).unwrap();
        assert_eq!(r.bits(), 1 << 45); // 1 - 1.5*0.5 = 0.25
        assert_eq!(r.total_bits(), 48);
        assert_eq!(r.frac_bits(), 47);

        // y = 1.0 exactly, via the one-wider tolerated shape
        let one_y = fx(1 << 24, 25, 24);
        let one_x = fx(1 << 23, 24, 23);
        assert_eq!(compute_residual_recip(&one_x, &one_y).unwrap().bits(), 0);

        let direct = compute_residual_recip(&x, &fx(0xAA_AAAA, 24, 24)).unwrap();
        assert_eq!(direct.bits(), (1u64 << 47) - 0xC0_0000u64 * 0xAA_AAAA);
    }

    #[test]
    fn general_matches_fixed_on_underestimates() {
        for x_bits in [0xAA_AAAAu64, 0xD0_0000, 0x85_0123, 0xF1_2345] {
            let x = fx(x_bits, 24, 23);
            let true_bits = single_oracle_bits(x_bits);
            for err in 1..=7u64 {
                let y = fx(true_bits - err, 24, 24);
                let fixed = correct_recip_fixed(&x, &y, &MUL_5X4_ROUNDED).unwrap();
                let general =
                    correct_recip_general(&x, &y, 7, RoundingMode::NearestEven).unwrap();
                assert_eq!(fixed, general, "x={x_bits:#x} err={err}");
            }
        }
    }

    #[test]
    fn general_corrects_signed_errors() {
        // x = 1.5: RN(1/x) = 0xAAAAAB; push the approximation 2 ulps high
        let x = fx(0xC0_0000, 24, 23);
        let true_bits = single_oracle_bits(0xC0_0000);
        let y = fx(true_bits + 2, 24, 24);
        let r = correct_recip_general_traced(&x, &y, 3, RoundingMode::NearestEven).unwrap();
        assert!(r.residual_negative);
        assert_eq!(r.correction, -2);
        assert_eq!(r.result_bits, true_bits);
    }

    #[test]
    fn directed_modes_match_oracle() {
        for x_bits in [0xAA_AAAAu64, 0xC0_0000, 0x99_9999, 0xFF_FFFF] {
            let x = fx(x_bits, 24, 23);
            for mode in [
                RoundingMode::TowardZero,
                RoundingMode::TowardNegative,
                RoundingMode::TowardPositive,
            ] {
                let want = correctly_rounded_recip(
                    Decoded {
                        sign: false,
                        exponent: 0,
                        significand: x_bits,
                    },
                    &IEEE_SINGLE,
                    mode,
                )
                .unwrap()
                .significand;
                for err in 1..=5i64 {
                    let y = fx((want as i64 - err) as u64, 24, 24);
                    let got = correct_recip_general(&x, &y, 5, mode).unwrap();
                    assert_eq!(got.bits(), want, "x={x_bits:#x} mode={mode:?} err={err}");
                }
            }
        }
    }

    #[test]
    fn error_bound_cap() {
        let x = fx(0xC0_0000, 24, 23);
        let y = fx(0xAA_AAAA, 24, 24);
        assert!(matches!(
            correct_recip_general(&x, &y, 16, RoundingMode::NearestEven),
            Err(KernelError::ErrorBoundTooLarge { bound: 16, limit: 15 })
        ));
    }

    #[test]
    fn four_by_three_corrects_three_ulps() {
        for x_bits in [0x81_0001u64, 0xAA_AAAA, 0xE0_1234, 0xFF_FFF1] {
            let x = fx(x_bits, 24, 23);
            let true_bits = single_oracle_bits(x_bits);
            for err in 0..=3u64 {
                let y_bits = true_bits - err;
                let x_y = x_bits as u128 * y_bits.max(1 << 23) as u128;
                if x_y > 1 << 47 {
                    continue; // oracle overestimated; not a valid input
                }
                let y = fx(y_bits, 24, 24);
                let r = correct_recip_fixed(&x, &y, &MUL_4X3).unwrap();
                assert_eq!(r.bits(), true_bits, "x={x_bits:#x} err={err}");
            }
        }
    }
}

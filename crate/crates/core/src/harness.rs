//! Sweep harness: exhaustive and randomized verification of the
//! correction kernels against the exact oracle.
//!
//! A sweep walks inputs of one operation, derives the true result from
//! the oracle, injects each configured ulp offset into the approximation,
//! runs the kernel and compares. The oracle is consulted once per input
//! and shared across offsets; the kernel never influences expected
//! values. Offset-zero cases where the oracle itself overestimates the
//! exact value violate the underestimate precondition of the
//! nearest-even datapath and are counted as skips, never silently
//! dropped; approximations that fall below the output binade are clamped
//! by the kernel itself and counted as `clamped`, not skipped.
//!
//! Sweeps run stripe-parallel with a deterministic in-order merge, so a
//! given spec produces identical results at any thread count.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::correction::{
    correct_div_fixed_traced, correct_recip_fixed_traced, correct_recip_general_traced,
    correct_sqrt_fixed_traced, CorrectionConfig, KernelError, RecipTrace,
};
use crate::fixed::Fixed;
use crate::formats::{Decoded, FpFormat, RoundingMode};
use crate::oracle::{
    correctly_rounded_div, correctly_rounded_recip, correctly_rounded_sqrt, RangeError, Rounded,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Operation {
    Recip,
    Div,
    Sqrt,
}

impl Operation {
    pub fn name(&self) -> &'static str {
        match self {
            Operation::Recip => "recip",
            Operation::Div => "div",
            Operation::Sqrt => "sqrt",
        }
    }

    pub fn by_name(name: &str) -> Option<Operation> {
        match name {
            "recip" => Some(Operation::Recip),
            "div" => Some(Operation::Div),
            "sqrt" => Some(Operation::Sqrt),
            _ => None,
        }
    }
}

impl fmt::Display for Operation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which inputs a sweep covers. `Binade` walks significands at exponent
/// zero (for sqrt: the two input binades, which is already every distinct
/// case). `Full` additionally walks the whole normal exponent range;
/// meaningful for reciprocal, where results can leave the normal range at
/// the format's edges.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InputRange {
    Binade,
    Full,
}

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub operation: Operation,
    pub format: FpFormat,
    pub variant: &'static CorrectionConfig,
    pub mode: RoundingMode,
    /// Signed ulp offsets added to the oracle significand to build the
    /// approximation under test.
    pub error_offsets: Vec<i32>,
    pub input_range: InputRange,
}

impl SweepSpec {
    pub fn new(
        operation: Operation,
        format: FpFormat,
        variant: &'static CorrectionConfig,
    ) -> SweepSpec {
        let offsets = (-(variant.max_correctable_ulps as i32)..=0).collect();
        SweepSpec {
            operation,
            format,
            variant,
            mode: RoundingMode::NearestEven,
            error_offsets: offsets,
            input_range: InputRange::Binade,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SkipCounts {
    /// Offset-zero cases where the oracle value overestimates the exact
    /// result, violating the underestimate precondition.
    pub overestimate: u64,
    /// Inputs whose true result leaves the format's normal range (full-
    /// range reciprocal sweeps at the exponent extremes).
    pub out_of_range: u64,
}

impl SkipCounts {
    pub fn total(&self) -> u64 {
        self.overestimate + self.out_of_range
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CaseOutcome {
    WrongBits { got: u64 },
    Kernel(KernelError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FailureRecord {
    pub a_bits: u64,
    pub b_bits: Option<u64>,
    pub input_exponent: i32,
    pub offset: i32,
    pub expected_bits: u64,
    pub outcome: CaseOutcome,
}

#[derive(Clone, Debug)]
pub struct SweepResult {
    pub operation: Operation,
    pub format_name: &'static str,
    pub variant_name: &'static str,
    pub mode: RoundingMode,
    pub cases_run: u64,
    pub skips: SkipCounts,
    /// Cases where the kernel's binade clamp engaged (run and verified).
    pub clamped: u64,
    pub failure_count: u64,
    /// First recorded failures, up to [`MAX_RECORDED_FAILURES`].
    pub failures: Vec<FailureRecord>,
    /// Strict-comparison equalities observed inside the kernel. Always
    /// zero: equality would mean the exact result sat on a rounding
    /// boundary.
    pub tie_count: u64,
    /// Nearest-even tie-rule firings inside the oracle. Always zero for
    /// recip/div/sqrt of normal inputs.
    pub oracle_tie_count: u64,
    pub runtime: Duration,
}

pub const MAX_RECORDED_FAILURES: usize = 64;

impl SweepResult {
    pub fn passed(&self) -> bool {
        self.failure_count == 0
    }

    pub fn render_summary(&self) -> String {
        let mut s = format!(
            "sweep {} format={} variant={} mode={}\n  cases: {}  skipped: {} overestimate, {} out-of-range  clamped: {}\n  failures: {}  kernel-ties: {}  oracle-ties: {}  runtime: {:.2?}\n  {}\n",
            self.operation,
            self.format_name,
            self.variant_name,
            self.mode.name(),
            self.cases_run,
            self.skips.overestimate,
            self.skips.out_of_range,
            self.clamped,
            self.failure_count,
            self.tie_count,
            self.oracle_tie_count,
            self.runtime,
            if self.passed() { "PASS" } else { "FAIL" },
        );
        for f in self.failures.iter().take(8) {
            s.push_str(&format!("  {}\n", render_failure(f)));
        }
        if self.failure_count as usize > self.failures.len() {
            s.push_str(&format!(
                "  ... {} failures in total\n",
                self.failure_count
            ));
        }
        s
    }

    /// CSV of recorded failures:
    /// `operation,format,variant,mode,a,b,exponent,offset,expected,got`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("operation,format,variant,mode,a,b,exponent,offset,expected,got\n");
        for f in &self.failures {
            let b = f.b_bits.map(|b| format!("{b:#x}")).unwrap_or_default();
            let got = match f.outcome {
                CaseOutcome::WrongBits { got } => format!("{got:#x}"),
                CaseOutcome::Kernel(e) => format!("error:{e:?}"),
            };
            out.push_str(&format!(
                "{},{},{},{},{:#x},{},{},{},{:#x},{}\n",
                self.operation,
                self.format_name,
                self.variant_name,
                self.mode.name(),
                f.a_bits,
                b,
                f.input_exponent,
                f.offset,
                f.expected_bits,
                got
            ));
        }
        out
    }
}

fn render_failure(f: &FailureRecord) -> String {
    let b = f
        .b_bits
        .map(|b| format!(" b={b:#x}"))
        .unwrap_or_default();
    let got = match f.outcome {
        CaseOutcome::WrongBits { got } => format!("got {got:#x}"),
        CaseOutcome::Kernel(e) => format!("kernel error: {e}"),
    };
    format!(
        "a={:#x}{} 2^{} offset={}: expected {:#x}, {}",
        f.a_bits, b, f.input_exponent, f.offset, f.expected_bits, got
    )
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HarnessError {
    /// The sweep would run more cases than the desk-scale cap.
    TooManyCases { estimated: u128, cap: u64 },
    /// Offsets empty or outside the +/-15 datapath window, or positive
    /// offsets requested for the underestimate-only nearest-even kernel.
    BadOffsets { reason: &'static str },
    /// Directed modes are implemented for reciprocal only.
    UnsupportedMode,
    /// Format precision outside the kernels' supported range.
    UnsupportedFormat { precision: u32 },
}

impl fmt::Display for HarnessError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HarnessError::TooManyCases { estimated, cap } => {
                write!(f, "sweep would run {estimated} cases, above the cap of {cap}; use a randomized sweep")
            }
            HarnessError::BadOffsets { reason } => write!(f, "bad error offsets: {reason}"),
            HarnessError::UnsupportedMode => {
                write!(f, "directed rounding sweeps are supported for recip only")
            }
            HarnessError::UnsupportedFormat { precision } => {
                write!(f, "format precision {precision} outside supported range 8..=30")
            }
        }
    }
}

impl std::error::Error for HarnessError {}

const CASE_CAP: u64 = 1 << 28;

#[derive(Default)]
struct Tally {
    cases_run: u64,
    skips: SkipCounts,
    clamped: u64,
    failure_count: u64,
    failures: Vec<FailureRecord>,
    tie_count: u64,
    oracle_tie_count: u64,
}

impl Tally {
    fn absorb(&mut self, other: Tally) {
        self.cases_run += other.cases_run;
        self.skips.overestimate += other.skips.overestimate;
        self.skips.out_of_range += other.skips.out_of_range;
        self.clamped += other.clamped;
        self.failure_count += other.failure_count;
        for f in other.failures {
            if self.failures.len() < MAX_RECORDED_FAILURES {
                self.failures.push(f);
            }
        }
        self.tie_count += other.tie_count;
        self.oracle_tie_count += other.oracle_tie_count;
    }

    fn fail(&mut self, record: FailureRecord) {
        self.failure_count += 1;
        if self.failures.len() < MAX_RECORDED_FAILURES {
            self.failures.push(record);
        }
    }
}

/// One (input, offset) kernel-vs-oracle comparison. `true_bits` is the
/// oracle significand in the output binade.
struct Case<'a> {
    op: Operation,
    n: u32,
    variant: &'a CorrectionConfig,
    mode: RoundingMode,
    a_bits: u64,
    b_bits: Option<u64>,
    input_exponent: i32,
    true_bits: u64,
    /// Output is the coarser [1,2) binade (div only).
    upper_binade: bool,
}

impl Case<'_> {
    /// Returns (approximation, overestimates) for a given offset.
    fn approx(&self, offset: i32) -> (u64, bool) {
        let y = (self.true_bits as i64 + offset as i64) as u64;
        let n = self.n;
        let low = 1u64 << (n - 1);
        let yc = y.max(low);
        let over = match self.op {
            Operation::Recip => {
                (self.a_bits as u128) * (yc as u128) > 1u128 << (2 * n - 1)
            }
            Operation::Div => {
                let scale = if self.upper_binade { n - 1 } else { n };
                ((self.a_bits as u128) << scale)
                    < (self.b_bits.unwrap() as u128) * (yc as u128)
            }
            Operation::Sqrt => {
                ((self.a_bits as u128) << (n - 1)) < (yc as u128) * (yc as u128)
            }
        };
        (y, over)
    }

    fn run(&self, offset: i32, t: &mut Tally) {
        let (y_bits, overestimates) = self.approx(offset);
        // The underestimate-form kernels cannot take r < 0; such cases
        // (offset 0 where the oracle rounded up) are skip-accounted. The
        // signed general kernel used for directed modes handles them.
        if overestimates && self.mode == RoundingMode::NearestEven {
            t.skips.overestimate += 1;
            return;
        }
        t.cases_run += 1;
        let n = self.n;
        let outcome: Result<(u64, bool, bool), KernelError> = match (self.op, self.mode) {
            (Operation::Recip, RoundingMode::NearestEven) => {
                let x = Fixed::new(self.a_bits, n, n - 1).unwrap();
                let y = Fixed::new(y_bits, n, n).unwrap();
                correct_recip_fixed_traced(&x, &y, self.variant)
                    .map(|tr| (tr.result_bits, tr.tie, tr.y_bits != tr.y_input_bits))
            }
            (Operation::Recip, mode) => {
                let x = Fixed::new(self.a_bits, n, n - 1).unwrap();
                let y = Fixed::new(y_bits, n, n).unwrap();
                correct_recip_general_traced(&x, &y, self.variant.max_correctable_ulps, mode)
                    .map(|tr| (tr.result_bits, tr.tie, tr.y_bits != tr.y_input_bits))
            }
            (Operation::Div, _) => {
                let a = Fixed::new(self.a_bits, n, n - 1).unwrap();
                let b = Fixed::new(self.b_bits.unwrap(), n, n - 1).unwrap();
                let frac = if self.upper_binade { n - 1 } else { n };
                let q = Fixed::new(y_bits, n, frac).unwrap();
                correct_div_fixed_traced(&a, &b, &q, self.variant)
                    .map(|tr| (tr.result_bits, tr.tie, tr.q_bits != tr.q_input_bits))
            }
            (Operation::Sqrt, _) => {
                let x = Fixed::new(self.a_bits, n + 1, n - 1).unwrap();
                let y = Fixed::new(y_bits, n, n - 1).unwrap();
                correct_sqrt_fixed_traced(&x, &y, self.variant)
                    .map(|tr| (tr.result_bits, tr.tie, tr.y_bits != tr.y_input_bits))
            }
        };
        match outcome {
            Ok((bits, tie, clamped)) => {
                if tie {
                    t.tie_count += 1;
                }
                if clamped {
                    t.clamped += 1;
                }
                if bits != self.true_bits {
                    t.fail(FailureRecord {
                        a_bits: self.a_bits,
                        b_bits: self.b_bits,
                        input_exponent: self.input_exponent,
                        offset,
                        expected_bits: self.true_bits,
                        outcome: CaseOutcome::WrongBits { got: bits },
                    });
                }
            }
            Err(e) => t.fail(FailureRecord {
                a_bits: self.a_bits,
                b_bits: self.b_bits,
                input_exponent: self.input_exponent,
                offset,
                expected_bits: self.true_bits,
                outcome: CaseOutcome::Kernel(e),
            }),
        }
    }
}

fn oracle_for(
    op: Operation,
    format: &FpFormat,
    a_bits: u64,
    b_bits: Option<u64>,
    input_exponent: i32,
    mode: RoundingMode,
) -> Result<Rounded, RangeError> {
    let d = |significand, exponent| Decoded {
        sign: false,
        exponent,
        significand,
    };
    match op {
        Operation::Recip => correctly_rounded_recip(d(a_bits, input_exponent), format, mode),
        Operation::Div => correctly_rounded_div(
            d(a_bits, input_exponent),
            d(b_bits.unwrap(), 0),
            format,
            mode,
        ),
        Operation::Sqrt => correctly_rounded_sqrt(d(a_bits, input_exponent), format, mode),
    }
}

fn validate(spec: &SweepSpec) -> Result<(), HarnessError> {
    let n = spec.format.precision;
    if !(8..=30).contains(&n) {
        return Err(HarnessError::UnsupportedFormat { precision: n });
    }
    if spec.error_offsets.is_empty() {
        return Err(HarnessError::BadOffsets {
            reason: "offset list is empty",
        });
    }
    if spec.error_offsets.iter().any(|o| o.abs() > 15) {
        return Err(HarnessError::BadOffsets {
            reason: "offsets outside the +/-15 datapath window",
        });
    }
    if spec.mode == RoundingMode::NearestEven && spec.error_offsets.iter().any(|o| *o > 0) {
        return Err(HarnessError::BadOffsets {
            reason: "positive offsets overestimate; the nearest-even kernel is underestimate-only",
        });
    }
    if spec.mode != RoundingMode::NearestEven && spec.operation != Operation::Recip {
        return Err(HarnessError::UnsupportedMode);
    }
    Ok(())
}

fn estimated_cases(spec: &SweepSpec) -> u128 {
    let n = spec.format.precision;
    let sig = 1u128 << (n - 1);
    let offs = spec.error_offsets.len() as u128;
    let per_binade = match spec.operation {
        Operation::Recip => sig - 1,
        Operation::Div => sig * sig,
        Operation::Sqrt => 2 * sig,
    };
    let binades = match (spec.operation, spec.input_range) {
        (Operation::Recip, InputRange::Full) => {
            (spec.format.max_exponent() - spec.format.min_exponent() + 1) as u128
        }
        _ => 1,
    };
    per_binade * offs * binades
}

/// Exhaustive sweep per the spec. Oracle independence, deterministic
/// parallel partitioning, skip accounting.
pub fn batch_sweep(spec: &SweepSpec) -> Result<SweepResult, HarnessError> {
    validate(spec)?;
    let estimated = estimated_cases(spec);
    if estimated > CASE_CAP as u128 {
        return Err(HarnessError::TooManyCases {
            estimated,
            cap: CASE_CAP,
        });
    }
    let started = Instant::now();
    let n = spec.format.precision;
    let lo = 1u64 << (n - 1);
    let hi = 1u64 << n;

    let mut total = Tally::default();
    let input_exponents: Vec<i32> = match (spec.operation, spec.input_range) {
        (Operation::Recip, InputRange::Full) => {
            (spec.format.min_exponent()..=spec.format.max_exponent()).collect()
        }
        (Operation::Sqrt, _) => vec![0, 1],
        _ => vec![0],
    };

    for &input_exponent in &input_exponents {
        let tally = parallel_stripes(lo, hi, |a_bits, t| {
            // reciprocal sweeps cover the open binade interior, like the
            // reference harness; x = 1 is the shortcut's unit test
            if spec.operation == Operation::Recip && a_bits == lo {
                return;
            }
            match spec.operation {
                Operation::Recip | Operation::Sqrt => {
                    let a_input = if spec.operation == Operation::Sqrt && input_exponent == 1 {
                        // value in [2,4) as a (n+1, n-1) fixed-point input
                        a_bits << 1
                    } else {
                        a_bits
                    };
                    let rounded =
                        match oracle_for(spec.operation, &spec.format, a_bits, None, input_exponent, spec.mode)
                        {
                            Ok(r) => r,
                            Err(_) => {
                                t.skips.out_of_range += spec.error_offsets.len() as u64;
                                return;
                            }
                        };
                    if rounded.tie {
                        t.oracle_tie_count += 1;
                    }
                    let case = Case {
                        op: spec.operation,
                        n,
                        variant: spec.variant,
                        mode: spec.mode,
                        a_bits: a_input,
                        b_bits: None,
                        input_exponent,
                        true_bits: rounded.significand,
                        upper_binade: false,
                    };
                    for &offset in &spec.error_offsets {
                        case.run(offset, t);
                    }
                }
                Operation::Div => {
                    for b_bits in lo..hi {
                        let rounded = match oracle_for(
                            spec.operation,
                            &spec.format,
                            a_bits,
                            Some(b_bits),
                            0,
                            spec.mode,
                        ) {
                            Ok(r) => r,
                            Err(_) => {
                                t.skips.out_of_range += spec.error_offsets.len() as u64;
                                continue;
                            }
                        };
                        if rounded.tie {
                            t.oracle_tie_count += 1;
                        }
                        let case = Case {
                            op: spec.operation,
                            n,
                            variant: spec.variant,
                            mode: spec.mode,
                            a_bits,
                            b_bits: Some(b_bits),
                            input_exponent: 0,
                            true_bits: rounded.significand,
                            upper_binade: a_bits >= b_bits,
                        };
                        for &offset in &spec.error_offsets {
                            case.run(offset, t);
                        }
                    }
                }
            }
        });
        total.absorb(tally);
    }

    Ok(SweepResult {
        operation: spec.operation,
        format_name: spec.format.name,
        variant_name: spec.variant.name,
        mode: spec.mode,
        cases_run: total.cases_run,
        skips: total.skips,
        clamped: total.clamped,
        failure_count: total.failure_count,
        failures: total.failures,
        tie_count: total.tie_count,
        oracle_tie_count: total.oracle_tie_count,
        runtime: started.elapsed(),
    })
}

/// Randomized sweep for combinations too large to exhaust (single-
/// precision division and square root). Deterministic for a given seed
/// at any thread count.
pub fn random_sweep(spec: &SweepSpec, cases: u64, seed: u64) -> Result<SweepResult, HarnessError> {
    validate(spec)?;
    let started = Instant::now();
    let n = spec.format.precision;
    let lo = 1u64 << (n - 1);
    let hi = 1u64 << n;

    const CHUNK: u64 = 1 << 16;
    let chunks: Vec<u64> = (0..cases.div_ceil(CHUNK)).collect();
    let parts: Vec<Tally> = chunks
        .into_par_iter()
        .map(|chunk| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(chunk + 1);
            let mut t = Tally::default();
            let count = CHUNK.min(cases - chunk * CHUNK);
            for _ in 0..count {
                let a_bits = rng.gen_range(lo..hi);
                let (a_input, b_bits, input_exponent) = match spec.operation {
                    Operation::Recip => (a_bits, None, 0),
                    Operation::Div => (a_bits, Some(rng.gen_range(lo..hi)), 0),
                    Operation::Sqrt => {
                        let binade = rng.gen_range(0..2i32);
                        (a_bits << binade, None, binade)
                    }
                };
                let offset = spec.error_offsets[rng.gen_range(0..spec.error_offsets.len())];
                let rounded = match oracle_for(
                    spec.operation,
                    &spec.format,
                    a_bits,
                    b_bits,
                    input_exponent,
                    spec.mode,
                ) {
                    Ok(r) => r,
                    Err(_) => {
                        t.skips.out_of_range += 1;
                        continue;
                    }
                };
                if rounded.tie {
                    t.oracle_tie_count += 1;
                }
                let case = Case {
                    op: spec.operation,
                    n,
                    variant: spec.variant,
                    mode: spec.mode,
                    a_bits: a_input,
                    b_bits,
                    input_exponent,
                    true_bits: rounded.significand,
                    upper_binade: b_bits.map(|b| a_bits >= b).unwrap_or(false),
                };
                case.run(offset, &mut t);
            }
            t
        })
        .collect();

    let mut total = Tally::default();
    for p in parts {
        total.absorb(p);
    }
    Ok(SweepResult {
        operation: spec.operation,
        format_name: spec.format.name,
        variant_name: spec.variant.name,
        mode: spec.mode,
        cases_run: total.cases_run,
        skips: total.skips,
        clamped: total.clamped,
        failure_count: total.failure_count,
        failures: total.failures,
        tie_count: total.tie_count,
        oracle_tie_count: total.oracle_tie_count,
        runtime: started.elapsed(),
    })
}

fn parallel_stripes<F>(lo: u64, hi: u64, per_input: F) -> Tally
where
    F: Fn(u64, &mut Tally) + Sync,
{
    const STRIPE: u64 = 1 << 12;
    let stripes: Vec<(u64, u64)> = (lo..hi)
        .step_by(STRIPE as usize)
        .map(|s| (s, (s + STRIPE).min(hi)))
        .collect();
    let parts: Vec<Tally> = stripes
        .into_par_iter()
        .map(|(s, e)| {
            let mut t = Tally::default();
            for a in s..e {
                per_input(a, &mut t);
            }
            t
        })
        .collect();
    let mut total = Tally::default();
    for p in parts {
        total.absorb(p);
    }
    total
}

/// Status of a single traced case.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CaseStatus {
    Pass,
    Fail { got: u64 },
    KernelError(KernelError),
    /// The requested offset overestimates the exact value; the
    /// underestimate-form kernel does not apply.
    SkippedOverestimate,
}

/// Full trace of one reciprocal case: every intermediate of the fixed
/// datapath plus the oracle verdict.
#[derive(Clone, Debug)]
pub struct CaseReport {
    pub format_name: &'static str,
    pub x_bits: u64,
    pub offset: i32,
    pub oracle_bits: u64,
    pub approx_bits: u64,
    pub trace: Option<RecipTrace>,
    pub status: CaseStatus,
}

impl CaseReport {
    pub fn passed(&self) -> bool {
        self.status == CaseStatus::Pass
    }

    /// Hex rendering with (total, frac) shape annotations, one
    /// intermediate per line.
    pub fn render(&self) -> String {
        let n = match &self.trace {
            Some(t) => t.precision,
            None => 24,
        };
        let mut s = format!(
            "x        = {:#x} ({}, {})\noracle   = {:#x} ({}, {})\napprox   = {:#x} ({}, {})  offset {}\n",
            self.x_bits,
            n,
            n - 1,
            self.oracle_bits,
            n,
            n,
            self.approx_bits,
            n,
            n,
            self.offset,
        );
        if let Some(t) = &self.trace {
            if t.shortcut {
                s.push_str("shortcut: x == 1, result = 1\n");
            } else {
                s.push_str(&format!(
                    "Y        = {:#x} ({}, {}){}\nR        = {:#x} ({}, {})\nR_top    = {:#x}  Y_top = {:#x}\nC        = {:#x} ({}, {})\nB        = {:#x} ({}, {})\ncandidates = {:#x} / {:#x}\n2R {} B -> {}\n",
                    t.y_bits,
                    n,
                    n,
                    if t.y_bits != t.y_input_bits { "  (clamped)" } else { "" },
                    t.residual_bits,
                    2 * n,
                    2 * n - 1,
                    t.residual_top_bits,
                    t.approx_top_bits,
                    t.correction,
                    4,
                    n,
                    t.branch_point_bits,
                    n + 4,
                    2 * n - 1,
                    t.candidate_low,
                    t.candidate_high,
                    if t.tie { "==" } else if t.took_upper { ">=" } else { "<" },
                    if t.took_upper { "upper" } else { "lower" },
                ));
            }
            s.push_str(&format!("result   = {:#x}\n", t.result_bits));
        }
        s.push_str(match &self.status {
            CaseStatus::Pass => "pass\n",
            CaseStatus::Fail { .. } => "FAIL\n",
            CaseStatus::KernelError(_) => "kernel error\n",
            CaseStatus::SkippedOverestimate => "skipped: oracle value overestimates 1/x\n",
        });
        if let CaseStatus::KernelError(e) = &self.status {
            s.push_str(&format!("  {e}\n"));
        }
        s
    }
}

/// Trace one reciprocal case against the oracle, like the reference
/// harness's individual mode.
pub fn individual_case(
    x_bits: u64,
    ulp_err: i32,
    variant: &CorrectionConfig,
    format: &FpFormat,
) -> Result<CaseReport, HarnessError> {
    let n = format.precision;
    if !(8..=30).contains(&n) {
        return Err(HarnessError::UnsupportedFormat { precision: n });
    }
    if x_bits < (1 << (n - 1)) || x_bits >= (1 << n) {
        return Err(HarnessError::BadOffsets {
            reason: "x outside the [1,2) binade",
        });
    }
    if ulp_err.abs() > 15 {
        return Err(HarnessError::BadOffsets {
            reason: "offsets outside the +/-15 datapath window",
        });
    }
    let rounded = oracle_for(
        Operation::Recip,
        format,
        x_bits,
        None,
        0,
        RoundingMode::NearestEven,
    )
    .expect("reciprocal of a binade-0 input is in range");
    let approx_bits = (rounded.significand as i64 + ulp_err as i64) as u64;
    let x = Fixed::new(x_bits, n, n - 1).unwrap();
    let y = Fixed::new(approx_bits, n, n).unwrap();
    let mut report = CaseReport {
        format_name: format.name,
        x_bits,
        offset: ulp_err,
        oracle_bits: rounded.significand,
        approx_bits,
        trace: None,
        status: CaseStatus::Pass,
    };
    if (x_bits as u128) * (approx_bits.max(1 << (n - 1)) as u128) > 1u128 << (2 * n - 1)
        && x_bits != 1 << (n - 1)
    {
        report.status = CaseStatus::SkippedOverestimate;
        return Ok(report);
    }
    match correct_recip_fixed_traced(&x, &y, variant) {
        Ok(trace) => {
            report.status = if trace.result_bits == rounded.significand || trace.shortcut {
                CaseStatus::Pass
            } else {
                CaseStatus::Fail {
                    got: trace.result_bits,
                }
            };
            report.trace = Some(trace);
        }
        Err(e) => report.status = CaseStatus::KernelError(e),
    }
    Ok(report)
}

/// Empirical per-variant bound: one pass over all inputs, testing every
/// offset magnitude up to `probe_to`, then the largest prefix of
/// magnitudes with zero failures.
#[derive(Clone, Debug)]
pub struct DiscoveryReport {
    pub operation: Operation,
    pub format_name: &'static str,
    pub variant_name: &'static str,
    /// Largest k such that offsets 0..=-k all pass exhaustively.
    pub measured_max_ulps: u32,
    pub probed_to: u32,
    /// (offset magnitude, failures) for each probed magnitude.
    pub per_offset_failures: Vec<(u32, u64)>,
}

impl DiscoveryReport {
    pub fn render(&self) -> String {
        let mut s = format!(
            "discover {} format={} variant={}: measured max correctable = {} ulps (probed to {})\n",
            self.operation, self.format_name, self.variant_name, self.measured_max_ulps, self.probed_to,
        );
        for (m, f) in &self.per_offset_failures {
            s.push_str(&format!("  offset -{m}: {f} failures\n"));
        }
        s
    }
}

pub fn discover_max_correctable(
    variant: &'static CorrectionConfig,
    operation: Operation,
    format: FpFormat,
) -> Result<DiscoveryReport, HarnessError> {
    let probe_to = 10u32;
    let spec = SweepSpec {
        operation,
        format,
        variant,
        mode: RoundingMode::NearestEven,
        error_offsets: (0..=probe_to).map(|m| -(m as i32)).collect(),
        input_range: InputRange::Binade,
    };
    validate(&spec)?;
    if estimated_cases(&spec) > CASE_CAP as u128 {
        return Err(HarnessError::TooManyCases {
            estimated: estimated_cases(&spec),
            cap: CASE_CAP,
        });
    }
    let n = format.precision;
    let lo = 1u64 << (n - 1);
    let hi = 1u64 << n;

    // per-magnitude failure counters, folded in stripe order
    let fold = |spec: &SweepSpec, exponents: &[i32]| -> Vec<u64> {
        const STRIPE: u64 = 1 << 12;
        let stripes: Vec<(u64, u64)> = (lo..hi)
            .step_by(STRIPE as usize)
            .map(|s| (s, (s + STRIPE).min(hi)))
            .collect();
        let parts: Vec<Vec<u64>> = stripes
            .par_iter()
            .map(|&(s, e)| {
                let mut counts = vec![0u64; probe_to as usize + 1];
                let mut t = Tally::default();
                for a_bits in s..e {
                    if spec.operation == Operation::Recip && a_bits == lo {
                        continue;
                    }
                    for &input_exponent in exponents {
                        let b_range: Box<dyn Iterator<Item = Option<u64>>> =
                            if spec.operation == Operation::Div {
                                Box::new((lo..hi).map(Some))
                            } else {
                                Box::new(std::iter::once(None))
                            };
                        for b_bits in b_range {
                            let rounded = match oracle_for(
                                spec.operation,
                                &spec.format,
                                a_bits,
                                b_bits,
                                input_exponent,
                                spec.mode,
                            ) {
                                Ok(r) => r,
                                Err(_) => continue,
                            };
                            let a_input =
                                if spec.operation == Operation::Sqrt && input_exponent == 1 {
                                    a_bits << 1
                                } else {
                                    a_bits
                                };
                            let case = Case {
                                op: spec.operation,
                                n,
                                variant: spec.variant,
                                mode: spec.mode,
                                a_bits: a_input,
                                b_bits,
                                input_exponent,
                                true_bits: rounded.significand,
                                upper_binade: b_bits.map(|b| a_bits >= b).unwrap_or(false),
                            };
                            for m in 0..=probe_to {
                                let before = t.failure_count;
                                case.run(-(m as i32), &mut t);
                                if t.failure_count > before {
                                    counts[m as usize] += 1;
                                }
                            }
                        }
                    }
                }
                counts
            })
            .collect();
        let mut total = vec![0u64; probe_to as usize + 1];
        for p in parts {
            for (i, c) in p.iter().enumerate() {
                total[i] += c;
            }
        }
        total
    };

    let exponents: Vec<i32> = if operation == Operation::Sqrt {
        vec![0, 1]
    } else {
        vec![0]
    };
    let counts = fold(&spec, &exponents);
    let mut measured = 0u32;
    for (m, &c) in counts.iter().enumerate() {
        if c == 0 {
            measured = m as u32;
        } else {
            break;
        }
    }
    Ok(DiscoveryReport {
        operation,
        format_name: format.name,
        variant_name: variant.name,
        measured_max_ulps: measured,
        probed_to: probe_to,
        per_offset_failures: counts
            .iter()
            .enumerate()
            .map(|(m, &c)| (m as u32, c))
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correction::{MUL_4X3, MUL_5X4_ROUNDED};
    use crate::formats::{BFLOAT16, IEEE_HALF};

    #[test]
    fn bfloat16_recip_sweep_is_clean() {
        let spec = SweepSpec::new(Operation::Recip, BFLOAT16, &MUL_5X4_ROUNDED);
        let r = batch_sweep(&spec).unwrap();
        assert!(r.passed(), "{}", r.render_summary());
        assert_eq!(r.tie_count, 0);
        assert_eq!(r.oracle_tie_count, 0);
        // 127 interior inputs * 8 offsets, minus offset-0 overestimates
        assert_eq!(r.cases_run + r.skips.overestimate, 127 * 8);
    }

    #[test]
    fn sweeps_are_deterministic() {
        let spec = SweepSpec::new(Operation::Div, BFLOAT16, &MUL_4X3);
        let a = batch_sweep(&spec).unwrap();
        let b = batch_sweep(&spec).unwrap();
        assert_eq!(a.cases_run, b.cases_run);
        assert_eq!(a.skips, b.skips);
        assert_eq!(a.failure_count, b.failure_count);
        assert_eq!(a.failures, b.failures);
    }

    #[test]
    fn beyond_bound_offsets_fail_loudly_not_wrongly() {
        // 4x3 at -5: failures must be reported as failures
        let mut spec = SweepSpec::new(Operation::Recip, BFLOAT16, &MUL_4X3);
        spec.error_offsets = vec![-5];
        let r = batch_sweep(&spec).unwrap();
        assert!(r.failure_count > 0);
        assert!(!r.failures.is_empty());
        let csv = r.to_csv();
        assert!(csv.lines().count() > 1);
    }

    #[test]
    fn full_range_sweep_accounts_for_range_errors() {
        let mut spec = SweepSpec::new(Operation::Recip, BFLOAT16, &MUL_5X4_ROUNDED);
        spec.input_range = InputRange::Full;
        let r = batch_sweep(&spec).unwrap();
        assert!(r.passed(), "{}", r.render_summary());
        // reciprocals at the top exponent underflow: those inputs are
        // skipped, not dropped silently
        assert!(r.skips.out_of_range > 0);
    }

    #[test]
    fn random_sweep_is_seed_deterministic() {
        let spec = SweepSpec::new(Operation::Div, IEEE_HALF, &MUL_5X4_ROUNDED);
        let a = random_sweep(&spec, 20_000, 42).unwrap();
        let b = random_sweep(&spec, 20_000, 42).unwrap();
        assert_eq!(a.cases_run, b.cases_run);
        assert_eq!(a.failure_count, b.failure_count);
        assert!(a.passed());
        let c = random_sweep(&spec, 20_000, 43).unwrap();
        assert!(c.passed());
    }

    #[test]
    fn individual_case_traces_intermediates() {
        let r = individual_case(0xAA, 0xAA - 0xAA, &MUL_5X4_ROUNDED, &BFLOAT16);
        assert!(r.is_ok());
        let report = individual_case(0xAA, -3, &MUL_5X4_ROUNDED, &BFLOAT16).unwrap();
        assert!(report.passed(), "{}", report.render());
        let text = report.render();
        assert!(text.contains("R        ="));
        assert!(text.contains("C        ="));
        assert!(text.contains("B        ="));
        assert!(text.contains("candidates"));
        assert!(text.contains("pass"));
    }

    #[test]
    fn individual_case_rejects_out_of_binade_x() {
        assert!(individual_case(0x3F, -1, &MUL_5X4_ROUNDED, &BFLOAT16).is_err());
    }

    #[test]
    fn discovery_measures_bfloat16_bounds() {
        let r = discover_max_correctable(&MUL_4X3, Operation::Recip, BFLOAT16).unwrap();
        assert_eq!(r.per_offset_failures.len(), 11);
        assert!(r.measured_max_ulps >= 3);
    }

    #[test]
    fn oversized_sweeps_are_rejected() {
        let spec = SweepSpec::new(Operation::Div, crate::formats::IEEE_SINGLE, &MUL_5X4_ROUNDED);
        assert!(matches!(
            batch_sweep(&spec),
            Err(HarnessError::TooManyCases { .. })
        ));
    }

    #[test]
    fn directed_sweeps_only_for_recip() {
        let mut spec = SweepSpec::new(Operation::Div, BFLOAT16, &MUL_5X4_ROUNDED);
        spec.mode = RoundingMode::TowardZero;
        assert_eq!(batch_sweep(&spec), Err(HarnessError::UnsupportedMode));
    }

    #[test]
    fn directed_recip_sweep_bfloat16() {
        for mode in [
            RoundingMode::TowardZero,
            RoundingMode::TowardNegative,
            RoundingMode::TowardPositive,
        ] {
            let mut spec = SweepSpec::new(Operation::Recip, BFLOAT16, &MUL_5X4_ROUNDED);
            spec.mode = mode;
            let r = batch_sweep(&spec).unwrap();
            assert!(r.passed(), "{mode:?}: {}", r.render_summary());
            assert_eq!(r.tie_count, 0);
        }
    }
}

//! Brute-force verification of the midpoint-impossibility results.
//!
//! Reciprocals of normal numbers are either powers of two or have infinite
//! binary expansions; quotients can be exact but never midpoints at equal
//! or higher precision; square roots of non-perfect-squares are irrational
//! and roots of perfect squares never land on midpoints. These facts are
//! what lets the correction kernels use strict comparisons only. The
//! scanners here check them exhaustively at configurable small precisions
//! and produce witness reports for any violation.

use std::fmt;

use num_traits::Zero;
use rayon::prelude::*;

use crate::rational::ExactRational;

/// Classification of an exact positive value against a target precision.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// `B / 2^(m-1) * 2^e` with `2^(m-1) <= B < 2^m` for the queried m.
    Representable { precision: u32 },
    /// Exactly halfway between two adjacent precision-m numbers;
    /// equivalently representable at m+1 but not at m.
    Midpoint { precision: u32 },
    /// Finite binary expansion needing `bits` significand bits, more than
    /// m+1.
    FiniteExpansion { bits: u64 },
    /// No finite binary expansion. `irrational` distinguishes irrational
    /// square roots (which cannot be held as a rational at all) from
    /// rationals with an odd factor in the denominator.
    InfiniteExpansion { irrational: bool },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Representable { .. } => "representable",
            Verdict::Midpoint { .. } => "midpoint",
            Verdict::FiniteExpansion { .. } => "finite",
            Verdict::InfiniteExpansion { irrational: false } => "infinite",
            Verdict::InfiniteExpansion { irrational: true } => "irrational",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TheoryError {
    NotPositive,
    PrecisionTooSmall { n: u32 },
    PrecisionBeyondLimit { n: u32, limit: u32 },
}

impl fmt::Display for TheoryError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TheoryError::NotPositive => write!(f, "classification requires a positive value"),
            TheoryError::PrecisionTooSmall { n } => write!(f, "precision {n} below minimum of 2"),
            TheoryError::PrecisionBeyondLimit { n, limit } => {
                write!(f, "precision {n} beyond configured scan limit {limit}")
            }
        }
    }
}

impl std::error::Error for TheoryError {}

/// Classify a positive rational against precision `m`.
pub fn classify_exact(value: &ExactRational, m: u32) -> Result<Verdict, TheoryError> {
    if !value.is_positive() {
        return Err(TheoryError::NotPositive);
    }
    if m < 2 {
        return Err(TheoryError::PrecisionTooSmall { n: m });
    }
    let denom = value.denom().magnitude();
    if denom.count_ones() != 1 {
        return Ok(Verdict::InfiniteExpansion { irrational: false });
    }
    // value = odd * 2^k; the odd part's bit length is the minimal
    // precision that can represent the value.
    let numer = value.numer().magnitude();
    let odd_bits = numer.bits() - numer.trailing_zeros().unwrap_or(0);
    Ok(if odd_bits <= m as u64 {
        Verdict::Representable { precision: m }
    } else if odd_bits == m as u64 + 1 {
        Verdict::Midpoint { precision: m }
    } else {
        Verdict::FiniteExpansion { bits: odd_bits }
    })
}

/// Exponent of 1/x given the exponent of x.
pub fn reciprocal_exponent(e: i32, is_power_of_two: bool) -> i32 {
    if is_power_of_two {
        -e
    } else {
        -e - 1
    }
}

/// Exponent of a/b from the operand exponents and significands, for the
/// largest representable value not above the quotient.
pub fn quotient_exponent(p: i32, q: i32, a_significand: u64, b_significand: u64) -> i32 {
    if a_significand >= b_significand {
        p - q
    } else {
        p - q - 1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScanOp {
    Recip,
    Div,
    Sqrt,
}

impl ScanOp {
    pub fn name(&self) -> &'static str {
        match self {
            ScanOp::Recip => "recip",
            ScanOp::Div => "div",
            ScanOp::Sqrt => "sqrt",
        }
    }
}

impl fmt::Display for ScanOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One recorded hit: enough to recheck the case independently.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub operation: ScanOp,
    pub input_precision: u32,
    pub output_precision: u32,
    /// Input significand A (numerator for div).
    pub a_significand: u64,
    /// Divisor significand B, division only.
    pub b_significand: Option<u64>,
    /// Input exponent (sqrt scans cover exponents 0 and 1).
    pub input_exponent: i32,
    /// Result binade exponent.
    pub result_exponent: i32,
    /// Odd part of the result numerator, scaled to the claimed precision
    /// for representables (m bits) or left as the m+1-bit midpoint
    /// numerator.
    pub result_significand: u64,
    pub verdict: Verdict,
    /// Exact value, as a rendered rational.
    pub value: String,
    /// Result is a power of two, or a midpoint straddling a binade top;
    /// recorded separately because the inclusive-vs-exclusive reading of
    /// the significand range only differs on these.
    pub boundary: bool,
}

/// Outcome of a scan over one (operation, n, m) triple.
#[derive(Clone, Debug, Default)]
pub struct ScanReport {
    pub operation: Option<ScanOp>,
    pub input_precision: u32,
    pub output_precision: u32,
    pub inputs_scanned: u64,
    pub midpoint_hits: Vec<Witness>,
    pub exact_hits: Vec<Witness>,
    pub finite_count: u64,
    pub infinite_count: u64,
    pub irrational_count: u64,
}

impl ScanReport {
    pub fn conforms(&self) -> bool {
        self.midpoint_hits.is_empty()
    }

    /// CSV with one row per recorded witness:
    /// `operation,n,m,A,B,verdict`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("operation,n,m,A,B,verdict\n");
        for w in self.exact_hits.iter().chain(self.midpoint_hits.iter()) {
            let b = w
                .b_significand
                .map(|b| b.to_string())
                .unwrap_or_default();
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                w.operation,
                w.input_precision,
                w.output_precision,
                w.a_significand,
                b,
                w.verdict.label()
            ));
        }
        out
    }

    /// Line-oriented human-readable table.
    pub fn render_table(&self) -> String {
        let op = self.operation.map(|o| o.name()).unwrap_or("?");
        let mut out = format!(
            "scan {op} n={} m={}: {} inputs, {} midpoint, {} exact, {} finite, {} infinite, {} irrational\n",
            self.input_precision,
            self.output_precision,
            self.inputs_scanned,
            self.midpoint_hits.len(),
            self.exact_hits.len(),
            self.finite_count,
            self.infinite_count,
            self.irrational_count,
        );
        for w in self.exact_hits.iter().chain(self.midpoint_hits.iter()) {
            let b = w
                .b_significand
                .map(|b| format!(" B={:#x}", b))
                .unwrap_or_default();
            out.push_str(&format!(
                "  {} A={:#x}{} 2^{}: value {} -> {}{}\n",
                w.verdict.label(),
                w.a_significand,
                b,
                w.input_exponent,
                w.value,
                w.result_significand,
                if w.boundary { " (boundary)" } else { "" },
            ));
        }
        out
    }
}

/// Configured upper bounds on scan precision, sized so each scan finishes
/// in seconds.
#[derive(Clone, Copy, Debug)]
pub struct ScanLimits {
    pub max_recip_n: u32,
    pub max_div_n: u32,
    pub max_sqrt_n: u32,
}

impl Default for ScanLimits {
    fn default() -> Self {
        ScanLimits {
            max_recip_n: 16,
            max_div_n: 10,
            max_sqrt_n: 12,
        }
    }
}

fn check_precisions(n: u32, m: u32, limit: u32) -> Result<(), TheoryError> {
    if n < 2 {
        return Err(TheoryError::PrecisionTooSmall { n });
    }
    if m < 2 {
        return Err(TheoryError::PrecisionTooSmall { n: m });
    }
    if n > limit {
        return Err(TheoryError::PrecisionBeyondLimit { n, limit });
    }
    Ok(())
}

fn make_witness(
    operation: ScanOp,
    n: u32,
    m: u32,
    a: u64,
    b: Option<u64>,
    input_exponent: i32,
    value: &ExactRational,
    verdict: Verdict,
) -> Witness {
    let numer = value.numer().magnitude();
    let odd_bits = numer.bits() - numer.trailing_zeros().unwrap_or(0);
    let odd_part: u64 = (numer >> numer.trailing_zeros().unwrap_or(0))
        .try_into()
        .unwrap_or(u64::MAX);
    let result_significand = match verdict {
        Verdict::Representable { precision } => odd_part << (precision as u64 - odd_bits),
        _ => odd_part,
    };
    let boundary = match verdict {
        Verdict::Representable { .. } => value.is_power_of_two(),
        Verdict::Midpoint { precision } => odd_part == (1u64 << (precision + 1)) - 1,
        _ => false,
    };
    Witness {
        operation,
        input_precision: n,
        output_precision: m,
        a_significand: a,
        b_significand: b,
        input_exponent,
        result_exponent: value.floor_log2(),
        result_significand,
        verdict,
        value: value.to_string(),
        boundary,
    }
}

#[derive(Default)]
struct Tally {
    scanned: u64,
    midpoints: Vec<Witness>,
    exacts: Vec<Witness>,
    finite: u64,
    infinite: u64,
    irrational: u64,
}

impl Tally {
    fn absorb(&mut self, other: Tally) {
        self.scanned += other.scanned;
        self.midpoints.extend(other.midpoints);
        self.exacts.extend(other.exacts);
        self.finite += other.finite;
        self.infinite += other.infinite;
        self.irrational += other.irrational;
    }

    fn record(
        &mut self,
        operation: ScanOp,
        n: u32,
        m: u32,
        a: u64,
        b: Option<u64>,
        input_exponent: i32,
        value: &ExactRational,
        verdict: Verdict,
    ) {
        self.scanned += 1;
        match verdict {
            Verdict::Representable { .. } => {
                self.exacts
                    .push(make_witness(operation, n, m, a, b, input_exponent, value, verdict));
            }
            Verdict::Midpoint { .. } => {
                self.midpoints
                    .push(make_witness(operation, n, m, a, b, input_exponent, value, verdict));
            }
            Verdict::FiniteExpansion { .. } => self.finite += 1,
            Verdict::InfiniteExpansion { irrational: false } => self.infinite += 1,
            Verdict::InfiniteExpansion { irrational: true } => self.irrational += 1,
        }
    }

    fn into_report(self, operation: ScanOp, n: u32, m: u32) -> ScanReport {
        ScanReport {
            operation: Some(operation),
            input_precision: n,
            output_precision: m,
            inputs_scanned: self.scanned,
            midpoint_hits: self.midpoints,
            exact_hits: self.exacts,
            finite_count: self.finite,
            infinite_count: self.infinite,
            irrational_count: self.irrational,
        }
    }
}

/// Partitioned parallel run over a significand range with a deterministic
/// in-order merge.
fn parallel_tally<F>(lo: u64, hi: u64, per_input: F) -> Tally
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

/// Scan all non-power-of-two inputs of precision n and classify their
/// reciprocals at precision m. Conforming reports contain neither
/// representable nor midpoint hits: reciprocal expansions are infinite.
pub fn scan_reciprocal_midpoints(n: u32, m: u32) -> Result<ScanReport, TheoryError> {
    scan_reciprocal_midpoints_limited(n, m, &ScanLimits::default())
}

pub fn scan_reciprocal_midpoints_limited(
    n: u32,
    m: u32,
    limits: &ScanLimits,
) -> Result<ScanReport, TheoryError> {
    check_precisions(n, m, limits.max_recip_n)?;
    let lo = (1u64 << (n - 1)) + 1;
    let hi = 1u64 << n;
    let tally = parallel_tally(lo, hi, |a, t| {
        let value = ExactRational::new(1u64 << (n - 1), a);
        let verdict = classify_exact(&value, m).expect("positive by construction");
        t.record(ScanOp::Recip, n, m, a, None, 0, &value, verdict);
    });
    Ok(tally.into_report(ScanOp::Recip, n, m))
}

/// Scan all pairs of distinct non-power-of-two precision-n significands
/// and classify their quotients at precision m. Zero midpoints required
/// whenever m >= n-1; below that bound hits exist and are reported.
pub fn scan_division_midpoints(n: u32, m: u32) -> Result<ScanReport, TheoryError> {
    scan_division_midpoints_limited(n, m, &ScanLimits::default())
}

pub fn scan_division_midpoints_limited(
    n: u32,
    m: u32,
    limits: &ScanLimits,
) -> Result<ScanReport, TheoryError> {
    check_precisions(n, m, limits.max_div_n)?;
    let lo = (1u64 << (n - 1)) + 1;
    let hi = 1u64 << n;
    let tally = parallel_tally(lo, hi, |a, t| {
        for b in lo..hi {
            if a == b {
                continue;
            }
            let value = ExactRational::new(a, b);
            let verdict = classify_exact(&value, m).expect("positive by construction");
            t.record(ScanOp::Div, n, m, a, Some(b), 0, &value, verdict);
        }
    });
    Ok(tally.into_report(ScanOp::Div, n, m))
}

/// Scan both input binades [1,2) and [2,4) of precision n and classify
/// exact square roots at precision n. Non-perfect-square inputs have
/// irrational roots and count as infinite expansions.
pub fn scan_sqrt_midpoints(n: u32) -> Result<ScanReport, TheoryError> {
    scan_sqrt_midpoints_limited(n, &ScanLimits::default())
}

pub fn scan_sqrt_midpoints_limited(n: u32, limits: &ScanLimits) -> Result<ScanReport, TheoryError> {
    check_precisions(n, n, limits.max_sqrt_n)?;
    let lo = (1u64 << (n - 1)) + 1;
    let hi = 1u64 << n;
    let mut total = Tally::default();
    for input_exponent in [0i32, 1] {
        let tally = parallel_tally(lo, hi, |a, t| {
            let value = ExactRational::from_significand(a, input_exponent, n);
            let verdict = match value.sqrt_exact() {
                Some(root) => {
                    let v = classify_exact(&root, n).expect("positive by construction");
                    t.record(ScanOp::Sqrt, n, n, a, None, input_exponent, &root, v);
                    return;
                }
                None => Verdict::InfiniteExpansion { irrational: true },
            };
            t.record(ScanOp::Sqrt, n, n, a, None, input_exponent, &value, verdict);
        });
        total.absorb(tally);
    }
    Ok(total.into_report(ScanOp::Sqrt, n, n))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formats::{decode, encode, FpFormat};

    fn rat(n: i64, d: i64) -> ExactRational {
        ExactRational::new(n, d)
    }

    #[test]
    fn classify_examples() {
        assert_eq!(
            classify_exact(&rat(1, 10), 24).unwrap(),
            Verdict::InfiniteExpansion { irrational: false }
        );
        assert_eq!(
            classify_exact(&rat(5, 4), 2).unwrap(),
            Verdict::Midpoint { precision: 2 }
        );
        for m in [2u32, 7, 24, 53] {
            assert_eq!(
                classify_exact(&rat(1, 1), m).unwrap(),
                Verdict::Representable { precision: m }
            );
        }
        assert_eq!(
            classify_exact(&rat(9, 8), 3).unwrap(),
            Verdict::Midpoint { precision: 3 }
        );
        assert_eq!(
            classify_exact(&rat(9, 8), 4).unwrap(),
            Verdict::Representable { precision: 4 }
        );
        assert_eq!(
            classify_exact(&rat(2_047, 1_024), 5).unwrap(),
            Verdict::FiniteExpansion { bits: 11 }
        );
        assert_eq!(
            classify_exact(&rat(-1, 2), 5),
            Err(TheoryError::NotPositive)
        );
    }

    #[test]
    fn midpoint_iff_representable_next_precision() {
        // spot grid of odd numerators and scales
        for odd in [3u64, 5, 9, 11, 23, 189, 1023] {
            for shift in [0i32, -4, 7] {
                let v = ExactRational::from_integer(odd) * ExactRational::pow2(shift);
                for m in 2..14u32 {
                    let at_m = classify_exact(&v, m).unwrap();
                    let at_m1 = classify_exact(&v, m + 1).unwrap();
                    let is_mid = matches!(at_m, Verdict::Midpoint { .. });
                    let rep_next = matches!(at_m1, Verdict::Representable { .. });
                    let rep_here = matches!(at_m, Verdict::Representable { .. });
                    assert_eq!(is_mid, rep_next && !rep_here, "odd={odd} shift={shift} m={m}");
                }
            }
        }
    }

    #[test]
    fn representable_round_trips_through_encoding() {
        // consistency with the formats module: representable at m means the
        // value encodes and decodes at a precision-m format
        let v = rat(27, 16);
        let m = 5;
        assert_eq!(
            classify_exact(&v, m).unwrap(),
            Verdict::Representable { precision: m }
        );
        let fmt = FpFormat::new("m5", 5, 8, 127);
        let sig = 27u64 << (m as u64 - 5); // odd part already m bits? 27 = 5 bits
        let enc = encode(
            &fmt,
            crate::formats::Decoded {
                sign: false,
                exponent: 0,
                significand: sig,
            },
        )
        .unwrap();
        let dec = decode(&fmt, enc).unwrap();
        assert_eq!(fmt.value_of(dec.significand, dec.exponent), v);
    }

    #[test]
    fn exponent_maps() {
        assert_eq!(reciprocal_exponent(0, true), 0);
        assert_eq!(reciprocal_exponent(0, false), -1);
        assert_eq!(reciprocal_exponent(3, false), -4);
        assert_eq!(quotient_exponent(0, 0, 12, 12), 0);
        assert_eq!(quotient_exponent(2, 0, 9, 15), 1);
        assert_eq!(quotient_exponent(0, 0, 12, 10), 0);
    }

    #[test]
    fn recip_scan_finds_nothing_at_desk_scale() {
        let r = scan_reciprocal_midpoints(8, 8).unwrap();
        assert_eq!(r.inputs_scanned, 127);
        assert!(r.midpoint_hits.is_empty());
        assert!(r.exact_hits.is_empty());
        assert_eq!(r.infinite_count, 127);

        let r = scan_reciprocal_midpoints(4, 24).unwrap();
        assert_eq!(r.inputs_scanned, 7);
        assert!(r.conforms());
        assert!(r.exact_hits.is_empty());
    }

    #[test]
    fn recip_scan_smallest_precision() {
        // n=2: single interior point A=3, 1/1.5 = 2/3
        let r = scan_reciprocal_midpoints(2, 2).unwrap();
        assert_eq!(r.inputs_scanned, 1);
        assert_eq!(r.infinite_count, 1);
    }

    #[test]
    fn div_scan_sharpness_witness() {
        // m = n-1 = 3: clean
        let r = scan_division_midpoints(4, 3).unwrap();
        assert_eq!(r.inputs_scanned, 42);
        assert!(r.conforms());
        // m = 2 < n-1: exactly the 1.875/1.5 counterexample appears
        let r = scan_division_midpoints(4, 2).unwrap();
        let hits: Vec<(u64, Option<u64>)> = r
            .midpoint_hits
            .iter()
            .map(|w| (w.a_significand, w.b_significand))
            .collect();
        assert_eq!(hits, vec![(15, Some(12))]);
        let w = &r.midpoint_hits[0];
        assert_eq!(w.value, "5/4");
        assert_eq!(w.verdict, Verdict::Midpoint { precision: 2 });
        // witness re-verifies under classify_exact
        assert_eq!(
            classify_exact(&rat(15, 12), 2).unwrap(),
            Verdict::Midpoint { precision: 2 }
        );
    }

    #[test]
    fn div_scan_exact_hits_are_data_not_failures() {
        let r = scan_division_midpoints(4, 2).unwrap();
        // 15/10 = 3/2 and 9/12 = 3/4 are representable at m=2
        let exacts: Vec<(u64, Option<u64>)> = r
            .exact_hits
            .iter()
            .map(|w| (w.a_significand, w.b_significand))
            .collect();
        assert!(exacts.contains(&(15, Some(10))));
        assert!(exacts.contains(&(9, Some(12))));
    }

    #[test]
    fn div_scan_equal_precision_clean() {
        let r = scan_division_midpoints(8, 8).unwrap();
        assert_eq!(r.inputs_scanned, 127 * 126);
        assert!(r.conforms());
        assert_eq!(r.exact_hits.len(), 201);
    }

    #[test]
    fn sqrt_scan_both_binades() {
        let r = scan_sqrt_midpoints(8).unwrap();
        assert_eq!(r.inputs_scanned, 254);
        assert!(r.conforms());
        assert_eq!(r.exact_hits.len(), 7);
        assert_eq!(r.irrational_count, 247);

        let r = scan_sqrt_midpoints(4).unwrap();
        assert_eq!(r.inputs_scanned, 14);
        assert_eq!(r.exact_hits.len(), 1);
        assert_eq!(r.irrational_count, 13);
    }

    #[test]
    fn sqrt_of_nine_eighths_is_irrational() {
        assert_eq!(rat(9, 8).sqrt_exact(), None);
    }

    #[test]
    fn scan_limits_are_enforced() {
        assert!(matches!(
            scan_reciprocal_midpoints(17, 8),
            Err(TheoryError::PrecisionBeyondLimit { n: 17, limit: 16 })
        ));
        assert!(matches!(
            scan_division_midpoints(11, 8),
            Err(TheoryError::PrecisionBeyondLimit { .. })
        ));
        let loose = ScanLimits {
            max_div_n: 11,
            ..ScanLimits::default()
        };
        assert!(scan_division_midpoints_limited(5, 5, &loose).is_ok());
        assert!(matches!(
            scan_reciprocal_midpoints(2, 1),
            Err(TheoryError::PrecisionTooSmall { n: 1 })
        ));
    }

    #[test]
    fn csv_contains_witness_rows() {
        let r = scan_division_midpoints(4, 2).unwrap();
        let csv = r.to_csv();
        assert!(csv.starts_with("operation,n,m,A,B,verdict\n"));
        assert!(csv.contains("div,4,2,15,12,midpoint"));
    }
}

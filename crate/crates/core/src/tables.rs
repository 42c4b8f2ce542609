//! Published verification rows and the checks that recompute them.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rug::{Float, Integer};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mpnum::{BigReal, PrecisionContext};
use crate::radseries::{term_trace, Certificate, Evaluator, FormulaKind, FormulaParams, TruncationPolicy};

/// Allowed distance between the summed float and the exact value of a row
/// in the tables that hold their floats to it.
pub const ROW_FLOAT_TOLERANCE: f64 = 1e-4;
/// Allowed distance of each breakdown term from its published value.
pub const BREAKDOWN_TERM_TOLERANCE: f64 = 5e-7;
pub const BREAKDOWN_TOTAL_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TableName {
    Table1,
    Table2,
    Table3,
    Breakdown,
}

impl TableName {
    pub const ALL: [TableName; 4] = [TableName::Table1, TableName::Table2, TableName::Table3, TableName::Breakdown];

    pub fn name(self) -> &'static str {
        match self {
            TableName::Table1 => "table1",
            TableName::Table2 => "table2",
            TableName::Table3 => "table3",
            TableName::Breakdown => "breakdown",
        }
    }

    /// Float tolerance a row must meet besides certifying; distinct-parts rows
    /// are judged on the certified integer alone.
    pub fn float_tolerance(self) -> Option<f64> {
        match self {
            TableName::Table1 | TableName::Table2 => Some(ROW_FLOAT_TOLERANCE),
            TableName::Table3 | TableName::Breakdown => None,
        }
    }

    /// The rows of a value table; empty for the breakdown.
    pub fn rows(self) -> &'static [PublishedRow] {
        match self {
            TableName::Table1 => &TABLE1,
            TableName::Table2 => &TABLE2,
            TableName::Table3 => &TABLE3,
            TableName::Breakdown => &[],
        }
    }
}

impl fmt::Display for TableName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TableName {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        TableName::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown table {s:?}")))
    }
}

/// An exact value next to the near-integer float printed beside it.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PublishedRow {
    pub kind: FormulaKind,
    pub r: u32,
    pub l: Option<u32>,
    pub n: u64,
    pub exact: u64,
    pub displayed: &'static str,
}

const fn blr(r: u32, l: u32, n: u64, exact: u64, displayed: &'static str) -> PublishedRow {
    PublishedRow { kind: FormulaKind::Blr, r, l: Some(l), n, exact, displayed }
}

const fn pd(r: u32, n: u64, exact: u64, displayed: &'static str) -> PublishedRow {
    PublishedRow { kind: FormulaKind::Pd, r, l: Some(2), n, exact, displayed }
}

/// 3-regular r-colored partitions.
pub static TABLE1: [PublishedRow; 4] = [
    blr(50, 3, 7, 420621700, "420621699.99999"),
    blr(39, 3, 10, 24030437457, "24030437457"),
    blr(63, 3, 4, 849807, "849806.999999"),
    blr(76, 3, 5, 30050020, "30050019.999999"),
];

/// 6-regular r-colored partitions.
pub static TABLE2: [PublishedRow; 4] = [
    blr(75, 6, 5, 28462590, "28462589.9998"),
    blr(25, 6, 11, 3755606050, "3755606049.9999"),
    blr(12, 6, 22, 299225122470, "299225122470.0000"),
    blr(22, 6, 12, 5175590618, "5175590617.9999"),
];

/// r-colored partitions into distinct parts.
pub static TABLE3: [PublishedRow; 5] = [
    pd(20, 5, 46724, "46723.99988778628"),
    pd(25, 10, 206841715, "206841714.9999436"),
    pd(30, 7, 9603210, "9603209.99997784"),
    pd(50, 9, 12141387350, "12141387349.99999"),
    pd(73, 6, 261788950, "261788949.9999971"),
];

/// The `p_d^(25)(10)` series through `k = 11`: one published term per odd `k`.
pub const BREAKDOWN_R: u32 = 25;
pub const BREAKDOWN_N: u64 = 10;
pub const BREAKDOWN_K_MAX: u64 = 11;
pub static BREAKDOWN_TERMS: [(u64, f64); 6] =
    [(1, 206841714.5985165), (3, 0.412498), (5, -0.0120247), (7, 0.00107527), (9, -0.000487608), (11, -0.0000162379)];
pub const BREAKDOWN_TOTAL: f64 = 206841714.9995613;
pub const BREAKDOWN_EXACT: u64 = 206841715;

#[derive(Clone, Debug)]
pub struct RowCheck {
    pub row: PublishedRow,
    pub certificate: Certificate,
    /// `|float - exact|`.
    pub float_error: f64,
    pub elapsed: Duration,
    /// Certified, equal to the exact value, and within the float tolerance if any.
    pub passed: bool,
}

pub fn check_row(
    evaluator: &mut Evaluator,
    row: &PublishedRow,
    float_tolerance: Option<f64>,
    policy: &TruncationPolicy,
    ctx: &PrecisionContext,
) -> Result<RowCheck> {
    let start = Instant::now();
    let params = row.kind.params(Some(row.r), row.l, row.n)?;
    let certificate = evaluator.evaluate(row.kind, &params, policy, ctx, false)?.certificate;
    let elapsed = start.elapsed();
    let exact = Integer::from(row.exact);
    let diff = Float::with_val(certificate.precision_bits, certificate.float_value.as_float() - &exact);
    let float_error = diff.abs().to_f64();
    let passed = certificate.certified
        && certificate.integer_value == exact
        && float_tolerance.is_none_or(|tol| float_error < tol);
    Ok(RowCheck { row: *row, certificate, float_error, elapsed, passed })
}

pub fn check_table(table: TableName, policy: &TruncationPolicy, ctx: &PrecisionContext) -> Result<Vec<RowCheck>> {
    let mut evaluator = Evaluator::new();
    table.rows().iter().map(|row| check_row(&mut evaluator, row, table.float_tolerance(), policy, ctx)).collect()
}

#[derive(Clone, Debug)]
pub struct BreakdownTerm {
    pub k: u64,
    pub computed: BigReal,
    pub published: f64,
    pub passed: bool,
}

#[derive(Clone, Debug)]
pub struct BreakdownCheck {
    pub terms: Vec<BreakdownTerm>,
    pub total: BigReal,
    pub total_passed: bool,
    /// `exact - total`.
    pub error: f64,
}

impl BreakdownCheck {
    pub fn passed(&self) -> bool {
        self.total_passed && self.terms.iter().all(|t| t.passed)
    }
}

pub fn check_breakdown(ctx: &PrecisionContext) -> Result<BreakdownCheck> {
    let params = FormulaParams::b_l_r(BREAKDOWN_R, 2, BREAKDOWN_N);
    let trace = term_trace(FormulaKind::Pd, &params, BREAKDOWN_K_MAX, ctx)?;
    let terms = BREAKDOWN_TERMS
        .iter()
        .map(|&(k, published)| {
            let computed = trace[k as usize - 1].contribution.clone();
            let passed = (computed.to_f64() - published).abs() <= BREAKDOWN_TERM_TOLERANCE;
            BreakdownTerm { k, computed, published, passed }
        })
        .collect();
    let total = trace.last().expect("k_max >= 1").running_total.clone();
    let total_passed = (total.to_f64() - BREAKDOWN_TOTAL).abs() <= BREAKDOWN_TOTAL_TOLERANCE;
    let error = BREAKDOWN_EXACT as f64 - total.to_f64();
    Ok(BreakdownCheck { terms, total, total_passed, error })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qoracle::coefficients;

    #[test]
    fn published_exact_values_agree_with_oracle() {
        for table in [TableName::Table1, TableName::Table2, TableName::Table3] {
            for row in table.rows() {
                let params = row.kind.params(Some(row.r), row.l, row.n).unwrap();
                let spec = row.kind.oracle_spec(&params).unwrap();
                let t = coefficients(spec, row.n as usize).unwrap();
                assert_eq!(*t.get(row.n as usize).unwrap(), row.exact, "{row:?}");
            }
        }
    }

    #[test]
    fn displayed_floats_are_near_the_exact_values() {
        for table in [TableName::Table1, TableName::Table2, TableName::Table3] {
            for row in table.rows() {
                let shown: f64 = row.displayed.parse().unwrap();
                assert!((shown - row.exact as f64).abs() < 2e-4, "{row:?}");
            }
        }
    }

    #[test]
    fn names_parse() {
        for t in TableName::ALL {
            assert_eq!(t.name().parse::<TableName>().unwrap(), t);
        }
        assert!("table4".parse::<TableName>().is_err());
    }

    #[test]
    fn breakdown_reproduces() {
        let check = check_breakdown(&PrecisionContext::new(128).unwrap()).unwrap();
        assert!(check.passed(), "{check:?}");
        assert!((check.error - 4e-4).abs() < 1e-4);
    }

    #[test]
    fn distinct_parts_rows_certify() {
        let ctx = PrecisionContext::new(128).unwrap();
        let rows = check_table(TableName::Table3, &TruncationPolicy::default(), &ctx).unwrap();
        assert!(rows.iter().all(|r| r.passed), "{rows:?}");
        // the float still sits within a few 1e-4 of the integer
        assert!(rows.iter().all(|r| r.float_error < 1e-3));
    }

    #[test]
    fn table_one_reproduces() {
        let ctx = PrecisionContext::new(128).unwrap();
        let rows = check_table(TableName::Table1, &TruncationPolicy::default(), &ctx).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.passed), "{rows:?}");
    }
}

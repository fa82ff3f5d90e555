//! The structured document every run produces.

use cyclab_core::families::{ConvergenceRow, LimitDirection};
use cyclab_core::numerics::{EvalPoint, Exponents, Precision};
use cyclab_core::propositions::Ineq9Parts;
use cyclab_core::search::{FuzzSummary, SearchOutcome, Target, ThresholdEstimate};
use cyclab_core::{serde_float, CheckReport};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub schema: u32,
    pub command: String,
    pub config: serde_json::Value,
    pub results: Vec<Entry>,
    #[serde(with = "serde_float")]
    pub wall_time: f64,
    pub seed: u64,
    pub precision_mode: Precision,
    pub violations: usize,
    pub exit_code: i32,
}

impl RunReport {
    /// The report with its timing zeroed, for byte comparisons.
    pub fn payload(&self) -> RunReport {
        RunReport {
            wall_time: 0.0,
            ..self.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[allow(clippy::large_enum_variant)]
pub enum Entry {
    Eval(EvalEntry),
    Check(CheckReport),
    Fuzz(FuzzSummary),
    Search(SearchOutcome),
    Threshold(ThresholdEstimate),
    RemarkA(RemarkAEntry),
    RemarkB(RemarkBEntry),
    RemarkC(RemarkCEntry),
    RemarkD(RemarkDEntry),
    Sweep(SweepRow),
    Error(ErrorEntry),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalEntry {
    pub point: EvalPoint,
    #[serde(with = "serde_float")]
    pub alpha: f64,
    pub terms: Vec<f64>,
    #[serde(with = "serde_float")]
    pub sum: f64,
    /// Extended-precision sum as a decimal string.
    pub sum_extended: String,
    #[serde(with = "serde_float")]
    pub log_product: f64,
    pub feasible: bool,
    pub on_boundary: bool,
    /// Which proposition was checked, if either applies.
    pub claim: Option<CheckReport>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemarkAEntry {
    pub n: usize,
    #[serde(with = "serde_float")]
    pub x: f64,
    #[serde(with = "serde_float")]
    pub beta: f64,
    pub point: EvalPoint,
    #[serde(with = "serde_float")]
    pub difference: f64,
    pub check: CheckReport,
    pub directions: Vec<LimitDirection>,
    pub probes: Vec<DirectionProbe>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectionProbe {
    pub direction: LimitDirection,
    pub values: Vec<(f64, f64)>,
    pub diverges: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemarkBEntry {
    pub n: usize,
    #[serde(with = "serde_float")]
    pub alpha: f64,
    #[serde(with = "serde_float")]
    pub gamma: f64,
    /// `(x_2, …, x_n)` of the normalized point.
    pub rest: EvalPoint,
    pub sides: Ineq9Parts,
    pub check: CheckReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemarkCEntry {
    pub n: usize,
    pub exponents: Exponents,
    pub clearance: FuzzSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemarkDEntry {
    pub n: usize,
    #[serde(with = "serde_float")]
    pub x: f64,
    pub point: EvalPoint,
    #[serde(with = "serde_float")]
    pub limit: f64,
    pub limit_positive: bool,
    pub rows: Vec<ConvergenceRow>,
    pub checks: Vec<CheckReport>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub n: usize,
    #[serde(with = "serde_float")]
    pub alpha: f64,
    pub predicate: Target,
    #[serde(with = "serde_float")]
    pub min_margin: f64,
    pub violations: usize,
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorEntry {
    pub message: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<Box<SearchOutcome>>,
}

pub const CSV_HEADER: &str = "n,alpha,predicate,min_margin,violations,evaluations";

impl SweepRow {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{:e},{},{}",
            self.n, self.alpha, self.predicate, self.min_margin, self.violations, self.evaluations
        )
    }
}

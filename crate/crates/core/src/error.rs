use thiserror::Error;

use crate::propositions::PredicateId;
use crate::search::SearchOutcome;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("coordinate {index} is not a positive finite real: {value}")]
    NonPositiveInput { index: usize, value: f64 },

    #[error("a point needs at least one coordinate")]
    EmptyPoint,

    #[error("index {index} out of range for a point of dimension {n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("{predicate} is not claimed here: {reason}")]
    HypothesisViolated {
        predicate: PredicateId,
        reason: String,
    },

    #[error("gamma = (n-1)(alpha-1)/n is degenerate for n = {n}, alpha = {alpha}")]
    DegenerateGamma { n: usize, alpha: f64 },

    #[error("extended precision cannot resolve the sign of {value:e} (error bound {bound:e})")]
    PrecisionExhausted { value: f64, bound: f64 },

    #[error("search budget exhausted without a confirmed violation")]
    BudgetExhausted(Box<SearchOutcome>),

    #[error("invalid bracket: {0}")]
    BracketInvalid(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("parse error: {0}")]
    Parse(String),
}

//! Randomized clearance runs, adversarial margin minimization, and
//! bisection brackets for the open thresholds.
//!
//! Everything here is deterministic given a seed: work is split into tasks
//! that each own an RNG stream derived from `(seed, task index)`, and
//! parallel results are merged in task order.

mod bisect;
mod fuzz;
mod minimize;
mod sampling;
mod simplex;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::numerics::{EvalPoint, Margin};
use crate::propositions::{
    check, check_power_sum_reversal, fast_margin_all, power_sum_reversal_fast, CheckOptions,
    PredicateId,
};

pub use bisect::{
    bisect_alpha_n_case2, bisect_alpha_n_reverse, BisectConfig, Clearance, Probe, ThresholdCase,
    ThresholdEstimate,
};
pub use fuzz::{fuzz, fuzz_points, FuzzConfig, FuzzRegion, FuzzSummary, FUZZ_CHUNK};
pub use minimize::{
    minimize_margin, search, ModeBest, SearchConfig, SearchGoal, SearchMode, SearchOutcome,
};
pub use sampling::{
    draw_logs, point_from_draw, sample_points, stream_rng, SampleConfig, SampleStream,
};
pub use simplex::{nelder_mead, Descent, SimplexParams};

/// What a fuzz or search run attacks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Target {
    Predicate(PredicateId),
    /// `Σx^β ≥ Σx`, claimed for `β > 1` on feasible points and for
    /// `β ≤ 1 − n` on `∏ x_i = 1`.
    PowerSumReversal,
}

impl From<PredicateId> for Target {
    fn from(p: PredicateId) -> Target {
        Target::Predicate(p)
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Target::Predicate(p) => write!(f, "{p}"),
            Target::PowerSumReversal => f.write_str("ineq3_reversed"),
        }
    }
}

impl Target {
    /// Dimension of the points the target is evaluated on.
    pub fn dim(self, n: usize) -> usize {
        match self {
            Target::Predicate(p) if p.takes_rest() => n.saturating_sub(1),
            _ => n,
        }
    }

    pub fn is_indexed(self) -> bool {
        matches!(self, Target::Predicate(p) if p.is_indexed())
    }

    /// Whether the target's points are tied to the feasible region.
    pub fn constrained(self) -> bool {
        match self {
            Target::Predicate(p) => {
                !p.takes_rest()
                    && !matches!(
                        p,
                        PredicateId::Ineq2 | PredicateId::Ineq4 | PredicateId::Prop2Step
                    )
            }
            Target::PowerSumReversal => true,
        }
    }

    pub fn check(
        self,
        p: &EvalPoint,
        exponent: f64,
        index: Option<usize>,
        opts: &CheckOptions,
    ) -> Result<Margin> {
        match self {
            Target::Predicate(id) => check(id, p, exponent, index, opts),
            Target::PowerSumReversal => check_power_sum_reversal(p, exponent, opts),
        }
    }

    /// Fast margin, minimized over indices; returns the minimizing index.
    pub fn fast(self, logs: &[f64], exponent: f64) -> (f64, usize) {
        match self {
            Target::Predicate(id) => fast_margin_all(id, logs, exponent),
            Target::PowerSumReversal => (power_sum_reversal_fast(logs, exponent), 0),
        }
    }

    /// Checks every index of an indexed target and returns the smallest
    /// margin, or the single margin otherwise.
    pub fn check_all(
        self,
        p: &EvalPoint,
        exponent: f64,
        opts: &CheckOptions,
    ) -> Result<(Margin, Option<usize>)> {
        if !self.is_indexed() {
            return Ok((self.check(p, exponent, None, opts)?, None));
        }
        let mut best: Option<(Margin, Option<usize>)> = None;
        for i in 0..p.n() {
            let m = self.check(p, exponent, Some(i), opts)?;
            if best.as_ref().is_none_or(|(b, _)| m.value < b.value) {
                best = Some((m, Some(i)));
            }
        }
        Ok(best.expect("non-empty point"))
    }
}

/// A point with its confirmed margin.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub point: EvalPoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    pub margin: Margin,
}

/// Total order used to merge parallel results: margin value first, then
/// the canonical text of the point.
pub(crate) fn witness_order(
    a: (&Margin, &EvalPoint),
    b: (&Margin, &EvalPoint),
) -> std::cmp::Ordering {
    a.0.value
        .total_cmp(&b.0.value)
        .then_with(|| a.1.witness_strings().cmp(&b.1.witness_strings()))
}

/// Start points taken from the parametric families that are known to sit
/// near, or inside, the failure region of `target` at this exponent.
pub fn family_seeds(target: Target, n: usize, exponent: f64) -> Vec<EvalPoint> {
    use crate::families::*;
    match target {
        Target::Predicate(PredicateId::Prop2) | Target::Predicate(PredicateId::Prop1) if n >= 2 => {
            [1.02, 1.05, 1.1, 1.2, 1.3]
                .iter()
                .filter_map(|&x| remark_d_point(&RemarkDFamily { n, x }).ok())
                .collect()
        }
        Target::Predicate(PredicateId::Ineq8) => {
            remark_b_full_point(&RemarkBFamily { n, alpha: exponent })
                .into_iter()
                .collect()
        }
        Target::Predicate(PredicateId::Ineq9) => {
            remark_b_point(&RemarkBFamily { n, alpha: exponent })
                .into_iter()
                .collect()
        }
        Target::Predicate(PredicateId::Ineq3) | Target::PowerSumReversal => [0.5, 2.0]
            .iter()
            .filter_map(|&x| {
                remark_a_point(&RemarkAFamily {
                    n,
                    x,
                    beta: exponent,
                })
                .ok()
            })
            .collect(),
        _ => Vec::new(),
    }
}

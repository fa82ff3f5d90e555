//! Bisection brackets for the least exponent at which an inequality starts
//! to hold.
//!
//! A probe counts as violating only when a search confirms a violation in
//! extended precision; otherwise it is a clearance within the stated budget.
//! The high end of a bracket is therefore an upper estimate of the true
//! threshold, never a proof.

use serde::{Deserialize, Serialize};

use super::family_seeds;
use super::fuzz::{fuzz, FuzzConfig, FuzzSummary};
use super::minimize::{search, SearchConfig, SearchOutcome};
use crate::error::{Error, Result};
use crate::numerics::{critical_alpha, reverse_alpha_floor, EvalPoint};
use crate::propositions::{CheckOptions, PredicateId};

/// First violating probe for the Case 2 bracket.
pub const CASE2_LO_INIT: f64 = 1.05;
/// First violating probe for the reversed bracket; halved (doubled in
/// magnitude) until a violation appears or `REVERSE_LO_LIMIT` is passed.
pub const REVERSE_LO_INIT: f64 = -40.0;
pub const REVERSE_LO_LIMIT: f64 = -5120.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdCase {
    /// Least `α > 1` from which the Case 2 bound holds.
    Case2,
    /// Least `α < 1` down to which the reversed inequality holds.
    Reverse,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BisectConfig {
    pub tolerance: f64,
    /// Search evaluations per probe.
    pub budget: usize,
    pub restarts: usize,
    /// Fuzzed points behind every clearance record.
    pub clearance_count: usize,
    pub seed: u64,
    pub opts: CheckOptions,
}

impl Default for BisectConfig {
    fn default() -> Self {
        BisectConfig {
            tolerance: 0.01,
            budget: 100_000,
            restarts: 20,
            clearance_count: 10_000,
            seed: 0,
            opts: CheckOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    #[serde(with = "crate::serde_float")]
    pub alpha: f64,
    pub violated: bool,
    #[serde(with = "crate::serde_float")]
    pub best_margin: f64,
    pub evaluations: usize,
}

/// Evidence that no violation was found at `alpha` within budget.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Clearance {
    #[serde(with = "crate::serde_float")]
    pub alpha: f64,
    pub search: SearchOutcome,
    pub fuzz: FuzzSummary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ThresholdEstimate {
    pub n: usize,
    pub case: ThresholdCase,
    pub predicate: PredicateId,
    /// `(alpha_lo, alpha_hi)`: a confirmed violation at `alpha_lo`, a
    /// clearance at `alpha_hi`.
    pub bracket: (f64, f64),
    pub tolerance: f64,
    pub witness_lo: SearchOutcome,
    pub clearance_hi: Clearance,
    pub probes: Vec<Probe>,
    pub budget_per_probe: usize,
    pub clearance_count: usize,
    pub seed: u64,
    pub note: String,
}

impl ThresholdEstimate {
    pub fn width(&self) -> f64 {
        self.bracket.1 - self.bracket.0
    }
}

#[allow(clippy::large_enum_variant)]
enum Outcome {
    Violated(SearchOutcome),
    Cleared(Clearance),
}

struct Prober {
    n: usize,
    case: ThresholdCase,
    cfg: BisectConfig,
    probes: Vec<Probe>,
}

impl Prober {
    fn predicate(&self) -> PredicateId {
        match self.case {
            ThresholdCase::Case2 => PredicateId::Ineq8,
            ThresholdCase::Reverse => PredicateId::Prop2,
        }
    }

    fn family_seeds(&self, alpha: f64) -> Vec<EvalPoint> {
        family_seeds(self.predicate().into(), self.n, alpha)
    }

    fn run_search(&self, alpha: f64, seeds: Vec<EvalPoint>, salt: u64) -> Result<SearchOutcome> {
        let cfg = SearchConfig {
            budget: self.cfg.budget,
            restarts: self.cfg.restarts,
            seed: self.cfg.seed ^ salt.wrapping_mul(0x9E37_79B9_7F4A_7C15),
            seeds,
            opts: CheckOptions {
                force: true,
                ..self.cfg.opts
            },
            ..SearchConfig::default()
        };
        search(self.predicate(), alpha, self.n, &cfg)
    }

    fn probe(&mut self, alpha: f64) -> Result<Outcome> {
        let salt = self.probes.len() as u64;
        let mut found = self.run_search(alpha, self.family_seeds(alpha), salt)?;
        let mut evaluations = found.evaluations;
        let outcome = if found.found_violation() {
            Outcome::Violated(found)
        } else {
            let fcfg = FuzzConfig {
                opts: CheckOptions {
                    force: true,
                    ..self.cfg.opts
                },
                ..FuzzConfig::new(self.n, self.cfg.clearance_count, self.cfg.seed ^ salt)
            };
            let summary = fuzz(self.predicate(), alpha, &fcfg)?;
            evaluations += summary.evaluations;
            match &summary.first_violation {
                Some(w) => {
                    // Polish the fuzz witness into a search outcome.
                    found = self.run_search(alpha, vec![w.point.clone()], salt + 1)?;
                    evaluations += found.evaluations;
                    if found.found_violation() {
                        Outcome::Violated(found)
                    } else {
                        Outcome::Cleared(Clearance {
                            alpha,
                            search: found,
                            fuzz: summary,
                        })
                    }
                }
                None => Outcome::Cleared(Clearance {
                    alpha,
                    search: found,
                    fuzz: summary,
                }),
            }
        };
        let best_margin = match &outcome {
            Outcome::Violated(s) => s.best_margin.value,
            Outcome::Cleared(c) => c.search.best_margin.value.min(c.fuzz.min_margin),
        };
        self.probes.push(Probe {
            alpha,
            violated: matches!(outcome, Outcome::Violated(_)),
            best_margin,
            evaluations,
        });
        Ok(outcome)
    }

    fn finish(
        mut self,
        mut lo: f64,
        mut hi: f64,
        mut witness: SearchOutcome,
        mut clearance: Clearance,
    ) -> Result<ThresholdEstimate> {
        while hi - lo > self.cfg.tolerance {
            let mid = 0.5 * (lo + hi);
            match self.probe(mid)? {
                Outcome::Violated(s) => {
                    lo = mid;
                    witness = s;
                }
                Outcome::Cleared(c) => {
                    hi = mid;
                    clearance = c;
                }
            }
        }
        let note = format!(
            "alpha_lo carries an extended-precision violation witness; alpha_hi only \
             records that no violation was found within {} search evaluations and {} \
             fuzzed points, so the bracket bounds the threshold from above and may sit \
             above the true value",
            self.cfg.budget, self.cfg.clearance_count
        );
        Ok(ThresholdEstimate {
            n: self.n,
            case: self.case,
            predicate: self.predicate(),
            bracket: (lo, hi),
            tolerance: self.cfg.tolerance,
            witness_lo: witness,
            clearance_hi: clearance,
            probes: self.probes,
            budget_per_probe: self.cfg.budget,
            clearance_count: self.cfg.clearance_count,
            seed: self.cfg.seed,
            note,
        })
    }
}

fn validate(n: usize, cfg: &BisectConfig) -> Result<()> {
    if n < 3 {
        return Err(Error::Domain(format!(
            "threshold bisection needs n >= 3, got {n}; for n = 2 the bound holds for every alpha >= 1"
        )));
    }
    if cfg.tolerance < 1e-3 || !cfg.tolerance.is_finite() {
        return Err(Error::Domain(format!(
            "tolerance must be at least 1e-3, got {}",
            cfg.tolerance
        )));
    }
    if cfg.budget == 0 || cfg.clearance_count == 0 {
        return Err(Error::Domain(
            "budget and clearance count must be positive".into(),
        ));
    }
    Ok(())
}

/// Brackets the least `α > 1` at which the indexed Case 2 lower bound holds
/// everywhere on the feasible region.
pub fn bisect_alpha_n_case2(n: usize, cfg: &BisectConfig) -> Result<ThresholdEstimate> {
    validate(n, cfg)?;
    let mut prober = Prober {
        n,
        case: ThresholdCase::Case2,
        cfg: cfg.clone(),
        probes: Vec::new(),
    };
    let hi = critical_alpha(n);
    let clearance = match prober.probe(hi)? {
        Outcome::Cleared(c) => c,
        Outcome::Violated(_) => {
            return Err(Error::BracketInvalid(format!(
                "violation confirmed at alpha = {hi}, where the bound is a theorem"
            )))
        }
    };
    let lo = CASE2_LO_INIT;
    let witness = match prober.probe(lo)? {
        Outcome::Violated(s) => s,
        Outcome::Cleared(_) => {
            return Err(Error::BracketInvalid(format!(
                "no violation found at the initial probe alpha = {lo}"
            )))
        }
    };
    prober.finish(lo, hi, witness, clearance)
}

/// Brackets the least `α < 1` down to which the cyclic sum stays
/// non-positive on the feasible region.
pub fn bisect_alpha_n_reverse(n: usize, cfg: &BisectConfig) -> Result<ThresholdEstimate> {
    validate(n, cfg)?;
    let mut prober = Prober {
        n,
        case: ThresholdCase::Reverse,
        cfg: cfg.clone(),
        probes: Vec::new(),
    };
    let hi = reverse_alpha_floor(n);
    let clearance = match prober.probe(hi)? {
        Outcome::Cleared(c) => c,
        Outcome::Violated(_) => {
            return Err(Error::BracketInvalid(format!(
                "violation confirmed at alpha = {hi}, where the reversed inequality is a theorem"
            )))
        }
    };
    let mut lo = REVERSE_LO_INIT;
    let witness = loop {
        match prober.probe(lo)? {
            Outcome::Violated(s) => break s,
            Outcome::Cleared(_) if lo * 2.0 >= REVERSE_LO_LIMIT => lo *= 2.0,
            Outcome::Cleared(_) => {
                return Err(Error::BracketInvalid(format!(
                    "no violation found for alpha down to {lo}"
                )))
            }
        }
    };
    prober.finish(lo, hi, witness, clearance)
}

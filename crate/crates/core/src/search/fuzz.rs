//! Randomized clearance runs.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampling::{draw_logs, point_from_draw, stream_rng};
use super::{witness_order, Target, Witness};
use crate::error::{Error, Result};
use crate::numerics::{EvalPoint, Verdict};
use crate::propositions::CheckOptions;

/// Points per task; each task draws from its own RNG stream.
pub const FUZZ_CHUNK: usize = 4096;

const FUZZ_STREAM_BASE: u64 = 1 << 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FuzzRegion {
    /// Even draws on `∏ x_i = 1`, odd draws anywhere in `∏ x_i ≥ 1`.
    Mixed,
    Boundary,
    Interior,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzConfig {
    pub n: usize,
    pub count: usize,
    pub log_range: f64,
    pub seed: u64,
    pub region: FuzzRegion,
    pub opts: CheckOptions,
}

impl FuzzConfig {
    pub fn new(n: usize, count: usize, seed: u64) -> FuzzConfig {
        FuzzConfig {
            n,
            count,
            log_range: 5.0,
            seed,
            region: FuzzRegion::Mixed,
            opts: CheckOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FuzzSummary {
    pub target: Target,
    pub n: usize,
    #[serde(with = "crate::serde_float")]
    pub exponent: f64,
    pub points: usize,
    pub evaluations: usize,
    pub violations: usize,
    pub inconclusive: usize,
    #[serde(with = "crate::serde_float")]
    pub min_margin: f64,
    pub worst: Option<Witness>,
    pub first_violation: Option<Witness>,
    pub seed: u64,
    pub region: FuzzRegion,
    #[serde(with = "crate::serde_float")]
    pub log_range: f64,
}

impl FuzzSummary {
    pub fn is_clear(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Default)]
struct ChunkStats {
    evaluations: usize,
    violations: usize,
    inconclusive: usize,
    worst: Option<Witness>,
    first_violation: Option<Witness>,
}

fn better(a: &Witness, b: &Witness) -> bool {
    witness_order((&a.margin, &a.point), (&b.margin, &b.point)).is_lt()
}

/// Checks `target` at `count` random points of dimension `n` (the normalized
/// rest of each draw for rest targets). Only extended-precision-confirmed
/// violations are counted.
pub fn fuzz(target: impl Into<Target>, exponent: f64, cfg: &FuzzConfig) -> Result<FuzzSummary> {
    let target = target.into();
    if cfg.n == 0 || target.dim(cfg.n) == 0 {
        return Err(Error::Domain(format!(
            "{target} needs a larger n, got {}",
            cfg.n
        )));
    }
    if cfg.count == 0 {
        return Err(Error::Domain("count must be at least 1".into()));
    }
    if !(cfg.log_range.is_finite() && cfg.log_range > 0.0) {
        return Err(Error::Domain(format!(
            "log range must be positive, got {}",
            cfg.log_range
        )));
    }
    let chunks = cfg.count.div_ceil(FUZZ_CHUNK);
    let stats = (0..chunks)
        .into_par_iter()
        .map(|c| run_chunk(target, exponent, cfg, c))
        .collect::<Result<Vec<_>>>()?;

    let mut total = ChunkStats::default();
    for s in stats {
        total.evaluations += s.evaluations;
        total.violations += s.violations;
        total.inconclusive += s.inconclusive;
        if let Some(w) = s.worst {
            if total.worst.as_ref().is_none_or(|b| better(&w, b)) {
                total.worst = Some(w);
            }
        }
        if total.first_violation.is_none() {
            total.first_violation = s.first_violation;
        }
    }
    Ok(FuzzSummary {
        target,
        n: cfg.n,
        exponent,
        points: cfg.count,
        evaluations: total.evaluations,
        violations: total.violations,
        inconclusive: total.inconclusive,
        min_margin: total
            .worst
            .as_ref()
            .map_or(f64::INFINITY, |w| w.margin.value),
        worst: total.worst,
        first_violation: total.first_violation,
        seed: cfg.seed,
        region: cfg.region,
        log_range: cfg.log_range,
    })
}

fn run_chunk(target: Target, exponent: f64, cfg: &FuzzConfig, chunk: usize) -> Result<ChunkStats> {
    let mut rng = stream_rng(cfg.seed, FUZZ_STREAM_BASE + chunk as u64);
    let start = chunk * FUZZ_CHUNK;
    let end = (start + FUZZ_CHUNK).min(cfg.count);
    let mut stats = ChunkStats::default();
    for g in start..end {
        let project = match cfg.region {
            FuzzRegion::Boundary => true,
            FuzzRegion::Interior => false,
            FuzzRegion::Mixed => g % 2 == 0,
        };
        let logs = draw_logs(&mut rng, cfg.n, cfg.log_range, project);
        let full = point_from_draw(&logs, project);
        let point = if target.dim(cfg.n) < cfg.n {
            full.normalized_rest(0)
        } else {
            full
        };
        let indices: Vec<Option<usize>> = if target.is_indexed() {
            (0..point.n()).map(Some).collect()
        } else {
            vec![None]
        };
        for index in indices {
            let margin = target.check(&point, exponent, index, &cfg.opts)?;
            stats.evaluations += 1;
            match margin.verdict {
                Verdict::Violated => stats.violations += 1,
                Verdict::Inconclusive => stats.inconclusive += 1,
                Verdict::Satisfied => {}
            }
            let is_violation = margin.verdict == Verdict::Violated;
            let candidate = || Witness {
                point: point.clone(),
                index,
                margin,
            };
            if stats
                .worst
                .as_ref()
                .is_none_or(|w| margin.value < w.margin.value)
            {
                stats.worst = Some(candidate());
            }
            if is_violation && stats.first_violation.is_none() {
                stats.first_violation = Some(candidate());
            }
        }
    }
    Ok(stats)
}

/// Convenience: the sampled points of a fuzz run, in order.
pub fn fuzz_points(cfg: &FuzzConfig) -> Vec<EvalPoint> {
    let chunks = cfg.count.div_ceil(FUZZ_CHUNK);
    let mut out = Vec::with_capacity(cfg.count);
    for chunk in 0..chunks {
        let mut rng = stream_rng(cfg.seed, FUZZ_STREAM_BASE + chunk as u64);
        let start = chunk * FUZZ_CHUNK;
        for g in start..(start + FUZZ_CHUNK).min(cfg.count) {
            let project = match cfg.region {
                FuzzRegion::Boundary => true,
                FuzzRegion::Interior => false,
                FuzzRegion::Mixed => g % 2 == 0,
            };
            out.push(point_from_draw(
                &draw_logs(&mut rng, cfg.n, cfg.log_range, project),
                project,
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::propositions::PredicateId;

    #[test]
    fn prop1_clears_a_small_run() {
        let s = fuzz(PredicateId::Prop1, 2.5, &FuzzConfig::new(3, 5000, 1)).unwrap();
        assert_eq!(s.violations, 0);
        assert_eq!(s.evaluations, 5000);
        assert!(s.min_margin >= -1e-9);
    }

    #[test]
    fn fuzz_is_deterministic() {
        let cfg = FuzzConfig::new(4, 9000, 3);
        let a = fuzz(PredicateId::Ineq2, 2.0, &cfg).unwrap();
        let b = fuzz(PredicateId::Ineq2, 2.0, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.evaluations, 4 * 9000);
    }

    #[test]
    fn forced_band_exponent_finds_violations() {
        let cfg = FuzzConfig {
            opts: CheckOptions::forced(),
            ..FuzzConfig::new(3, 2000, 5)
        };
        let s = fuzz(PredicateId::Ineq3, -1.0, &cfg).unwrap();
        assert!(s.violations > 0);
        let w = s.first_violation.unwrap();
        assert!(w.margin.value < 0.0);
    }

    #[test]
    fn hypotheses_are_enforced() {
        let r = fuzz(PredicateId::Prop1, 0.5, &FuzzConfig::new(3, 10, 0));
        assert!(matches!(r, Err(Error::HypothesisViolated { .. })));
    }

    #[test]
    fn fuzz_points_match_the_draws() {
        let cfg = FuzzConfig::new(3, 10, 2);
        let pts = fuzz_points(&cfg);
        assert_eq!(pts.len(), 10);
        assert!(pts.iter().all(crate::numerics::is_feasible));
    }
}

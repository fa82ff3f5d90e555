//! Multistart simplex descent on a margin.
//!
//! Boundary mode moves in the zero-sum subspace of log-coordinates through
//! an orthonormal (Helmert) basis, so `∏ x_i = 1` holds exactly. Interior mode
//! adds a squared slack `t²/n` to every log, covering `∏ x_i ≥ 1`. Free mode
//! leaves the coordinates unconstrained for targets without a feasibility
//! hypothesis.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::sampling::{draw_logs, stream_rng};
use super::simplex::{nelder_mead, SimplexParams};
use super::{witness_order, Target};
use crate::error::{Error, Result};
use crate::numerics::{project_to_boundary, EvalPoint, Margin};
use crate::propositions::{CheckOptions, PredicateId};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchMode {
    Boundary,
    Interior,
    Free,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchGoal {
    #[default]
    Minimize,
    /// Fail with `BudgetExhausted` unless a violation is confirmed.
    FindViolation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    /// Objective evaluations shared by all runs.
    pub budget: usize,
    /// Random starts per mode, on top of the seed points.
    pub restarts: usize,
    pub seed: u64,
    /// Random starts draw `ln x_i` uniformly from `[-L, L]`.
    pub log_range: f64,
    /// Points with some `|ln x_i|` above this are rejected.
    pub box_size: f64,
    /// Modes to run; empty means every mode that applies to the target.
    pub modes: Vec<SearchMode>,
    /// Extra start points, such as family points known to be hard.
    pub seeds: Vec<EvalPoint>,
    pub goal: SearchGoal,
    pub opts: CheckOptions,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            budget: 100_000,
            restarts: 20,
            seed: 0,
            log_range: 5.0,
            box_size: 300.0,
            modes: Vec::new(),
            seeds: Vec::new(),
            goal: SearchGoal::Minimize,
            opts: CheckOptions::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModeBest {
    pub mode: SearchMode,
    pub point: EvalPoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    pub margin: Margin,
    pub runs: usize,
    pub evaluations: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub target: Target,
    pub n: usize,
    #[serde(with = "crate::serde_float")]
    pub exponent: f64,
    pub best_point: EvalPoint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub best_index: Option<usize>,
    pub best_margin: Margin,
    pub best_mode: SearchMode,
    pub restarts_used: usize,
    pub evaluations: usize,
    pub budget: usize,
    pub seed: u64,
    pub per_mode: Vec<ModeBest>,
}

impl SearchOutcome {
    pub fn found_violation(&self) -> bool {
        self.best_margin.is_violated()
    }
}

/// [`search`] with default settings for a predicate.
pub fn minimize_margin(
    predicate: PredicateId,
    exponent: f64,
    n: usize,
    budget: usize,
    seed: u64,
) -> Result<SearchOutcome> {
    let cfg = SearchConfig {
        budget,
        seed,
        ..SearchConfig::default()
    };
    search(predicate, exponent, n, &cfg)
}

fn default_modes(target: Target) -> Vec<SearchMode> {
    if matches!(target, Target::Predicate(p) if p.takes_rest()) {
        vec![SearchMode::Free]
    } else if target.constrained() {
        vec![SearchMode::Boundary, SearchMode::Interior]
    } else {
        vec![SearchMode::Boundary, SearchMode::Free]
    }
}

/// Orthonormal basis of `{v : Σ v_i = 0}`; column `k` is
/// `(1, …, 1, −k, 0, …) / √(k(k+1))` with `k` leading ones.
struct Helmert {
    d: usize,
    cols: Vec<Vec<f64>>,
}

impl Helmert {
    fn new(d: usize) -> Helmert {
        let cols = (1..d)
            .map(|k| {
                let s = ((k * (k + 1)) as f64).sqrt();
                let mut c = vec![0.0; d];
                c[..k].iter_mut().for_each(|v| *v = 1.0 / s);
                c[k] = -(k as f64) / s;
                c
            })
            .collect();
        Helmert { d, cols }
    }

    fn expand(&self, z: &[f64]) -> Vec<f64> {
        let mut l = vec![0.0; self.d];
        for (zk, c) in z.iter().zip(&self.cols) {
            for (li, ci) in l.iter_mut().zip(c) {
                *li += zk * ci;
            }
        }
        l
    }

    fn reduce(&self, l: &[f64]) -> Vec<f64> {
        self.cols
            .iter()
            .map(|c| c.iter().zip(l).map(|(a, b)| a * b).sum())
            .collect()
    }
}

fn to_logs(mode: SearchMode, basis: &Helmert, z: &[f64]) -> Vec<f64> {
    match mode {
        SearchMode::Free => z.to_vec(),
        SearchMode::Boundary => basis.expand(z),
        SearchMode::Interior => {
            let d = basis.d;
            let t = z[d - 1];
            let shift = t * t / d as f64;
            let mut l = basis.expand(&z[..d - 1]);
            l.iter_mut().for_each(|v| *v += shift);
            l
        }
    }
}

fn from_logs(mode: SearchMode, basis: &Helmert, l: &[f64]) -> Vec<f64> {
    match mode {
        SearchMode::Free => l.to_vec(),
        SearchMode::Boundary => basis.reduce(l),
        SearchMode::Interior => {
            let mut z = basis.reduce(l);
            z.push(l.iter().sum::<f64>().max(0.0).sqrt());
            z
        }
    }
}

fn point_for(mode: SearchMode, logs: &[f64]) -> Result<EvalPoint> {
    let p = EvalPoint::from_logs(logs)?;
    Ok(if mode == SearchMode::Boundary {
        project_to_boundary(&p)
    } else {
        p
    })
}

struct RunResult {
    mode: SearchMode,
    point: EvalPoint,
    index: Option<usize>,
    margin: Margin,
    evaluations: usize,
}

/// Minimizes the margin of `target` over points of dimension `n` and
/// confirms the best point of every run in extended precision.
pub fn search(
    target: impl Into<Target>,
    exponent: f64,
    n: usize,
    cfg: &SearchConfig,
) -> Result<SearchOutcome> {
    let target = target.into();
    let d = target.dim(n);
    if d == 0 {
        return Err(Error::Domain(format!("{target} needs a larger n, got {n}")));
    }
    if cfg.budget == 0 {
        return Err(Error::Domain("search budget must be positive".into()));
    }
    // Hypotheses are validated once on the unit point; runs then evaluate
    // freely since every iterate stays in the admissible region.
    let unit = EvalPoint::from_logs(&vec![0.0; d])?;
    target.check_all(&unit, exponent, &cfg.opts)?;
    for s in &cfg.seeds {
        if s.n() != d {
            return Err(Error::Domain(format!(
                "seed point has dimension {}, expected {d}",
                s.n()
            )));
        }
    }
    let confirm_opts = CheckOptions {
        force: true,
        ..cfg.opts
    };

    let modes = if cfg.modes.is_empty() {
        default_modes(target)
    } else {
        cfg.modes.clone()
    };
    let starts_per_mode = cfg.seeds.len() + cfg.restarts.max(1);
    let runs: Vec<(SearchMode, usize)> = modes
        .iter()
        .flat_map(|&m| (0..starts_per_mode).map(move |s| (m, s)))
        .collect();
    if cfg.budget < runs.len() {
        return Err(Error::Domain(format!(
            "search budget {} is below the number of starts {}",
            cfg.budget,
            runs.len()
        )));
    }
    // The budget is split exactly: run r gets one extra evaluation while
    // r < budget mod runs.
    let share = |r: usize| cfg.budget / runs.len() + usize::from(r < cfg.budget % runs.len());
    let basis = Helmert::new(d);

    let results = runs
        .par_iter()
        .enumerate()
        .map(|(r, &(mode, s))| {
            // Stream 2r seeds the first start, 2r+1 the later restarts.
            let start_logs = if s < cfg.seeds.len() {
                cfg.seeds[s].logs()
            } else {
                let mut rng = stream_rng(cfg.seed, 2 * r as u64);
                draw_logs(&mut rng, d, cfg.log_range, mode == SearchMode::Boundary)
            };
            let run_id = 2 * r as u64 + 1;
            run_one(
                target,
                exponent,
                mode,
                &basis,
                &start_logs,
                run_id,
                share(r),
                cfg,
                &confirm_opts,
            )
        })
        .collect::<Result<Vec<_>>>()?;

    let evaluations = results.iter().map(|r| r.evaluations).sum();
    let mut per_mode: Vec<ModeBest> = Vec::new();
    for &mode in &modes {
        let in_mode: Vec<&RunResult> = results.iter().filter(|r| r.mode == mode).collect();
        let best = in_mode
            .iter()
            .min_by(|a, b| witness_order((&a.margin, &a.point), (&b.margin, &b.point)))
            .expect("every mode has runs");
        per_mode.push(ModeBest {
            mode,
            point: best.point.clone(),
            index: best.index,
            margin: best.margin,
            runs: in_mode.len(),
            evaluations: in_mode.iter().map(|r| r.evaluations).sum(),
        });
    }
    let best = per_mode
        .iter()
        .min_by(|a, b| witness_order((&a.margin, &a.point), (&b.margin, &b.point)))
        .expect("at least one mode");
    let outcome = SearchOutcome {
        target,
        n,
        exponent,
        best_point: best.point.clone(),
        best_index: best.index,
        best_margin: best.margin,
        best_mode: best.mode,
        restarts_used: runs.len(),
        evaluations,
        budget: cfg.budget,
        seed: cfg.seed,
        per_mode,
    };
    if cfg.goal == SearchGoal::FindViolation && !outcome.found_violation() {
        return Err(Error::BudgetExhausted(Box::new(outcome)));
    }
    Ok(outcome)
}

#[allow(clippy::too_many_arguments)]
fn run_one(
    target: Target,
    exponent: f64,
    mode: SearchMode,
    basis: &Helmert,
    start_logs: &[f64],
    run_id: u64,
    budget: usize,
    cfg: &SearchConfig,
    confirm_opts: &CheckOptions,
) -> Result<RunResult> {
    let box_size = cfg.box_size;
    let objective = |z: &[f64]| {
        let l = to_logs(mode, basis, z);
        if l.iter().any(|v| v.is_nan() || v.abs() > box_size) {
            return f64::INFINITY;
        }
        target.fast(&l, exponent).0
    };
    let mut rng = stream_rng(cfg.seed, run_id);
    let mut start = from_logs(mode, basis, start_logs);
    let mut best_z = start.clone();
    let mut best_f = objective(&start);
    let mut used = 1;
    // Successively finer restarts of the simplex around the incumbent, then
    // fresh random starts until the run's share of the budget is spent.
    while used < budget {
        let mut z = start;
        let mut fz = objective(&z);
        used += 1;
        for step in [1.0, 0.1, 0.01, 1e-3] {
            if used >= budget {
                break;
            }
            let r = nelder_mead(
                objective,
                &z,
                SimplexParams {
                    step,
                    max_evals: budget - used,
                    ..SimplexParams::default()
                },
            );
            used += r.evaluations;
            if r.f < fz || !fz.is_finite() {
                z = r.x;
                fz = r.f;
            }
        }
        if fz < best_f || !best_f.is_finite() {
            best_z = z;
            best_f = fz;
        }
        let logs = draw_logs(
            &mut rng,
            basis.d,
            cfg.log_range,
            mode == SearchMode::Boundary,
        );
        start = from_logs(mode, basis, &logs);
    }
    let z = best_z;
    let logs = to_logs(mode, basis, &z);
    let point = point_for(mode, &logs)?;
    let (margin, index) = target.check_all(&point, exponent, confirm_opts)?;
    Ok(RunResult {
        mode,
        point,
        index,
        margin,
        evaluations: used,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn helmert_round_trips_zero_sum_vectors() {
        let h = Helmert::new(4);
        let l = [0.3, -1.2, 0.5, 0.4];
        let back = h.expand(&h.reduce(&l));
        for (a, b) in l.iter().zip(&back) {
            assert!((a - b).abs() < 1e-14);
        }
        let s: f64 = h.expand(&[1.0, -2.0, 0.7]).iter().sum();
        assert!(s.abs() < 1e-14);
    }

    #[test]
    fn interior_coordinates_stay_feasible() {
        let h = Helmert::new(3);
        let l = to_logs(SearchMode::Interior, &h, &[0.4, -2.0, -1.3]);
        assert!(l.iter().sum::<f64>() >= -1e-12);
        let z = from_logs(SearchMode::Interior, &h, &[1.0, 0.5, -0.2]);
        let back = to_logs(SearchMode::Interior, &h, &z);
        assert!((back[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn prop1_search_finds_no_violation() {
        let cfg = SearchConfig {
            budget: 20_000,
            restarts: 4,
            seed: 9,
            ..SearchConfig::default()
        };
        let out = search(PredicateId::Prop1, 2.5, 3, &cfg).unwrap();
        assert!(!out.found_violation());
        assert!(out.best_margin.value >= -1e-9);
        assert_eq!(out.per_mode.len(), 2);
    }

    #[test]
    fn search_is_deterministic() {
        let cfg = SearchConfig {
            budget: 5_000,
            restarts: 3,
            seed: 4,
            opts: CheckOptions::forced(),
            ..SearchConfig::default()
        };
        let a = search(PredicateId::Ineq3, -1.0, 3, &cfg).unwrap();
        let b = search(PredicateId::Ineq3, -1.0, 3, &cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.found_violation());
    }

    #[test]
    fn find_violation_reports_exhaustion() {
        let cfg = SearchConfig {
            budget: 2_000,
            restarts: 2,
            goal: SearchGoal::FindViolation,
            ..SearchConfig::default()
        };
        match search(PredicateId::Prop1, 2.0, 2, &cfg) {
            Err(Error::BudgetExhausted(best)) => assert!(!best.found_violation()),
            other => panic!("unexpected {other:?}"),
        }
    }
}

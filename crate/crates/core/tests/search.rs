use cyclab_core::numerics::{
    critical_alpha, is_feasible, log_product, reverse_alpha_floor, Precision,
};
use cyclab_core::propositions::{CheckOptions, PredicateId};
use cyclab_core::search::{
    bisect_alpha_n_case2, bisect_alpha_n_reverse, family_seeds, fuzz, minimize_margin,
    sample_points, search, BisectConfig, FuzzConfig, FuzzRegion, SampleConfig, SearchConfig,
    SearchGoal, SearchMode, Target, ThresholdEstimate,
};
use cyclab_core::Error;

fn sample_cfg(project: bool, count: usize, seed: u64) -> SampleConfig {
    SampleConfig {
        n: 3,
        log_range: 5.0,
        project,
        count,
        seed,
    }
}

#[test]
fn sampling_is_deterministic_and_feasible() {
    let a: Vec<_> = sample_points(&sample_cfg(false, 10_000, 5))
        .unwrap()
        .collect();
    let b: Vec<_> = sample_points(&sample_cfg(false, 10_000, 5))
        .unwrap()
        .collect();
    assert_eq!(a, b);
    assert_eq!(a.len(), 10_000);
    assert!(a.iter().all(is_feasible));
    let c: Vec<_> = sample_points(&sample_cfg(false, 1, 6)).unwrap().collect();
    assert_ne!(a[0], c[0]);
    assert!(a.iter().all(|q| q.logs().iter().all(|l| l.abs() <= 5.0)));
    let p: Vec<_> = sample_points(&sample_cfg(true, 10_000, 5))
        .unwrap()
        .collect();
    assert!(p.iter().all(|q| log_product(q).abs() <= 1e-12));
    assert!(sample_points(&sample_cfg(true, 0, 5)).is_err());
}

#[test]
fn search_clears_prop1_at_case1_exponent() {
    let out = minimize_margin(PredicateId::Prop1, 2.5, 3, 100_000, 1).unwrap();
    assert!(!out.found_violation());
    assert!(
        out.best_margin.value >= -out.best_margin.tolerance,
        "{:?}",
        out.best_margin
    );
    assert!(out.evaluations <= out.budget);
    assert!(is_feasible(&out.best_point));
    // Both the boundary and the interior are searched and reported.
    let modes: Vec<SearchMode> = out.per_mode.iter().map(|m| m.mode).collect();
    assert_eq!(modes, vec![SearchMode::Boundary, SearchMode::Interior]);
    for m in &out.per_mode {
        assert!(is_feasible(&m.point));
    }
}

#[test]
fn search_finds_remark_b_violation() {
    let cfg = SearchConfig {
        budget: 10_000,
        seeds: family_seeds(Target::Predicate(PredicateId::Ineq9), 3, 1.05),
        opts: CheckOptions::forced(),
        ..SearchConfig::default()
    };
    let out = search(PredicateId::Ineq9, 1.05, 3, &cfg).unwrap();
    assert!(out.found_violation());
    assert!(out.best_margin.value <= -0.1);
    assert_eq!(out.best_margin.precision, Precision::Extended);
}

#[test]
fn search_finds_remark_a_band_violation() {
    let cfg = SearchConfig {
        budget: 20_000,
        seeds: family_seeds(Target::Predicate(PredicateId::Ineq3), 3, -1.0),
        opts: CheckOptions::forced(),
        ..SearchConfig::default()
    };
    let out = search(PredicateId::Ineq3, -1.0, 3, &cfg).unwrap();
    assert!(out.found_violation());
    assert_eq!(out.best_margin.precision, Precision::Extended);
    assert!(out.best_margin.value <= -0.75 + 1e-12);
}

#[test]
fn search_is_deterministic_across_thread_counts() {
    let cfg = SearchConfig {
        budget: 20_000,
        seed: 42,
        seeds: family_seeds(Target::Predicate(PredicateId::Ineq8), 3, 1.3),
        opts: CheckOptions::forced(),
        ..SearchConfig::default()
    };
    let run = |threads: usize| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| search(PredicateId::Ineq8, 1.3, 3, &cfg).unwrap())
    };
    let one = run(1);
    assert_eq!(one, run(4));
    assert_eq!(one, run(1));
    let other = search(
        PredicateId::Ineq8,
        1.3,
        3,
        &SearchConfig {
            seed: 43,
            ..cfg.clone()
        },
    )
    .unwrap();
    assert_eq!(other.seed, 43);
}

#[test]
fn find_violation_goal_reports_exhaustion() {
    let cfg = SearchConfig {
        budget: 5_000,
        goal: SearchGoal::FindViolation,
        ..SearchConfig::default()
    };
    match search(PredicateId::Prop1, 2.0, 3, &cfg) {
        Err(Error::BudgetExhausted { .. }) => {}
        other => panic!("expected BudgetExhausted, got {other:?}"),
    }
}

#[test]
fn fuzz_is_deterministic_and_counts_points() {
    let cfg = FuzzConfig::new(4, 10_000, 3);
    let a = fuzz(PredicateId::Prop1, 2.0, &cfg).unwrap();
    let b = fuzz(PredicateId::Prop1, 2.0, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.points, 10_000);
    assert!(a.is_clear());
    let bnd = fuzz(
        Target::PowerSumReversal,
        -3.0,
        &FuzzConfig {
            region: FuzzRegion::Boundary,
            ..FuzzConfig::new(3, 10_000, 3)
        },
    )
    .unwrap();
    assert!(bnd.is_clear());
}

fn assert_bracket(est: &ThresholdEstimate, lo_bound: f64, hi_bound: f64) {
    let (lo, hi) = est.bracket;
    assert!(
        lo_bound <= lo && lo < hi && hi <= hi_bound,
        "{:?}",
        est.bracket
    );
    assert!(est.width() <= est.tolerance);
    assert!(est.witness_lo.found_violation());
    assert_eq!(est.witness_lo.best_margin.precision, Precision::Extended);
    assert_eq!(est.witness_lo.exponent, lo);
    assert_eq!(est.clearance_hi.alpha, hi);
    assert_eq!(est.clearance_hi.fuzz.violations, 0);
    assert!(!est.clearance_hi.search.found_violation());
    // lo always carries a violation and hi a clearance.
    for p in &est.probes {
        if p.violated {
            assert!(p.alpha <= lo, "{p:?}");
        } else {
            assert!(p.alpha >= hi, "{p:?}");
        }
    }
}

#[test]
fn case2_bracket_for_three_variables() {
    let cfg = BisectConfig {
        seed: 9,
        ..BisectConfig::default()
    };
    let est = bisect_alpha_n_case2(3, &cfg).unwrap();
    assert_bracket(&est, 1.0, critical_alpha(3));
    assert_eq!(est.predicate, PredicateId::Ineq8);
    assert_eq!(est, bisect_alpha_n_case2(3, &cfg).unwrap());
}

#[test]
fn reverse_bracket_for_three_variables() {
    let est = bisect_alpha_n_reverse(3, &BisectConfig::default()).unwrap();
    assert_bracket(&est, f64::NEG_INFINITY, reverse_alpha_floor(3));
    assert_eq!(est.predicate, PredicateId::Prop2);
}

#[test]
fn bisection_rejects_bad_arguments() {
    let cfg = BisectConfig::default();
    assert!(matches!(
        bisect_alpha_n_case2(2, &cfg),
        Err(Error::Domain(_))
    ));
    let tight = BisectConfig {
        tolerance: 1e-4,
        ..cfg
    };
    assert!(matches!(
        bisect_alpha_n_case2(3, &tight),
        Err(Error::Domain(_))
    ));
}

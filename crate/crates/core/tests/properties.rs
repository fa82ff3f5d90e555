//! Property tests for evaluation, projection and the checker suite.

use cyclab_core::numerics::{
    critical_alpha, eval_sum, eval_sum_hp, eval_term, eval_terms, is_feasible, log_product,
    project_to_boundary, reverse_alpha_floor, EvalPoint, Margin, Precision, FEASIBILITY_SLACK,
};
use cyclab_core::propositions::{
    check, check_amgm_age_g, check_ineq8, check_ineq9, check_power_sum_reversal, check_prop1,
    check_report, ineq8_rhs, CheckOptions, CheckReport, PredicateId,
};
use proptest::prelude::*;

fn logs_strategy(n: std::ops::Range<usize>, range: f64) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(-range..range, n)
}

fn pt(logs: &[f64]) -> EvalPoint {
    EvalPoint::from_logs(logs).unwrap()
}

/// Shifts `logs` so their sum is `excess ≥ 0`: a feasible point.
fn feasible(logs: &[f64], excess: f64) -> EvalPoint {
    let p = project_to_boundary(&pt(logs));
    let mut l = p.logs();
    l[0] += excess;
    pt(&l)
}

fn boundary(logs: &[f64]) -> EvalPoint {
    project_to_boundary(&pt(logs))
}

fn opts() -> CheckOptions {
    CheckOptions::default()
}

fn abs_sum(p: &EvalPoint, alpha: f64) -> f64 {
    eval_terms(p, alpha).iter().map(|t| t.abs()).sum()
}

#[test]
fn identity_exponent_and_unit_point_are_exact() {
    let p = pt(&[3.0, -1.25, 0.5, -7.0]);
    assert_eq!(eval_sum(&p, 1.0), 0.0);
    assert_eq!(eval_sum_hp(&p, 1.0).unwrap().to_f64(), 0.0);
    for n in 1..8 {
        let unit = pt(&vec![0.0; n]);
        for alpha in [-10.0, -0.5, 0.0, 0.3, 2.5, 7.0] {
            assert_eq!(eval_sum(&unit, alpha), 0.0);
            assert_eq!(eval_sum_hp(&unit, alpha).unwrap().to_f64(), 0.0);
        }
    }
}

#[test]
fn overflow_immunity_at_extreme_logs() {
    let p = pt(&[600.0, -600.0]);
    let s = eval_sum(&p, 1.2);
    assert!(s.is_finite() && s.abs() < 2.0, "sum {s}");
    let hp = eval_sum_hp(&p, 1.2).unwrap().to_f64();
    assert!((s - hp).abs() <= 1e-10 * (1.0 + hp.abs()));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn permutation_symmetry(
        logs in logs_strategy(2..8, 20.0),
        alpha in -10.0f64..10.0,
        rot in 0usize..8,
    ) {
        let p = pt(&logs);
        let n = logs.len();
        let mut order: Vec<usize> = (0..n).map(|i| (i + rot) % n).collect();
        order.swap(0, n - 1);
        let q = p.permuted(&order);
        let scale = 1.0 + abs_sum(&p, alpha);
        prop_assert!((eval_sum(&p, alpha) - eval_sum(&q, alpha)).abs() <= 1e-12 * scale);
    }

    #[test]
    fn terms_stay_below_one(logs in logs_strategy(1..8, 60.0), alpha in -10.0f64..10.0) {
        let p = pt(&logs);
        for i in 0..logs.len() {
            prop_assert!(eval_term(&p, i, alpha) < 1.0);
        }
    }

    #[test]
    fn terms_stay_above_minus_one_on_feasible_points(
        logs in logs_strategy(2..8, 10.0),
        excess in 0.0f64..3.0,
        alpha in 1.0f64..10.0,
    ) {
        let p = feasible(&logs, excess);
        prop_assert!(is_feasible(&p));
        for i in 0..logs.len() {
            prop_assert!(eval_term(&p, i, alpha) > -1.0);
        }
    }

    #[test]
    fn fast_and_extended_sums_agree(logs in logs_strategy(2..8, 100.0), alpha in -10.0f64..10.0) {
        let p = pt(&logs);
        let fast = eval_sum(&p, alpha);
        let hp = match eval_sum_hp(&p, alpha) {
            Ok(v) => v.to_f64(),
            Err(e) => return Err(TestCaseError::fail(format!("{e}"))),
        };
        prop_assert!((fast - hp).abs() <= 1e-10 * (1.0 + hp.abs()), "fast {fast:e} hp {hp:e}");
    }

    #[test]
    fn projection_is_idempotent(logs in logs_strategy(1..8, 50.0)) {
        let once = project_to_boundary(&pt(&logs));
        let twice = project_to_boundary(&once);
        prop_assert!(log_product(&once).abs() <= 1e-12);
        for (a, b) in once.logs().iter().zip(twice.logs()) {
            prop_assert!((a - b).abs() <= 1e-12);
        }
    }

    #[test]
    fn prop1_holds_on_feasible_points(
        logs in logs_strategy(2..7, 5.0),
        excess in 0.0f64..2.0,
        alpha in 1.0f64..6.0,
    ) {
        let m = check_prop1(&feasible(&logs, excess), alpha, &opts()).unwrap();
        prop_assert!(m.is_satisfied(), "{m:?}");
    }

    #[test]
    fn prop2_holds_on_feasible_points(
        logs in logs_strategy(2..7, 5.0),
        excess in 0.0f64..2.0,
        t in 0.0f64..=1.0,
    ) {
        let n = logs.len();
        let alpha = reverse_alpha_floor(n) + t * (1.0 - reverse_alpha_floor(n));
        let m = check(PredicateId::Prop2, &feasible(&logs, excess), alpha, None, &opts()).unwrap();
        prop_assert!(m.is_satisfied(), "{m:?}");
    }

    #[test]
    fn case1_chain_implies_prop1(
        logs in logs_strategy(2..7, 5.0),
        excess in 0.0f64..2.0,
        t in 0.0f64..=1.0,
    ) {
        let n = logs.len();
        let p = feasible(&logs, excess);
        let alpha = 1.0 + t * (critical_alpha(n) - 1.0);
        let steps_hold = (0..n).all(|i| {
            check(PredicateId::Ineq2, &p, alpha, Some(i), &opts()).unwrap().value >= 0.0
        }) && check(PredicateId::Ineq3, &p, 2.0 - alpha, None, &opts()).unwrap().value >= 0.0;
        if steps_hold {
            let m = check_prop1(&p, alpha, &opts()).unwrap();
            prop_assert!(m.value >= -m.tolerance);
        }
    }

    #[test]
    fn case2_chain_implies_prop1(
        logs in logs_strategy(2..7, 5.0),
        excess in 0.0f64..2.0,
        t in 0.0f64..6.0,
    ) {
        let n = logs.len();
        let p = feasible(&logs, excess);
        let alpha = critical_alpha(n) + t;
        let rhs: f64 = (0..n).map(|i| ineq8_rhs(&p, i, alpha)).sum();
        prop_assert!(rhs.abs() <= 1e-12, "rhs sum {rhs:e}");
        let steps_hold = (0..n).all(|i| check_ineq8(&p, i, alpha, &opts()).unwrap().value >= 0.0);
        if steps_hold {
            let m = check_prop1(&p, alpha, &opts()).unwrap();
            prop_assert!(m.value >= -m.tolerance);
        }
    }

    #[test]
    fn ineq8_at_unit_head_matches_ineq9(
        rest in logs_strategy(1..6, 4.0),
        t in 0.0f64..6.0,
    ) {
        let rest = boundary(&rest);
        let full = EvalPoint::with_unit_head(&rest);
        let n = full.n();
        let alpha = critical_alpha(n) + t;
        let forced = CheckOptions::forced();
        let m8 = check_ineq8(&full, 0, alpha, &forced).unwrap();
        let m9 = check_ineq9(&rest, alpha, &forced).unwrap();
        if m8.value.abs() > 10.0 * m8.tolerance && m9.value.abs() > 10.0 * m9.tolerance {
            prop_assert_eq!(m8.value > 0.0, m9.value > 0.0, "{:?} vs {:?}", m8, m9);
        }
    }

    #[test]
    fn power_sums_reverse_above_one(
        logs in logs_strategy(1..7, 5.0),
        excess in 0.0f64..2.0,
        beta in 1.0f64..6.0,
    ) {
        prop_assume!(beta > 1.0);
        let m = check_power_sum_reversal(&feasible(&logs, excess), beta, &opts()).unwrap();
        prop_assert!(m.is_satisfied(), "{m:?}");
    }

    #[test]
    fn power_sums_reverse_below_one_minus_n_on_boundary(
        logs in logs_strategy(2..7, 5.0),
        extra in 0.0f64..5.0,
    ) {
        let n = logs.len();
        let beta = 1.0 - n as f64 - extra;
        let m = check_power_sum_reversal(&boundary(&logs), beta, &opts()).unwrap();
        prop_assert!(m.is_satisfied(), "{m:?}");
    }

    #[test]
    fn ineq9_holds_for_two_variables(l in -30.0f64..30.0, alpha in 1.0f64..20.0) {
        prop_assume!(alpha > 1.0);
        // Holds for every α > 1 when n = 2, beyond the Case 2 range.
        let m = check_ineq9(&pt(&[l]), alpha, &CheckOptions::forced()).unwrap();
        prop_assert!(m.is_satisfied(), "{m:?}");
    }

    #[test]
    fn amgm_holds_on_positive_inputs(rest in logs_strategy(1..7, 10.0), alpha in 1.0f64..20.0) {
        prop_assume!(alpha > 1.0);
        let m = check_amgm_age_g(&pt(&rest), alpha, &opts()).unwrap();
        prop_assert!(m.is_satisfied(), "{m:?}");
    }

    #[test]
    fn fast_escalation_agrees_with_extended_verdict(
        logs in logs_strategy(2..6, 5.0),
        alpha in 1.0f64..6.0,
    ) {
        let p = feasible(&logs, 0.0);
        let fast = check_prop1(&p, alpha, &opts()).unwrap();
        let ext = check_prop1(&p, alpha, &CheckOptions { precision: Precision::Extended, ..opts() }).unwrap();
        prop_assert_eq!(fast.verdict, ext.verdict);
    }

    #[test]
    fn reports_round_trip_through_json(
        logs in logs_strategy(2..6, 30.0),
        alpha in 1.0f64..4.0,
    ) {
        let p = feasible(&logs, 0.0);
        let r = check_report(PredicateId::Prop1, &p, alpha, None, &opts()).unwrap();
        let text = serde_json::to_string(&r).unwrap();
        let back: CheckReport = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&back, &r);
        let m: Margin = serde_json::from_str(&serde_json::to_string(&r.margin).unwrap()).unwrap();
        prop_assert_eq!(m, r.margin);
    }
}

#[test]
fn feasibility_slack_admits_rounding_only() {
    let p = pt(&[1.0, -1.0 - 0.5 * FEASIBILITY_SLACK]);
    assert!(is_feasible(&p));
    let q = pt(&[1.0, -1.0 - 10.0 * FEASIBILITY_SLACK]);
    assert!(!is_feasible(&q));
}

//! Margin checkers for the two propositions and every step of the proof.
//!
//! Each checker evaluates `lhs − rhs` of one inequality, refuses inputs
//! outside the inequality's hypotheses unless [`CheckOptions::force`] is
//! set, and routes doubtful margins to extended precision through
//! [`adjudicate`].
//!
//! Checkers over "rest" points (`Ineq9`, `AmGmAgeG`) take `(x_2, …, x_n)`
//! of the normalized form `x_1 = 1`; their `n` is the rest length plus one.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    adjudicate, alpha_minus_one, critical_alpha, gamma_wide, is_feasible, is_on_boundary,
    reverse_alpha_floor, sum_generic, term_generic, EvalPoint, Margin, Precision, Sides, Tolerance,
};
use crate::real::{log_sum_exp, Real};
use crate::wide::Wide;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PredicateId {
    Prop1,
    Prop2,
    Ineq2,
    Ineq3,
    Ineq4,
    Ineq5,
    Ineq6,
    Ineq7,
    Ineq8,
    Ineq9,
    #[serde(rename = "amgm_age_g")]
    AmGmAgeG,
    Prop2Step,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExponentKind {
    Alpha,
    Beta,
}

impl PredicateId {
    pub const ALL: [PredicateId; 12] = [
        PredicateId::Prop1,
        PredicateId::Prop2,
        PredicateId::Ineq2,
        PredicateId::Ineq3,
        PredicateId::Ineq4,
        PredicateId::Ineq5,
        PredicateId::Ineq6,
        PredicateId::Ineq7,
        PredicateId::Ineq8,
        PredicateId::Ineq9,
        PredicateId::AmGmAgeG,
        PredicateId::Prop2Step,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PredicateId::Prop1 => "prop1",
            PredicateId::Prop2 => "prop2",
            PredicateId::Ineq2 => "ineq2",
            PredicateId::Ineq3 => "ineq3",
            PredicateId::Ineq4 => "ineq4",
            PredicateId::Ineq5 => "ineq5",
            PredicateId::Ineq6 => "ineq6",
            PredicateId::Ineq7 => "ineq7",
            PredicateId::Ineq8 => "ineq8",
            PredicateId::Ineq9 => "ineq9",
            PredicateId::AmGmAgeG => "amgm_age_g",
            PredicateId::Prop2Step => "prop2_step",
        }
    }

    pub fn exponent_kind(self) -> ExponentKind {
        match self {
            PredicateId::Ineq3
            | PredicateId::Ineq4
            | PredicateId::Ineq5
            | PredicateId::Ineq6
            | PredicateId::Ineq7 => ExponentKind::Beta,
            _ => ExponentKind::Alpha,
        }
    }

    /// Checked once per coordinate index.
    pub fn is_indexed(self) -> bool {
        matches!(
            self,
            PredicateId::Ineq2 | PredicateId::Ineq8 | PredicateId::Prop2Step
        )
    }

    /// Takes the normalized rest `(x_2, …, x_n)` instead of a full point.
    pub fn takes_rest(self) -> bool {
        matches!(self, PredicateId::Ineq9 | PredicateId::AmGmAgeG)
    }
}

impl fmt::Display for PredicateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PredicateId {
    type Err = Error;

    fn from_str(s: &str) -> Result<PredicateId> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        let alias = match key.as_str() {
            "1" | "prop_1" => "prop1",
            "2" | "prop_2" => "prop2",
            "amgm" | "age_g" | "amgm_ageg" => "amgm_age_g",
            "prop2step" => "prop2_step",
            other => other,
        };
        PredicateId::ALL
            .into_iter()
            .find(|p| p.name() == alias)
            .ok_or_else(|| Error::Parse(format!("unknown predicate `{s}`")))
    }
}

/// Closed interval, optionally open at the lower end.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub lo_open: bool,
}

impl Interval {
    pub fn closed(lo: f64, hi: f64) -> Interval {
        Interval {
            lo,
            hi,
            lo_open: false,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let above = if self.lo_open {
            x > self.lo
        } else {
            x >= self.lo
        };
        above && x <= self.hi
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let open = if self.lo_open { '(' } else { '[' };
        write!(f, "{open}{}, {}]", self.lo, self.hi)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hypotheses {
    pub n: usize,
    pub exponent: ExponentKind,
    pub range: Interval,
    pub requires_feasible: bool,
    pub requires_boundary: bool,
    pub min_n: usize,
}

impl Hypotheses {
    pub fn for_predicate(id: PredicateId, n: usize) -> Hypotheses {
        let inf = f64::INFINITY;
        let crit = critical_alpha(n);
        let floor = reverse_alpha_floor(n);
        let (range, requires_feasible, min_n) = match id {
            PredicateId::Prop1 => (Interval::closed(1.0, inf), true, 1),
            PredicateId::Prop2 => (Interval::closed(floor, 1.0), true, 2),
            PredicateId::Ineq2 => (Interval::closed(1.0, crit), false, 1),
            PredicateId::Ineq3 => (Interval::closed(floor, 1.0), true, 1),
            PredicateId::Ineq4 => (Interval::closed(0.0, 1.0), false, 1),
            PredicateId::Ineq5 => (Interval::closed(-inf, 1.0), true, 1),
            PredicateId::Ineq6 => (Interval::closed(floor, 0.0), true, 1),
            PredicateId::Ineq7 => {
                if n <= 1 {
                    (Interval::closed(-inf, inf), true, 1)
                } else {
                    (Interval::closed(floor, 0.0), true, 1)
                }
            }
            PredicateId::Ineq8 => (Interval::closed(crit, inf), true, 2),
            PredicateId::Ineq9 => (
                Interval {
                    lo: crit.max(1.0),
                    hi: inf,
                    lo_open: crit <= 1.0,
                },
                false,
                2,
            ),
            PredicateId::AmGmAgeG => (
                Interval {
                    lo: 1.0,
                    hi: inf,
                    lo_open: true,
                },
                false,
                2,
            ),
            PredicateId::Prop2Step => (Interval::closed(floor, 1.0), false, 2),
        };
        Hypotheses {
            n,
            exponent: id.exponent_kind(),
            range,
            requires_feasible,
            requires_boundary: false,
            min_n,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct CheckOptions {
    pub tolerance: Tolerance,
    pub precision: Precision,
    /// Evaluate even when the hypotheses do not hold.
    pub force: bool,
}

impl CheckOptions {
    pub fn forced() -> CheckOptions {
        CheckOptions {
            force: true,
            ..CheckOptions::default()
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub predicate: PredicateId,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub index: Option<usize>,
    pub exponent_kind: ExponentKind,
    #[serde(with = "crate::serde_float")]
    pub exponent: f64,
    pub point: EvalPoint,
    pub margin: Margin,
}

fn point_n(id: PredicateId, p: &EvalPoint) -> usize {
    if id.takes_rest() {
        p.n() + 1
    } else {
        p.n()
    }
}

fn validate(
    id: PredicateId,
    p: &EvalPoint,
    exponent: f64,
    index: Option<usize>,
    force: bool,
) -> Result<usize> {
    let n = point_n(id, p);
    if id.is_indexed() {
        match index {
            Some(i) if i < n => {}
            Some(i) => return Err(Error::IndexOutOfRange { index: i, n }),
            None => return Err(Error::Domain(format!("{id} needs a coordinate index"))),
        }
    }
    if !exponent.is_finite() {
        return Err(Error::Domain(format!(
            "exponent must be finite, got {exponent}"
        )));
    }
    if force {
        if matches!(id, PredicateId::Ineq8) && n < 2 {
            return Err(Error::Domain("ineq8 needs n >= 2".into()));
        }
        return Ok(n);
    }
    let h = Hypotheses::for_predicate(id, n);
    let violated = |reason: String| Error::HypothesisViolated {
        predicate: id,
        reason,
    };
    if n < h.min_n {
        return Err(violated(format!("needs n >= {}, got n = {n}", h.min_n)));
    }
    if !h.range.contains(exponent) {
        let sym = match h.exponent {
            ExponentKind::Alpha => "alpha",
            ExponentKind::Beta => "beta",
        };
        return Err(violated(format!(
            "{sym} = {exponent} outside {} for n = {n}",
            h.range
        )));
    }
    if h.requires_feasible && !is_feasible(p) {
        return Err(violated(
            "point is infeasible (product of coordinates < 1)".into(),
        ));
    }
    Ok(n)
}

fn degenerate_gamma(id: PredicateId, n: usize, alpha: f64) -> Result<()> {
    if id.takes_rest() || id == PredicateId::Ineq8 {
        let g = gamma_wide(n, alpha);
        if id == PredicateId::Ineq9 && (!g.is_finite() || g.is_zero()) {
            return Err(Error::DegenerateGamma { n, alpha });
        }
    }
    Ok(())
}

/// Margin of `id` at `p` (or at the rest point for `Ineq9`/`AmGmAgeG`).
pub fn check(
    id: PredicateId,
    p: &EvalPoint,
    exponent: f64,
    index: Option<usize>,
    opts: &CheckOptions,
) -> Result<Margin> {
    let n = validate(id, p, exponent, index, opts.force)?;
    degenerate_gamma(id, n, exponent)?;
    let i = index.unwrap_or(0);
    Ok(adjudicate(
        || sides::<f64>(id, &p.logs(), exponent, i),
        || sides::<Wide>(id, &p.logs_as::<Wide>(), exponent, i),
        opts.tolerance,
        opts.precision,
    ))
}

/// Fast-path margin value without hypothesis checks, for search objectives.
pub fn fast_margin(id: PredicateId, logs: &[f64], exponent: f64, index: usize) -> f64 {
    sides::<f64>(id, logs, exponent, index).value
}

/// Fast-path margin minimized over every index of an indexed predicate.
pub fn fast_margin_all(id: PredicateId, logs: &[f64], exponent: f64) -> (f64, usize) {
    if !id.is_indexed() {
        return (fast_margin(id, logs, exponent, 0), 0);
    }
    (0..logs.len())
        .map(|i| (fast_margin(id, logs, exponent, i), i))
        .fold((f64::INFINITY, 0), |best, cur| {
            if cur.0 < best.0 || cur.0.is_nan() && !best.0.is_nan() {
                cur
            } else {
                best
            }
        })
}

fn report(
    id: PredicateId,
    p: &EvalPoint,
    exponent: f64,
    index: Option<usize>,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    let margin = check(id, p, exponent, index, opts)?;
    Ok(CheckReport {
        predicate: id,
        index,
        exponent_kind: id.exponent_kind(),
        exponent,
        point: p.clone(),
        margin,
    })
}

pub fn check_report(
    id: PredicateId,
    p: &EvalPoint,
    exponent: f64,
    index: Option<usize>,
    opts: &CheckOptions,
) -> Result<CheckReport> {
    report(id, p, exponent, index, opts)
}

pub fn check_prop1(p: &EvalPoint, alpha: f64, opts: &CheckOptions) -> Result<Margin> {
    check(PredicateId::Prop1, p, alpha, None, opts)
}

pub fn check_prop2(p: &EvalPoint, alpha: f64, opts: &CheckOptions) -> Result<Margin> {
    check(PredicateId::Prop2, p, alpha, None, opts)
}

pub fn check_ineq2(p: &EvalPoint, i: usize, alpha: f64, opts: &CheckOptions) -> Result<Margin> {
    check(PredicateId::Ineq2, p, alpha, Some(i), opts)
}

pub fn check_ineq3(p: &EvalPoint, beta: f64, opts: &CheckOptions) -> Result<Margin> {
    check(PredicateId::Ineq3, p, beta, None, opts)
}

pub fn check_ineq4(p: &EvalPoint, beta: f64, opts: &CheckOptions) -> Result<Margin> {
    check(PredicateId::Ineq4, p, beta, None, opts)
}

pub fn check_ineq5(p: &EvalPoint, beta: f64, opts: &CheckOptions) -> Result<Margin> {
    check(PredicateId::Ineq5, p, beta, None, opts)
}

pub fn check_ineq6(p: &EvalPoint, beta: f64, opts: &CheckOptions) -> Result<Margin> {
    check(PredicateId::Ineq6, p, beta, None, opts)
}

pub fn check_ineq7(p: &EvalPoint, beta: f64, opts: &CheckOptions) -> Result<Margin> {
    check(PredicateId::Ineq7, p, beta, None, opts)
}

pub fn check_ineq8(p: &EvalPoint, i: usize, alpha: f64, opts: &CheckOptions) -> Result<Margin> {
    check(PredicateId::Ineq8, p, alpha, Some(i), opts)
}

pub fn check_ineq9(rest: &EvalPoint, alpha: f64, opts: &CheckOptions) -> Result<Margin> {
    check(PredicateId::Ineq9, rest, alpha, None, opts)
}

pub fn check_amgm_age_g(rest: &EvalPoint, alpha: f64, opts: &CheckOptions) -> Result<Margin> {
    check(PredicateId::AmGmAgeG, rest, alpha, None, opts)
}

pub fn check_prop2_step(
    p: &EvalPoint,
    i: usize,
    alpha: f64,
    opts: &CheckOptions,
) -> Result<Margin> {
    check(PredicateId::Prop2Step, p, alpha, Some(i), opts)
}

/// The reversal of `Σx ≥ Σx^β` outside its range: `Σx^β − Σx`, claimed for
/// feasible points when `β > 1`, and on `∏ x_i = 1` when `β ≤ 1 − n`.
pub fn check_power_sum_reversal(p: &EvalPoint, beta: f64, opts: &CheckOptions) -> Result<Margin> {
    let n = p.n();
    if !opts.force {
        let violated = |reason: String| Error::HypothesisViolated {
            predicate: PredicateId::Ineq3,
            reason,
        };
        if beta > 1.0 {
            if !is_feasible(p) {
                return Err(violated(
                    "reversal for beta > 1 needs a feasible point".into(),
                ));
            }
        } else if beta <= 1.0 - n as f64 {
            if !is_on_boundary(p) {
                return Err(violated(
                    "reversal for beta <= 1 - n needs a point with product exactly 1".into(),
                ));
            }
        } else {
            return Err(violated(format!(
                "reversal is claimed only for beta > 1 or beta <= {}",
                1.0 - n as f64
            )));
        }
    }
    Ok(adjudicate(
        || power_gap::<f64>(&p.logs(), beta, 1.0),
        || power_gap::<Wide>(&p.logs_as::<Wide>(), beta, 1.0),
        opts.tolerance,
        opts.precision,
    ))
}

/// Fast-path value of `Σx^β − Σx`.
pub fn power_sum_reversal_fast(logs: &[f64], beta: f64) -> f64 {
    power_gap::<f64>(logs, beta, 1.0).value
}

/// Right side of the Case 2 lower bound for index `i`:
/// `(n x_i^γ − Σ_j x_j^γ) / ((n − 1) Σ_j x_j^γ)`. These sum to zero over `i`.
pub fn ineq8_rhs(p: &EvalPoint, i: usize, alpha: f64) -> f64 {
    let logs = p.logs();
    let gamma = gamma_wide(p.n(), alpha).to_f64();
    ineq8_rhs_generic(&logs, i, gamma)
}

/// The two sides of the normalized Case 2 inequality together with `A`, `G`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ineq9Parts {
    pub lhs: f64,
    pub rhs: f64,
    pub a: f64,
    pub g: f64,
}

/// `lhs = n/(1 + Σ x_j) · (1/G − 1)`, `rhs = 1/A − 1`, evaluated in extended
/// precision.
pub fn ineq9_parts(rest: &EvalPoint, alpha: f64) -> Ineq9Parts {
    let logs = rest.logs_as::<Wide>();
    let n = logs.len() + 1;
    let gamma = gamma_wide(n, alpha);
    let g_exp = (Wide::from(alpha) - Wide::ONE).div_f64(n as f64);
    let (lhs, rhs) = ineq9_sides(&logs, gamma, g_exp);
    let sum_logs = <Wide as Real>::sum(logs.iter().copied());
    let ln_a = mean_power_log(&logs, gamma);
    Ineq9Parts {
        lhs: lhs.to_f64(),
        rhs: rhs.to_f64(),
        a: ln_a.exp().to_f64(),
        g: (g_exp * sum_logs).exp().to_f64(),
    }
}

/// Runs the proof chain for `α`: the Case 1 steps for `1 ≤ α ≤ 2 + 1/(n−1)`,
/// the Case 2 steps for `α ≥ 2 + 1/(n−1)` (both at equality), then the
/// proposition itself.
pub fn check_chain(p: &EvalPoint, alpha: f64, opts: &CheckOptions) -> Result<Vec<CheckReport>> {
    let n = p.n();
    if !opts.force {
        if alpha < 1.0 {
            return Err(Error::HypothesisViolated {
                predicate: PredicateId::Prop1,
                reason: format!("chain needs alpha >= 1, got {alpha}"),
            });
        }
        if !is_feasible(p) {
            return Err(Error::HypothesisViolated {
                predicate: PredicateId::Prop1,
                reason: "point is infeasible (product of coordinates < 1)".into(),
            });
        }
    }
    let crit = critical_alpha(n);
    let mut out = Vec::new();
    if alpha <= crit {
        let beta = 2.0 - alpha;
        for i in 0..n {
            out.push(report(PredicateId::Ineq2, p, alpha, Some(i), opts)?);
        }
        out.push(report(PredicateId::Ineq3, p, beta, None, opts)?);
        if (0.0..=1.0).contains(&beta) {
            out.push(report(PredicateId::Ineq4, p, beta, None, opts)?);
            out.push(report(PredicateId::Ineq5, p, beta, None, opts)?);
        }
        if beta <= 0.0 {
            out.push(report(PredicateId::Ineq6, p, beta, None, opts)?);
            out.push(report(PredicateId::Ineq7, p, beta, None, opts)?);
        }
    }
    if alpha >= crit && n >= 2 {
        for i in 0..n {
            out.push(report(PredicateId::Ineq8, p, alpha, Some(i), opts)?);
        }
        for i in 0..n {
            let rest = p.normalized_rest(i);
            let mut r9 = report(PredicateId::Ineq9, &rest, alpha, None, opts)?;
            r9.index = Some(i);
            out.push(r9);
            let mut ag = report(PredicateId::AmGmAgeG, &rest, alpha, None, opts)?;
            ag.index = Some(i);
            out.push(ag);
        }
    }
    out.push(report(PredicateId::Prop1, p, alpha, None, opts)?);
    Ok(out)
}

// ---------------------------------------------------------------------------
// Generic margin formulas
// ---------------------------------------------------------------------------

fn wide_exponent<R: Real>(x: Wide) -> R {
    R::from_wide(x)
}

pub(crate) fn sides<R: Real>(id: PredicateId, logs: &[R], e: f64, i: usize) -> Sides<R> {
    let n = if id.takes_rest() {
        logs.len() + 1
    } else {
        logs.len()
    };
    match id {
        PredicateId::Prop1 => Sides::from_lhs_rhs(sum_generic(logs, e), R::zero()),
        PredicateId::Prop2 => Sides::from_lhs_rhs(R::zero(), sum_generic(logs, e)),
        PredicateId::Ineq2 => {
            let t = term(logs, i, e);
            let rhs =
                shared_denominator_term(logs, i, R::from_wide(Wide::ONE - Wide::from(e)), true);
            Sides::from_lhs_rhs(t, rhs)
        }
        PredicateId::Ineq3 => power_gap(logs, 1.0, e),
        PredicateId::Ineq4 => {
            let ln_mean = log_sum_exp(logs) - R::from_usize(n).ln();
            let b = R::from_f64(e);
            let lhs = (b * ln_mean).exp();
            let rhs = R::sum(logs.iter().map(|&l| (b * l).exp())) / R::from_usize(n);
            Sides::from_lhs_rhs(lhs, rhs)
        }
        PredicateId::Ineq5 => {
            let ln_mean = log_sum_exp(logs) - R::from_usize(n).ln();
            let mean = ln_mean.exp();
            let rhs = (R::from_f64(e) * ln_mean).exp();
            let value = -(mean * (alpha_minus_one::<R>(e) * ln_mean).exp_m1());
            Sides {
                value,
                scale: R::one() + mean + rhs,
            }
        }
        PredicateId::Ineq6 => power_gap_wide(logs, folded_beta(e, n), Wide::from(e)),
        PredicateId::Ineq7 => power_gap_wide(logs, Wide::ONE, folded_beta(e, n)),
        PredicateId::Ineq8 => {
            let t = term(logs, i, e);
            let gamma = wide_exponent::<R>(gamma_wide(n, e));
            Sides::from_lhs_rhs(t, ineq8_rhs_generic(logs, i, gamma))
        }
        PredicateId::Ineq9 => {
            let gamma = wide_exponent::<R>(gamma_wide(n, e));
            let g_exp = wide_exponent::<R>((Wide::from(e) - Wide::ONE).div_f64(n as f64));
            let (lhs, rhs) = ineq9_sides(logs, gamma, g_exp);
            Sides::from_lhs_rhs(lhs, rhs)
        }
        PredicateId::AmGmAgeG => {
            let gamma = wide_exponent::<R>(gamma_wide(n, e));
            let g_exp = wide_exponent::<R>((Wide::from(e) - Wide::ONE).div_f64(n as f64));
            let ln_g = g_exp * R::sum(logs.iter().copied());
            let small = logs.iter().all(|&l| (gamma * l).abs() <= R::one());
            let (a, g) = (mean_power_log(logs, gamma).exp(), ln_g.exp());
            let value = if small {
                let a_m1 =
                    R::sum(logs.iter().map(|&l| (gamma * l).exp_m1())) / R::from_usize(logs.len());
                a_m1 - ln_g.exp_m1()
            } else {
                a - g
            };
            Sides {
                value,
                scale: R::one() + a.abs() + g.abs(),
            }
        }
        PredicateId::Prop2Step => {
            let lhs = shared_denominator_term(logs, i, alpha_minus_one::<R>(e), false);
            Sides::from_lhs_rhs(lhs, term(logs, i, e))
        }
    }
}

fn term<R: Real>(logs: &[R], i: usize, alpha: f64) -> R {
    if alpha == 1.0 {
        return R::zero();
    }
    term_generic(logs, i, R::from_f64(alpha), alpha_minus_one::<R>(alpha))
}

/// `β(1 − n)`.
fn folded_beta(beta: f64, n: usize) -> Wide {
    Wide::from(beta).mul_f64(1.0 - n as f64)
}

/// `x_i · (x_i^d − 1) / Σ_j x_j` (or its negation when `negate`), with the
/// maximum log factored out of the common denominator.
fn shared_denominator_term<R: Real>(logs: &[R], i: usize, d: R, negate: bool) -> R {
    let growth = (d * logs[i]).exp_m1();
    if growth == R::zero() {
        return R::zero();
    }
    let m = logs
        .iter()
        .copied()
        .fold(R::from_f64(f64::NEG_INFINITY), R::max);
    let s = R::sum(logs.iter().map(|&l| (l - m).exp()));
    let v = (logs[i] - m).exp() * growth / s;
    if negate {
        -v
    } else {
        v
    }
}

/// `Σ x^p − Σ x^q` termwise as `x^p (1 − x^(q−p))`.
fn power_gap<R: Real>(logs: &[R], p: f64, q: f64) -> Sides<R> {
    power_gap_wide(logs, Wide::from(p), Wide::from(q))
}

fn power_gap_wide<R: Real>(logs: &[R], p: Wide, q: Wide) -> Sides<R> {
    let pr = R::from_wide(p);
    let qr = R::from_wide(q);
    let d = R::from_wide(q - p);
    let value = R::sum(logs.iter().map(|&l| {
        let g = (d * l).exp_m1();
        if g == R::zero() {
            R::zero()
        } else {
            -((pr * l).exp() * g)
        }
    }));
    let lhs = R::sum(logs.iter().map(|&l| (pr * l).exp()));
    let rhs = R::sum(logs.iter().map(|&l| (qr * l).exp()));
    Sides {
        value,
        scale: R::one() + lhs + rhs,
    }
}

fn ineq8_rhs_generic<R: Real>(logs: &[R], i: usize, gamma: R) -> R {
    let n = logs.len();
    let y: Vec<R> = logs.iter().map(|&l| gamma * l).collect();
    let m = y
        .iter()
        .copied()
        .fold(R::from_f64(f64::NEG_INFINITY), R::max);
    let total = R::sum(y.iter().map(|&v| (v - m).exp()));
    let numer = R::sum(y.iter().map(|&v| (v - m).exp() * (y[i] - v).exp_m1()));
    numer / (R::from_usize(n - 1) * total)
}

/// `ln( Σ x_j^γ / (n − 1) )` over the rest coordinates.
fn mean_power_log<R: Real>(logs: &[R], gamma: R) -> R {
    let y: Vec<R> = logs.iter().map(|&l| gamma * l).collect();
    log_sum_exp(&y) - R::from_usize(logs.len()).ln()
}

/// Sides of the normalized Case 2 inequality over rest logs.
fn ineq9_sides<R: Real>(logs: &[R], gamma: R, g_exp: R) -> (R, R) {
    let n = logs.len() + 1;
    // L = ln(1/G)
    let inv_g_log = -(g_exp * R::sum(logs.iter().copied()));
    let m = logs.iter().copied().fold(R::zero(), R::max);
    let d = R::sum(std::iter::once((-m).exp()).chain(logs.iter().map(|&l| (l - m).exp())));
    // n/(1 + Σx) · (1/G − 1) = exp(ln n − m − ln d + L) · (1 − G)
    let one_minus_g = -(-inv_g_log).exp_m1();
    let lhs = if one_minus_g == R::zero() {
        R::zero()
    } else {
        (R::from_usize(n).ln() - m - d.ln() + inv_g_log).exp() * one_minus_g
    };
    let small = logs.iter().all(|&l| (gamma * l).abs() <= R::one());
    let rhs = if small {
        let a_m1 = R::sum(logs.iter().map(|&l| (gamma * l).exp_m1())) / R::from_usize(logs.len());
        -a_m1 / (R::one() + a_m1)
    } else {
        (-mean_power_log(logs, gamma)).exp_m1()
    };
    (lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{make_point, Verdict};

    fn pt(v: &[f64]) -> EvalPoint {
        make_point(v).unwrap()
    }

    fn opts() -> CheckOptions {
        CheckOptions::default()
    }

    #[test]
    fn predicate_names_round_trip() {
        for id in PredicateId::ALL {
            assert_eq!(id.name().parse::<PredicateId>().unwrap(), id);
        }
        assert!("ineq10".parse::<PredicateId>().is_err());
    }

    #[test]
    fn hypothesis_ranges_follow_the_case_split() {
        let h = Hypotheses::for_predicate(PredicateId::Ineq2, 3);
        assert_eq!(h.range, Interval::closed(1.0, 2.5));
        let h = Hypotheses::for_predicate(PredicateId::Ineq8, 3);
        assert_eq!(h.range.lo, 2.5);
        let h = Hypotheses::for_predicate(PredicateId::Prop2, 3);
        assert_eq!(h.range, Interval::closed(-0.5, 1.0));
    }

    #[test]
    fn refuses_out_of_range_exponents() {
        let p = pt(&[1.0, 1.0, 1.0]);
        assert!(matches!(
            check_prop1(&p, 0.5, &opts()),
            Err(Error::HypothesisViolated { .. })
        ));
        assert!(matches!(
            check_ineq2(&p, 0, 3.0, &opts()),
            Err(Error::HypothesisViolated { .. })
        ));
        assert!(matches!(
            check_prop1(&pt(&[0.5, 0.5]), 2.0, &opts()),
            Err(Error::HypothesisViolated { .. })
        ));
        assert!(check_ineq2(&p, 0, 3.0, &CheckOptions::forced()).is_ok());
        assert!(matches!(
            check_ineq2(&p, 3, 2.0, &opts()),
            Err(Error::IndexOutOfRange { index: 3, n: 3 })
        ));
    }

    #[test]
    fn trivial_points_give_zero_margins() {
        let one3 = pt(&[1.0; 3]);
        let m = check_prop1(&one3, 2.5, &opts()).unwrap();
        assert_eq!((m.value, m.verdict), (0.0, Verdict::Satisfied));
        assert_eq!(
            check_prop2(&pt(&[1.0, 1.0]), 0.0, &opts()).unwrap().value,
            0.0
        );
        assert_eq!(check_ineq3(&one3, 0.5, &opts()).unwrap().value, 0.0);
        assert_eq!(
            check_ineq4(&pt(&[1.0, 1.0]), 0.5, &opts()).unwrap().value,
            0.0
        );
        assert_eq!(check_ineq5(&one3, -3.0, &opts()).unwrap().value, 0.0);
        assert_eq!(check_ineq6(&one3, -0.25, &opts()).unwrap().value, 0.0);
        assert_eq!(check_ineq7(&one3, -0.25, &opts()).unwrap().value, 0.0);
        assert_eq!(check_ineq8(&one3, 1, 4.0, &opts()).unwrap().value, 0.0);
        assert_eq!(
            check_ineq9(&pt(&[1.0, 1.0]), 3.0, &opts()).unwrap().value,
            0.0
        );
        assert_eq!(
            check_amgm_age_g(&pt(&[1.0, 1.0]), 1.7, &opts())
                .unwrap()
                .value,
            0.0
        );
        assert_eq!(
            check_prop2_step(&pt(&[1.0, 1.0]), 0, 0.3, &opts())
                .unwrap()
                .value,
            0.0
        );
        for (i, a) in [(0, 1.0), (1, 2.0)] {
            assert_eq!(
                check_ineq2(&pt(&[1.0, 1.0]), i, a, &opts()).unwrap().value,
                0.0
            );
        }
    }

    #[test]
    fn ineq7_is_zero_at_unit_folded_exponent() {
        let m = check_ineq7(&pt(&[4.0, 1.0, 1.0]), -0.5, &opts()).unwrap();
        assert!(m.value.abs() < 1e-15);
    }

    #[test]
    fn ineq9_reports_degenerate_gamma_at_alpha_one() {
        let r = check_ineq9(&pt(&[2.0, 0.5]), 1.0, &CheckOptions::forced());
        assert!(matches!(r, Err(Error::DegenerateGamma { .. })));
    }

    #[test]
    fn chain_runs_both_cases_at_the_critical_exponent() {
        let p = pt(&[1.5, 0.9, 1.1]);
        let reports = check_chain(&p, 2.5, &opts()).unwrap();
        let has = |id| reports.iter().any(|r| r.predicate == id);
        assert!(has(PredicateId::Ineq2) && has(PredicateId::Ineq8) && has(PredicateId::Ineq9));
        assert_eq!(reports.last().unwrap().predicate, PredicateId::Prop1);
        assert!(reports.iter().all(|r| r.margin.is_satisfied()));
    }

    #[test]
    fn power_sum_reversal_hypotheses() {
        let p = pt(&[2.0, 0.5, 1.0]);
        assert!(check_power_sum_reversal(&p, 1.5, &opts())
            .unwrap()
            .is_satisfied());
        assert!(check_power_sum_reversal(&p, -3.0, &opts())
            .unwrap()
            .is_satisfied());
        assert!(check_power_sum_reversal(&p, 0.5, &opts()).is_err());
        assert!(check_power_sum_reversal(&pt(&[2.0, 1.0, 1.0]), -3.0, &opts()).is_err());
    }
}

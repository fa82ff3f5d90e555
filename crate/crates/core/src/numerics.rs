//! Log-domain evaluation of the cyclic sum
//!
//! ```text
//!     Σ_i (x_i^α − x_i) / (x_i^α + Σ_{j≠i} x_j)
//! ```
//!
//! plus feasibility (`∏ x_i ≥ 1`), projection onto `∏ x_i = 1`, and the margin
//! policy shared by every checker.
//!
//! Points store `ln x_i` as double-double values. The fast path reads the
//! leading `f64` component, the extended path the full value, so a point
//! built from exact rationals keeps ~32 digits for the oracle.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::decimal::{format_witness, parse_wide};
use crate::error::{Error, Result};
use crate::real::Real;
use crate::wide::{Wide, WIDE_EPSILON};

/// Slack on the log-product below which a point still counts as feasible.
pub const FEASIBILITY_SLACK: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct EvalPoint {
    logx: Vec<Wide>,
}

impl EvalPoint {
    /// Builds a point from strictly positive finite values.
    pub fn new(values: &[f64]) -> Result<EvalPoint> {
        if values.is_empty() {
            return Err(Error::EmptyPoint);
        }
        let logx = values
            .iter()
            .enumerate()
            .map(|(index, &value)| {
                if value.is_finite() && value > 0.0 {
                    Ok(Wide::from(value).ln())
                } else {
                    Err(Error::NonPositiveInput { index, value })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(EvalPoint { logx })
    }

    /// Builds a point from exact rationals `num / den`, keeping the logs at
    /// full extended precision.
    pub fn from_ratios(ratios: &[(Wide, Wide)]) -> Result<EvalPoint> {
        if ratios.is_empty() {
            return Err(Error::EmptyPoint);
        }
        let logx = ratios
            .iter()
            .enumerate()
            .map(|(index, &(num, den))| {
                let value = (num / den).to_f64();
                if num.is_finite() && den.is_finite() && num.hi() > 0.0 && den.hi() > 0.0 {
                    Ok(num.ln() - den.ln())
                } else {
                    Err(Error::NonPositiveInput { index, value })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        EvalPoint::from_wide_logs(logx)
    }

    pub fn from_logs(logs: &[f64]) -> Result<EvalPoint> {
        EvalPoint::from_wide_logs(logs.iter().map(|&l| Wide::from(l)).collect())
    }

    pub fn from_wide_logs(logx: Vec<Wide>) -> Result<EvalPoint> {
        if logx.is_empty() {
            return Err(Error::EmptyPoint);
        }
        for (index, l) in logx.iter().enumerate() {
            if !l.is_finite() {
                return Err(Error::NonPositiveInput {
                    index,
                    value: l.to_f64().exp(),
                });
            }
        }
        Ok(EvalPoint { logx })
    }

    pub fn n(&self) -> usize {
        self.logx.len()
    }

    pub fn log(&self, i: usize) -> f64 {
        self.logx[i].hi()
    }

    pub fn logs(&self) -> Vec<f64> {
        self.logx.iter().map(|l| l.hi()).collect()
    }

    pub fn wide_logs(&self) -> &[Wide] {
        &self.logx
    }

    pub fn values(&self) -> Vec<f64> {
        self.logx.iter().map(|l| l.hi().exp()).collect()
    }

    pub(crate) fn logs_as<R: Real>(&self) -> Vec<R> {
        self.logx.iter().map(|&l| R::from_wide(l)).collect()
    }

    /// The other coordinates divided by coordinate `i`, in cyclic order
    /// `i+1, …, i-1`: the rotation that puts `x_i = 1`.
    pub fn normalized_rest(&self, i: usize) -> EvalPoint {
        let n = self.n();
        let li = self.logx[i];
        let logx = (1..n).map(|k| self.logx[(i + k) % n] - li).collect();
        EvalPoint { logx }
    }

    /// Inverse of [`EvalPoint::normalized_rest`] at index 0: `(1, rest…)`.
    pub fn with_unit_head(rest: &EvalPoint) -> EvalPoint {
        let mut logx = Vec::with_capacity(rest.n() + 1);
        logx.push(Wide::ZERO);
        logx.extend_from_slice(&rest.logx);
        EvalPoint { logx }
    }

    pub fn permuted(&self, order: &[usize]) -> EvalPoint {
        EvalPoint {
            logx: order.iter().map(|&k| self.logx[k]).collect(),
        }
    }

    pub fn witness_strings(&self) -> Vec<String> {
        self.logx.iter().map(|&l| format_witness(l)).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct PointRepr {
    logx: Vec<String>,
}

impl Serialize for EvalPoint {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        PointRepr {
            logx: self.witness_strings(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for EvalPoint {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let repr = PointRepr::deserialize(d)?;
        let logx = repr
            .logx
            .iter()
            .map(|s| parse_wide(s))
            .collect::<Result<Vec<_>>>()
            .map_err(serde::de::Error::custom)?;
        EvalPoint::from_wide_logs(logx).map_err(serde::de::Error::custom)
    }
}

pub fn make_point(values: &[f64]) -> Result<EvalPoint> {
    EvalPoint::new(values)
}

/// `ln ∏ x_i`, summed in extended precision.
pub fn log_product(p: &EvalPoint) -> f64 {
    log_product_wide(p).to_f64()
}

pub fn log_product_wide(p: &EvalPoint) -> Wide {
    <Wide as Real>::sum(p.logx.iter().copied())
}

pub fn is_feasible(p: &EvalPoint) -> bool {
    log_product(p) >= -FEASIBILITY_SLACK
}

/// `|ln ∏ x_i| ≤ FEASIBILITY_SLACK`.
pub fn is_on_boundary(p: &EvalPoint) -> bool {
    log_product(p).abs() <= FEASIBILITY_SLACK
}

/// Rescales all coordinates by `(∏ x_i)^(-1/n)`.
pub fn project_to_boundary(p: &EvalPoint) -> EvalPoint {
    let mean = log_product_wide(p).div_f64(p.n() as f64);
    EvalPoint {
        logx: p.logx.iter().map(|&l| l - mean).collect(),
    }
}

/// `2 + 1/(n-1)` rounded once; infinite for `n = 1`.
pub fn critical_alpha(n: usize) -> f64 {
    if n <= 1 {
        f64::INFINITY
    } else {
        (2 * n - 1) as f64 / (n - 1) as f64
    }
}

/// `1/(1-n)`, the lower end of the reversed regime; `-inf` for `n = 1`.
pub fn reverse_alpha_floor(n: usize) -> f64 {
    if n <= 1 {
        f64::NEG_INFINITY
    } else {
        1.0 / (1.0 - n as f64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Exponents {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl Exponents {
    pub fn new(n: usize, alpha: f64) -> Exponents {
        Exponents {
            alpha,
            beta: 2.0 - alpha,
            gamma: (n as f64 - 1.0) * (alpha - 1.0) / n as f64,
        }
    }
}

/// `γ = (n-1)(α-1)/n` in extended precision.
pub fn gamma_wide(n: usize, alpha: f64) -> Wide {
    (Wide::from(alpha) - Wide::ONE)
        .mul_f64(n as f64 - 1.0)
        .div_f64(n as f64)
}

pub(crate) fn alpha_minus_one<R: Real>(alpha: f64) -> R {
    R::from_wide(Wide::from(alpha) - Wide::ONE)
}

/// One term of the cyclic sum in log coordinates. The largest exponent
/// among the denominator's summands is factored out, and the numerator is
/// `x_i (x_i^(α-1) - 1)` through `exp_m1`, so it is exactly zero at `α = 1`
/// or `x_i = 1`.
pub(crate) fn term_generic<R: Real>(logs: &[R], i: usize, alpha: R, alpha_m1: R) -> R {
    let li = logs[i];
    let ai = alpha * li;
    let m = logs
        .iter()
        .enumerate()
        .filter(|&(j, _)| j != i)
        .fold(ai, |m, (_, &l)| m.max(l));
    let den = R::sum(
        std::iter::once((ai - m).exp()).chain(
            logs.iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, &l)| (l - m).exp()),
        ),
    );
    let g = alpha_m1 * li;
    if g == R::zero() {
        return R::zero();
    }
    // x_i^α (1 − x_i^(1−α)) when the power dominates, so neither factor
    // overflows while the other underflows.
    let num = if g > R::zero() {
        (ai - m).exp() * -(-g).exp_m1()
    } else {
        (li - m).exp() * g.exp_m1()
    };
    let t = num / den;
    if t >= R::one() {
        R::below_one()
    } else {
        t
    }
}

pub(crate) fn terms_generic<R: Real>(logs: &[R], alpha: f64) -> Vec<R> {
    if alpha == 1.0 {
        return vec![R::zero(); logs.len()];
    }
    let a = R::from_f64(alpha);
    let am1 = alpha_minus_one::<R>(alpha);
    (0..logs.len())
        .map(|i| term_generic(logs, i, a, am1))
        .collect()
}

pub(crate) fn sum_generic<R: Real>(logs: &[R], alpha: f64) -> R {
    R::sum(terms_generic(logs, alpha))
}

/// `(x_i^α − x_i) / (x_i^α + Σ_{j≠i} x_j)`. Panics if `i >= n`.
pub fn eval_term(p: &EvalPoint, i: usize, alpha: f64) -> f64 {
    assert!(i < p.n(), "term index {i} out of range for n = {}", p.n());
    if alpha == 1.0 {
        return 0.0;
    }
    let logs = p.logs();
    term_generic(&logs, i, alpha, alpha - 1.0)
}

pub fn eval_terms(p: &EvalPoint, alpha: f64) -> Vec<f64> {
    terms_generic(&p.logs(), alpha)
}

/// The cyclic sum, compensated-summed in `f64`.
pub fn eval_sum(p: &EvalPoint, alpha: f64) -> f64 {
    sum_generic(&p.logs(), alpha)
}

/// The cyclic sum in double-double arithmetic. Fails only when the result
/// is nonzero yet smaller than its own error bound, so its sign is unknown.
pub fn eval_sum_hp(p: &EvalPoint, alpha: f64) -> Result<Wide> {
    let logs = p.logs_as::<Wide>();
    let terms = terms_generic(&logs, alpha);
    let total = <Wide as Real>::sum(terms.iter().copied());
    let bound = hp_error_bound(&logs, &terms, alpha);
    if !total.is_zero() && total.abs().hi() <= bound {
        return Err(Error::PrecisionExhausted {
            value: total.to_f64(),
            bound,
        });
    }
    Ok(total)
}

fn hp_error_bound(logs: &[Wide], terms: &[Wide], alpha: f64) -> f64 {
    let n = logs.len() as f64;
    let spread = logs.iter().map(|l| l.hi().abs()).fold(0.0, f64::max);
    terms
        .iter()
        .zip(logs)
        .map(|(t, l)| t.hi().abs() * (16.0 * n + (alpha * l.hi()).abs() + spread))
        .sum::<f64>()
        * WIDE_EPSILON
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Satisfied,
    Violated,
    Inconclusive,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Precision {
    /// `f64` with escalation of doubtful margins to extended precision.
    #[default]
    Fast,
    Extended,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    /// Relative tolerance ε, scaled by `1 + |lhs| + |rhs|`.
    pub epsilon: f64,
    /// Escalation factor K: fast margins in `[-Kε, -ε)` are inconclusive.
    pub escalation: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance {
            epsilon: 1e-9,
            escalation: 1e4,
        }
    }
}

/// Three-way verdict for a margin `value` against an absolute tolerance.
pub fn classify(value: f64, tolerance: f64, escalation: f64) -> Verdict {
    if value >= -tolerance {
        Verdict::Satisfied
    } else if value < -escalation * tolerance {
        Verdict::Violated
    } else {
        // NaN lands here too.
        Verdict::Inconclusive
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Margin {
    #[serde(with = "crate::serde_float")]
    pub value: f64,
    pub verdict: Verdict,
    /// Absolute threshold `ε · (1 + |lhs| + |rhs|)` the value was held to.
    #[serde(with = "crate::serde_float")]
    pub tolerance: f64,
    pub precision: Precision,
}

impl Margin {
    pub fn is_violated(&self) -> bool {
        self.verdict == Verdict::Violated
    }

    pub fn is_satisfied(&self) -> bool {
        self.verdict == Verdict::Satisfied
    }
}

/// Signed gap and its natural scale `1 + |lhs| + |rhs|`.
#[derive(Clone, Copy, Debug)]
pub struct Sides<R> {
    pub value: R,
    pub scale: R,
}

impl<R: Real> Sides<R> {
    pub fn from_lhs_rhs(lhs: R, rhs: R) -> Sides<R> {
        Sides {
            value: lhs - rhs,
            scale: R::one() + lhs.abs() + rhs.abs(),
        }
    }
}

/// Runs the fast formula and, when its verdict is anything but Satisfied,
/// settles it with the extended formula. Only an extended-precision
/// evaluation can return `Violated`.
pub fn adjudicate(
    fast: impl FnOnce() -> Sides<f64>,
    extended: impl FnOnce() -> Sides<Wide>,
    tolerance: Tolerance,
    mode: Precision,
) -> Margin {
    if mode == Precision::Fast {
        let s = fast();
        let tol = tolerance.epsilon * s.scale;
        if classify(s.value, tol, tolerance.escalation) == Verdict::Satisfied {
            return Margin {
                value: s.value,
                verdict: Verdict::Satisfied,
                tolerance: tol,
                precision: Precision::Fast,
            };
        }
    }
    let s = extended();
    let scale = s.scale.to_f64();
    let tol = tolerance.epsilon * scale;
    let value = s.value;
    let bound = 1e-28 * scale;
    let verdict =
        if value.is_nan() || !scale.is_finite() || (value + Wide::from(tol)).abs().hi() <= bound {
            Verdict::Inconclusive
        } else if value >= Wide::from(-tol) {
            Verdict::Satisfied
        } else {
            Verdict::Violated
        };
    Margin {
        value: value.to_f64(),
        verdict,
        tolerance: tol,
        precision: Precision::Extended,
    }
}

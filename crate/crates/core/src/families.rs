//! Parametric point families that probe the edges of the inequalities.
//!
//! * `(x^(n-1), 1/x, …, 1/x)`: the power-sum comparison `Σx ≥ Σx^β` changes
//!   sign inside the band `β ∈ (1−n, 1/(1−n))`, and the cyclic sum tends to
//!   `n − 1 − x^n/(n−1)` as `α → −∞`.
//! * `x_2 = (n − 3/2)^(1/γ)`, `x_3 = … = x_n = (1/(2n))^(1/γ)`: keeps `A` and
//!   `G` fixed while `γ → 0`, so the normalized Case 2 inequality fails for
//!   `α` near one.
//!
//! All family points are built directly in log coordinates, so their product
//! is one up to double-double rounding.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    critical_alpha, eval_sum_hp, gamma_wide, project_to_boundary, EvalPoint, Exponents, Margin,
};
use crate::propositions::{check_ineq9, ineq9_parts, CheckOptions, Ineq9Parts};
use crate::wide::Wide;

/// Largest `|ln x_i|` a Remark-b point may carry before it is declared
/// degenerate. Log-domain evaluation stays exact well past the `f64` range.
pub const REMARK_B_LOG_BUDGET: f64 = 1e6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemarkAFamily {
    pub n: usize,
    pub x: f64,
    pub beta: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemarkBFamily {
    pub n: usize,
    pub alpha: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemarkDFamily {
    pub n: usize,
    pub x: f64,
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "{name} must be positive and finite, got {v}"
        )))
    }
}

/// `(x^(n-1), 1/x, …, 1/x)` from `ln x`.
fn spike_point(n: usize, ln_x: Wide) -> Result<EvalPoint> {
    let mut logs = vec![-ln_x; n];
    logs[0] = ln_x.mul_f64((n - 1) as f64);
    EvalPoint::from_wide_logs(logs)
}

pub fn remark_a_point(f: &RemarkAFamily) -> Result<EvalPoint> {
    if f.n < 3 {
        return Err(Error::Domain(format!(
            "remark a family needs n >= 3, got {}",
            f.n
        )));
    }
    positive("x", f.x)?;
    spike_point(f.n, Wide::from(f.x).ln())
}

/// `D = x^(n−1) − x^(β(n−1)) + (n−1)(1/x − 1/x^β)`, i.e. `Σx − Σx^β` on the
/// family point.
pub fn remark_a_difference(f: &RemarkAFamily) -> f64 {
    remark_a_difference_wide(f.n, Wide::from(f.x).ln(), f.beta).to_f64()
}

fn remark_a_difference_wide(n: usize, l: Wide, beta: f64) -> Wide {
    let m = (n - 1) as f64;
    let b = Wide::from(beta);
    let spike = (l.mul_f64(m)).exp() * -((b - Wide::ONE) * l.mul_f64(m)).exp_m1();
    let tail = (-l).exp() * -((Wide::ONE - b) * l).exp_m1();
    spike + tail.mul_f64(m)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitDirection {
    PlusInfinityAtLargeX,
    MinusInfinityAtSmallX,
    NotApplicable,
}

/// Every divergence the difference `D` exhibits for this `β`: `+∞` as
/// `x → ∞` when `β ∈ (1−n, 1)`, `−∞` as `x → 0` when `β < 1/(1−n)`.
pub fn remark_a_limit_directions(n: usize, beta: f64) -> Vec<LimitDirection> {
    let mut out = Vec::new();
    if beta > 1.0 - n as f64 && beta < 1.0 {
        out.push(LimitDirection::PlusInfinityAtLargeX);
    }
    if beta < 1.0 / (1.0 - n as f64) {
        out.push(LimitDirection::MinusInfinityAtSmallX);
    }
    out
}

/// The first entry of [`remark_a_limit_directions`], or `NotApplicable`.
pub fn remark_a_limit_direction(n: usize, beta: f64) -> LimitDirection {
    remark_a_limit_directions(n, beta)
        .first()
        .copied()
        .unwrap_or(LimitDirection::NotApplicable)
}

/// `D` at `x ∈ {10, 10², 10³}` (growth probe) or `x ∈ {10⁻¹, 10⁻², 10⁻³}`
/// (decay probe).
pub fn remark_a_probe(n: usize, beta: f64, direction: LimitDirection) -> Vec<(f64, f64)> {
    let xs: &[f64] = match direction {
        LimitDirection::PlusInfinityAtLargeX => &[10.0, 100.0, 1000.0],
        LimitDirection::MinusInfinityAtSmallX => &[0.1, 0.01, 0.001],
        LimitDirection::NotApplicable => &[],
    };
    xs.iter()
        .map(|&x| (x, remark_a_difference(&RemarkAFamily { n, x, beta })))
        .collect()
}

/// Whether a probe diverges monotonically in the labelled direction.
pub fn probe_diverges(direction: LimitDirection, probe: &[(f64, f64)]) -> bool {
    let d: Vec<f64> = probe.iter().map(|p| p.1).collect();
    match direction {
        LimitDirection::PlusInfinityAtLargeX => {
            d.windows(2).all(|w| w[1] > w[0]) && d.last().is_some_and(|&v| v > 0.0)
        }
        LimitDirection::MinusInfinityAtSmallX => {
            d.windows(2).all(|w| w[1] < w[0]) && d.last().is_some_and(|&v| v < 0.0)
        }
        LimitDirection::NotApplicable => false,
    }
}

/// `(x_2, …, x_n)` in log coordinates: `ln x_2 = ln(n − 3/2)/γ`,
/// `ln x_j = −ln(2n)/γ`.
pub fn remark_b_point(f: &RemarkBFamily) -> Result<EvalPoint> {
    let (n, alpha) = (f.n, f.alpha);
    if n < 3 {
        return Err(Error::Domain(format!(
            "remark b family needs n >= 3, got {n}"
        )));
    }
    if !alpha.is_finite() || alpha <= 1.0 {
        return Err(Error::Domain(format!(
            "remark b family needs alpha > 1, got {alpha}"
        )));
    }
    let gamma = gamma_wide(n, alpha);
    let head = Wide::from(n as f64 - 1.5).ln() / gamma;
    let tail = -(Wide::from(2.0 * n as f64).ln() / gamma);
    let degenerate = |l: Wide| !l.is_finite() || l.abs().hi() > REMARK_B_LOG_BUDGET;
    if gamma.hi() <= 0.0 || degenerate(head) || degenerate(tail) {
        return Err(Error::DegenerateGamma { n, alpha });
    }
    let mut logs = vec![tail; n - 1];
    logs[0] = head;
    EvalPoint::from_wide_logs(logs)
}

/// `(1, x_2, …, x_n)` rescaled onto `∏ x_i = 1`, the full point on which the
/// indexed Case 2 bound is probed.
pub fn remark_b_full_point(f: &RemarkBFamily) -> Result<EvalPoint> {
    let rest = remark_b_point(f)?;
    Ok(project_to_boundary(&EvalPoint::with_unit_head(&rest)))
}

/// `A = Σ x_j^γ / (n−1)` and `G = ∏ x_j^((α−1)/n)` on the family, which do not
/// depend on `α`.
pub fn remark_b_means(f: &RemarkBFamily) -> Result<(f64, f64)> {
    let rest = remark_b_point(f)?;
    let parts = ineq9_parts(&rest, f.alpha);
    Ok((parts.a, parts.g))
}

pub fn remark_b_sides(f: &RemarkBFamily) -> Result<Ineq9Parts> {
    let rest = remark_b_point(f)?;
    Ok(ineq9_parts(&rest, f.alpha))
}

/// The normalized Case 2 margin on the family, evaluated regardless of
/// whether `α` lies in the Case 2 range.
pub fn remark_b_violation(n: usize, alpha: f64, opts: &CheckOptions) -> Result<Margin> {
    let rest = remark_b_point(&RemarkBFamily { n, alpha })?;
    let opts = CheckOptions {
        force: true,
        ..*opts
    };
    check_ineq9(&rest, alpha, &opts)
}

/// Exponents at the case boundary `α = 2 + 1/(n−1)`, where `γ = 1`.
pub fn remark_c_exponents(n: usize) -> Exponents {
    let alpha = critical_alpha(n);
    Exponents {
        gamma: gamma_wide(n, alpha).to_f64(),
        ..Exponents::new(n, alpha)
    }
}

pub fn remark_d_point(f: &RemarkDFamily) -> Result<EvalPoint> {
    if f.n < 2 {
        return Err(Error::Domain(format!(
            "remark d family needs n >= 2, got {}",
            f.n
        )));
    }
    positive("x", f.x)?;
    spike_point(f.n, Wide::from(f.x).ln())
}

/// `n − 1 − x^n/(n−1)`.
pub fn remark_d_limit(n: usize, x: f64) -> f64 {
    let m = n as f64 - 1.0;
    m - x.powi(n as i32) / m
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub alpha: f64,
    pub sum: f64,
    pub limit: f64,
    pub gap: f64,
}

/// Cyclic sum on the family at each `α`, evaluated in extended precision,
/// next to its `α → −∞` limit.
pub fn remark_d_convergence(n: usize, x: f64, alphas: &[f64]) -> Result<Vec<ConvergenceRow>> {
    let p = remark_d_point(&RemarkDFamily { n, x })?;
    let limit = remark_d_limit(n, x);
    alphas
        .iter()
        .map(|&alpha| {
            if !alpha.is_finite() {
                return Err(Error::Domain(format!("alpha must be finite, got {alpha}")));
            }
            let sum = match eval_sum_hp(&p, alpha) {
                Ok(s) => s.to_f64(),
                Err(Error::PrecisionExhausted { value, .. }) => value,
                Err(e) => return Err(e),
            };
            Ok(ConvergenceRow {
                alpha,
                sum,
                limit,
                gap: sum - limit,
            })
        })
        .collect()
}

/// Most negative `α` at which `|α · ln x|` stays within `budget`.
pub fn remark_d_alpha_cap(x: f64, budget: f64) -> f64 {
    -budget / x.ln().abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{log_product, Verdict};

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn remark_a_points() {
        let p = remark_a_point(&RemarkAFamily {
            n: 3,
            x: 2.0,
            beta: -1.0,
        })
        .unwrap();
        let v = p.values();
        assert!(close(v[0], 4.0, 1e-15) && close(v[1], 0.5, 1e-15) && close(v[2], 0.5, 1e-15));
        assert!(log_product(&p).abs() <= 1e-12);
        let one = remark_a_point(&RemarkAFamily {
            n: 3,
            x: 1.0,
            beta: 0.0,
        })
        .unwrap();
        assert_eq!(one.logs(), vec![0.0; 3]);
        assert!(remark_a_point(&RemarkAFamily {
            n: 2,
            x: 2.0,
            beta: 0.0
        })
        .is_err());
    }

    #[test]
    fn remark_a_difference_examples() {
        let d = |x| {
            remark_a_difference(&RemarkAFamily {
                n: 3,
                x,
                beta: -1.0,
            })
        };
        assert_eq!(d(1.0), 0.0);
        assert!(close(d(2.0), 0.75, 1e-15));
        assert!(close(d(0.5), -0.75, 1e-15));
    }

    #[test]
    fn remark_a_directions() {
        use LimitDirection::*;
        assert_eq!(
            remark_a_limit_directions(3, -1.0),
            vec![PlusInfinityAtLargeX, MinusInfinityAtSmallX]
        );
        assert_eq!(remark_a_limit_direction(3, 0.5), PlusInfinityAtLargeX);
        assert_eq!(remark_a_limit_direction(3, -3.0), MinusInfinityAtSmallX);
        assert_eq!(remark_a_limit_direction(3, 1.0), NotApplicable);
        for (beta, dir) in [(0.5, PlusInfinityAtLargeX), (-3.0, MinusInfinityAtSmallX)] {
            assert!(probe_diverges(dir, &remark_a_probe(3, beta, dir)));
        }
    }

    #[test]
    fn remark_b_point_at_unit_gamma() {
        let rest = remark_b_point(&RemarkBFamily { n: 3, alpha: 2.5 }).unwrap();
        let v = rest.values();
        assert!(close(v[0], 1.5, 1e-15) && close(v[1], 1.0 / 6.0, 1e-15));
        assert!(matches!(
            remark_b_point(&RemarkBFamily {
                n: 3,
                alpha: 1.0 + 1e-12
            }),
            Err(Error::DegenerateGamma { .. })
        ));
    }

    #[test]
    fn remark_b_fails_near_one() {
        let opts = CheckOptions::default();
        let m = remark_b_violation(3, 1.05, &opts).unwrap();
        assert_eq!(m.verdict, Verdict::Violated);
        let s = remark_b_sides(&RemarkBFamily { n: 3, alpha: 1.05 }).unwrap();
        assert!(close(s.rhs, 0.2, 1e-14) && s.lhs < 0.01);
        assert!(remark_b_violation(3, 2.5, &opts).unwrap().is_satisfied());
    }

    #[test]
    fn remark_c_gamma_is_one() {
        for n in 2..=8 {
            assert!((remark_c_exponents(n).gamma - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn remark_d_limit_examples() {
        assert!(close(remark_d_limit(3, 1.0), 1.5, 1e-15));
        assert!(remark_d_limit(3, 4f64.cbrt()).abs() < 1e-14);
        assert!(close(remark_d_limit(2, 1.5), -1.25, 1e-15));
    }

    #[test]
    fn remark_d_unit_point_sums_to_zero() {
        let rows = remark_d_convergence(3, 1.0, &[-10.0, -40.0]).unwrap();
        assert!(rows.iter().all(|r| r.sum == 0.0));
    }
}

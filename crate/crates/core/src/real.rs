//! Scalar abstraction shared by the fast (`f64`) and extended ([`Wide`]) paths.
//!
//! Every margin formula is written once, generically over [`Real`], and
//! instantiated in both precisions.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::wide::Wide;

pub trait Real:
    Copy
    + Debug
    + PartialOrd
    + Send
    + Sync
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    /// Relative rounding unit of the format.
    const UNIT_ROUNDOFF: f64;

    fn from_f64(x: f64) -> Self;
    fn from_wide(x: Wide) -> Self;
    fn to_f64(self) -> f64;

    fn exp(self) -> Self;
    fn exp_m1(self) -> Self;
    fn ln(self) -> Self;
    fn abs(self) -> Self;
    fn is_finite(self) -> bool;

    /// Sum with error compensation where the format needs it.
    fn sum<I: IntoIterator<Item = Self>>(items: I) -> Self;

    /// Largest representable value strictly below one, used to keep ratios
    /// whose true value is `< 1` from rounding up to `1`.
    fn below_one() -> Self;

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }
}

impl Real for f64 {
    const UNIT_ROUNDOFF: f64 = f64::EPSILON / 2.0;

    #[inline]
    fn from_f64(x: f64) -> Self {
        x
    }

    #[inline]
    fn from_wide(x: Wide) -> Self {
        x.to_f64()
    }

    #[inline]
    fn to_f64(self) -> f64 {
        self
    }

    #[inline]
    fn exp(self) -> Self {
        f64::exp(self)
    }

    #[inline]
    fn exp_m1(self) -> Self {
        f64::exp_m1(self)
    }

    #[inline]
    fn ln(self) -> Self {
        f64::ln(self)
    }

    #[inline]
    fn abs(self) -> Self {
        f64::abs(self)
    }

    #[inline]
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }

    fn sum<I: IntoIterator<Item = Self>>(items: I) -> Self {
        items
            .into_iter()
            .fold(NeumaierSum::default(), |acc, x| acc + x)
            .total()
    }

    fn below_one() -> Self {
        1.0 - f64::EPSILON / 2.0
    }
}

impl Real for Wide {
    const UNIT_ROUNDOFF: f64 = crate::wide::WIDE_EPSILON;

    fn from_f64(x: f64) -> Self {
        Wide::from(x)
    }

    fn from_wide(x: Wide) -> Self {
        x
    }

    fn to_f64(self) -> f64 {
        Wide::to_f64(self)
    }

    fn exp(self) -> Self {
        Wide::exp(self)
    }

    fn exp_m1(self) -> Self {
        Wide::exp_m1(self)
    }

    fn ln(self) -> Self {
        Wide::ln(self)
    }

    fn abs(self) -> Self {
        Wide::abs(self)
    }

    fn is_finite(self) -> bool {
        Wide::is_finite(self)
    }

    fn sum<I: IntoIterator<Item = Self>>(items: I) -> Self {
        items.into_iter().fold(Wide::ZERO, |acc, x| acc + x)
    }

    fn below_one() -> Self {
        Wide::ONE - Wide::from(crate::wide::WIDE_EPSILON)
    }
}

/// Kahan–Babuška–Neumaier running sum.
#[derive(Clone, Copy, Debug, Default)]
pub struct NeumaierSum {
    sum: f64,
    compensation: f64,
}

impl NeumaierSum {
    pub fn total(self) -> f64 {
        self.sum + self.compensation
    }
}

impl Add<f64> for NeumaierSum {
    type Output = NeumaierSum;

    #[inline]
    fn add(self, x: f64) -> NeumaierSum {
        let t = self.sum + x;
        let c = if self.sum.abs() >= x.abs() {
            (self.sum - t) + x
        } else {
            (x - t) + self.sum
        };
        NeumaierSum {
            sum: t,
            compensation: self.compensation + c,
        }
    }
}

/// `ln Σ exp(v)` with the maximum factored out.
pub fn log_sum_exp<R: Real>(values: &[R]) -> R {
    let m = values
        .iter()
        .copied()
        .fold(R::from_f64(f64::NEG_INFINITY), R::max);
    if !m.is_finite() {
        return m;
    }
    m + R::sum(values.iter().map(|&v| (v - m).exp())).ln()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neumaier_recovers_small_addends() {
        let total = f64::sum([1e16, 1.0, -1e16]);
        assert_eq!(total, 1.0);
        let naive: f64 = [1e16, 1.0, -1e16].iter().sum();
        assert_eq!(naive, 0.0);
    }

    #[test]
    fn log_sum_exp_is_overflow_free() {
        let v = log_sum_exp(&[1000.0, 1000.0]);
        assert!((v - (1000.0 + std::f64::consts::LN_2)).abs() < 1e-12);
        let w = log_sum_exp(&[Wide::from(-1000.0), Wide::from(-1000.0)]);
        assert!((w.to_f64() - (-1000.0 + std::f64::consts::LN_2)).abs() < 1e-12);
    }

    #[test]
    fn below_one_is_strictly_below_one() {
        assert!(f64::below_one() < 1.0);
        assert!(<Wide as Real>::below_one() < Wide::ONE);
    }
}

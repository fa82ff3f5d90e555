//! Double-double floating point.
//!
//! A [`Wide`] is an unevaluated sum `hi + lo` of two `f64` values with
//! `|lo| <= ulp(hi) / 2`, giving roughly 106 bits (about 32 decimal digits)
//! of significand. The exponent range is that of `f64`, so callers still
//! evaluate in the log domain and factor out maxima before exponentiating.
//!
//! The algorithms are the classic error-free transformations (Knuth's
//! two-sum, FMA-based two-product) with Taylor/doubling for `exp_m1` and a
//! Newton step for `ln`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

/// Unit roundoff of the double-double format, 2^-104.
pub const WIDE_EPSILON: f64 = 4.930_380_657_631_324e-32;

#[derive(Clone, Copy, Default, PartialEq)]
pub struct Wide {
    hi: f64,
    lo: f64,
}

pub const LN_2: Wide = Wide {
    hi: std::f64::consts::LN_2,
    lo: 2.319_046_813_846_299_6e-17,
};

/// Third component of ln 2 beyond [`LN_2`], used in argument reduction.
const LN_2_TAIL: f64 = 5.707_708_438_416_212e-34;

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

/// `x * 2^k` without intermediate overflow for `k` in the double range.
fn scale_pow2(x: f64, k: i32) -> f64 {
    let half = k / 2;
    x * 2f64.powi(half) * 2f64.powi(k - half)
}

impl Wide {
    pub const ZERO: Wide = Wide { hi: 0.0, lo: 0.0 };
    pub const ONE: Wide = Wide { hi: 1.0, lo: 0.0 };

    #[inline]
    fn renorm(hi: f64, lo: f64) -> Wide {
        if !hi.is_finite() {
            return Wide { hi, lo: 0.0 };
        }
        let (s, e) = quick_two_sum(hi, lo);
        Wide { hi: s, lo: e }
    }

    /// Builds a value from two components; they need not be normalized.
    pub fn from_parts(hi: f64, lo: f64) -> Wide {
        let (s, e) = two_sum(hi, lo);
        Wide::renorm(s, e)
    }

    #[inline]
    pub fn hi(self) -> f64 {
        self.hi
    }

    #[inline]
    pub fn lo(self) -> f64 {
        self.lo
    }

    #[inline]
    pub fn to_f64(self) -> f64 {
        self.hi + self.lo
    }

    pub fn is_finite(self) -> bool {
        self.hi.is_finite() && self.lo.is_finite()
    }

    pub fn is_nan(self) -> bool {
        self.hi.is_nan() || self.lo.is_nan()
    }

    pub fn is_zero(self) -> bool {
        self.hi == 0.0
    }

    pub fn is_sign_negative(self) -> bool {
        self.hi < 0.0 || (self.hi == 0.0 && self.lo < 0.0)
    }

    pub fn abs(self) -> Wide {
        if self.is_sign_negative() {
            -self
        } else {
            self
        }
    }

    pub fn max(self, other: Wide) -> Wide {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Wide) -> Wide {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn mul_f64(self, b: f64) -> Wide {
        let (p1, p2) = two_prod(self.hi, b);
        if !p1.is_finite() {
            return Wide { hi: p1, lo: 0.0 };
        }
        Wide::renorm(p1, p2 + self.lo * b)
    }

    pub fn div_f64(self, b: f64) -> Wide {
        self / Wide::from(b)
    }

    /// Exact multiplication by a power of two.
    pub fn ldexp(self, k: i32) -> Wide {
        Wide::renorm(scale_pow2(self.hi, k), scale_pow2(self.lo, k))
    }

    pub fn square(self) -> Wide {
        self * self
    }

    pub fn recip(self) -> Wide {
        Wide::ONE / self
    }

    /// Nearest integer, ties away from zero.
    pub fn round(self) -> Wide {
        let hi = self.hi.round();
        if hi == self.hi {
            let lo = self.lo.round();
            Wide::from_parts(hi, lo)
        } else if (hi - self.hi).abs() == 0.5 && self.lo != 0.0 {
            // hi sat exactly on a tie; lo decides the direction.
            let down = self.hi.floor();
            if self.lo > 0.0 {
                Wide::from(down + 1.0)
            } else {
                Wide::from(down)
            }
        } else {
            Wide::from(hi)
        }
    }

    /// `exp(x) - 1` for `|x| <= ln 2 / 2`, accurate relative to the result.
    fn exp_m1_reduced(self) -> Wide {
        const HALVINGS: i32 = 10;
        let r = self.ldexp(-HALVINGS);
        if r.is_zero() {
            return self;
        }
        let threshold = r.hi.abs() * 1e-34;
        let mut term = r;
        let mut sum = r;
        for k in 2..30 {
            term = (term * r).div_f64(k as f64);
            sum += term;
            if term.hi.abs() <= threshold {
                break;
            }
        }
        // expm1(2y) = 2 expm1(y) + expm1(y)^2
        for _ in 0..HALVINGS {
            sum = sum.ldexp(1) + sum.square();
        }
        sum
    }

    pub fn exp(self) -> Wide {
        if self.is_nan() {
            return Wide::from(f64::NAN);
        }
        if self.hi > 709.79 {
            return Wide::from(f64::INFINITY);
        }
        if self.hi < -745.2 {
            return Wide::ZERO;
        }
        if self.is_zero() {
            return Wide::ONE;
        }
        let k = (self.hi / LN_2.hi).round();
        let r = self - LN_2.mul_f64(k) - Wide::from(LN_2_TAIL).mul_f64(k);
        let e = r.exp_m1_reduced() + Wide::ONE;
        e.ldexp(k as i32)
    }

    pub fn exp_m1(self) -> Wide {
        if self.hi.abs() <= 0.34 {
            if self.is_zero() {
                return self;
            }
            self.exp_m1_reduced()
        } else {
            self.exp() - Wide::ONE
        }
    }

    /// Natural logarithm; NaN for negative input, -inf at zero.
    pub fn ln(self) -> Wide {
        if self.is_nan() || self.is_sign_negative() && !self.is_zero() {
            return Wide::from(f64::NAN);
        }
        if self.is_zero() {
            return Wide::from(f64::NEG_INFINITY);
        }
        if self.hi.is_infinite() {
            return self;
        }
        // x = m 2^e with m near one, so ln of a power of two is exact
        // and ln(x) + ln(1/x) cancels.
        let e = self.hi.log2().round();
        let m = self.ldexp(-(e as i32));
        let mut y = if m == Wide::ONE {
            Wide::ZERO
        } else {
            // Newton on f(y) = exp(y) - m: y <- y + m exp(-y) - 1.
            let mut y = Wide::from(m.hi.ln());
            for _ in 0..2 {
                y = y + (m * (-y).exp()) - Wide::ONE;
            }
            y
        };
        if e != 0.0 {
            y = y + LN_2.mul_f64(e) + Wide::from(LN_2_TAIL * e);
        }
        y
    }

    pub fn powi(self, mut e: i32) -> Wide {
        let mut base = if e < 0 { self.recip() } else { self };
        e = e.abs();
        let mut acc = Wide::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base;
            }
            base = base.square();
            e >>= 1;
        }
        acc
    }

    /// `self^y` for positive `self`, through `exp(y ln self)`.
    pub fn powf(self, y: Wide) -> Wide {
        (self.ln() * y).exp()
    }

    pub fn total_cmp(&self, other: &Wide) -> Ordering {
        self.hi
            .total_cmp(&other.hi)
            .then_with(|| self.lo.total_cmp(&other.lo))
    }
}

impl From<f64> for Wide {
    #[inline]
    fn from(x: f64) -> Wide {
        Wide { hi: x, lo: 0.0 }
    }
}

impl From<i64> for Wide {
    fn from(x: i64) -> Wide {
        let hi = x as f64;
        let lo = (x - hi as i64) as f64;
        Wide::from_parts(hi, lo)
    }
}

impl PartialOrd for Wide {
    fn partial_cmp(&self, other: &Wide) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            ord => Some(ord),
        }
    }
}

impl Neg for Wide {
    type Output = Wide;
    #[inline]
    fn neg(self) -> Wide {
        Wide {
            hi: -self.hi,
            lo: -self.lo,
        }
    }
}

impl Add for Wide {
    type Output = Wide;
    #[inline]
    fn add(self, b: Wide) -> Wide {
        let (s1, s2) = two_sum(self.hi, b.hi);
        if !s1.is_finite() {
            return Wide { hi: s1, lo: 0.0 };
        }
        let (t1, t2) = two_sum(self.lo, b.lo);
        let (s1, s2) = quick_two_sum(s1, s2 + t1);
        Wide::renorm(s1, s2 + t2)
    }
}

impl Sub for Wide {
    type Output = Wide;
    #[inline]
    fn sub(self, b: Wide) -> Wide {
        self + (-b)
    }
}

impl Mul for Wide {
    type Output = Wide;
    #[inline]
    fn mul(self, b: Wide) -> Wide {
        let (p1, p2) = two_prod(self.hi, b.hi);
        if !p1.is_finite() {
            return Wide { hi: p1, lo: 0.0 };
        }
        Wide::renorm(p1, p2 + (self.hi * b.lo + self.lo * b.hi))
    }
}

impl Div for Wide {
    type Output = Wide;
    fn div(self, b: Wide) -> Wide {
        let q1 = self.hi / b.hi;
        if !q1.is_finite() || q1 == 0.0 && self.hi != 0.0 {
            return Wide::from(q1);
        }
        let r = self - b.mul_f64(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64(q2);
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        Wide { hi: q1, lo: q2 } + Wide::from(q3)
    }
}

impl AddAssign for Wide {
    fn add_assign(&mut self, rhs: Wide) {
        *self = *self + rhs;
    }
}

impl SubAssign for Wide {
    fn sub_assign(&mut self, rhs: Wide) {
        *self = *self - rhs;
    }
}

impl fmt::Debug for Wide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Wide({:e} + {:e})", self.hi, self.lo)
    }
}

impl fmt::Display for Wide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&crate::decimal::format_wide(*self, 34))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decimal::{parse_rational, wide_to_rational};
    use num_rational::BigRational;
    use num_traits::{Signed, Zero};

    fn rel_err(got: Wide, reference: &str) -> f64 {
        let r = parse_rational(reference).unwrap();
        let g = wide_to_rational(got).unwrap();
        if r.is_zero() {
            return num_traits::ToPrimitive::to_f64(&g.abs()).unwrap();
        }
        let d: BigRational = ((g - &r) / r).abs();
        num_traits::ToPrimitive::to_f64(&d).unwrap()
    }

    // Reference digits from a 45-digit multiprecision evaluation.
    #[test]
    fn exp_matches_reference() {
        let cases = [
            (1.0, "2.71828182845904523536028747135266249775725"),
            (-0.5, "0.606530659712633423603799534991180453441918"),
            (100.25, "3.4516107331259239871361985995265746750924e43"),
            (-600.5, "1.60754676979379423874989836939176363652508e-261"),
        ];
        for (x, want) in cases {
            let e = rel_err(Wide::from(x).exp(), want);
            assert!(e < 1e-30, "exp({x}): rel err {e:e}");
        }
    }

    #[test]
    fn ln_matches_reference() {
        let cases = [
            (2.0, "0.6931471805599453094172321214581765680755"),
            (10.0, "2.3025850929940456840179914546843642076011"),
            (1e-300, "-690.775527898213705180338344570100502908613"),
            (1.5, "0.40546510810816438197801311546434913657199"),
        ];
        for (x, want) in cases {
            let e = rel_err(Wide::from(x).ln(), want);
            assert!(e < 1e-30, "ln({x}): rel err {e:e}");
        }
    }

    #[test]
    fn exp_m1_keeps_relative_accuracy_near_zero() {
        let cases = [
            (1e-10, "1.00000000005000003643386398580766964423082e-10"),
            (0.3, "0.349858807576003088997301031688634032141753"),
            (-0.2, "-0.181269246922018150419801821739652646006652"),
        ];
        for (x, want) in cases {
            let e = rel_err(Wide::from(x).exp_m1(), want);
            assert!(e < 1e-30, "expm1({x}): rel err {e:e}");
        }
    }

    #[test]
    fn ln_2_constant_is_correct() {
        assert!(rel_err(LN_2, "0.6931471805599453094172321214581765680755") < 1e-32);
    }

    #[test]
    fn division_and_exact_thirds() {
        let third = Wide::ONE / Wide::from(3.0);
        let back = third * Wide::from(3.0);
        assert!((back - Wide::ONE).abs().hi() < 1e-31);
        let q = Wide::from(9.0) / Wide::from(17.0);
        assert!(rel_err(q, "0.52941176470588235294117647058823529411764706") < 1e-31);
    }

    #[test]
    fn overflow_and_underflow_saturate() {
        assert_eq!(Wide::from(800.0).exp().hi(), f64::INFINITY);
        assert_eq!(Wide::from(-800.0).exp(), Wide::ZERO);
        assert!(Wide::from(-1.0).ln().is_nan());
        assert_eq!(Wide::ZERO.ln().hi(), f64::NEG_INFINITY);
        assert_eq!(Wide::ONE.ln(), Wide::ZERO);
        assert_eq!(Wide::ZERO.exp(), Wide::ONE);
    }

    #[test]
    fn exp_ln_round_trip() {
        for &x in &[1e-200, 0.001, 0.7, 1.0 + 1e-12, 3.0, 1e150] {
            let w = Wide::from(x);
            let back = w.ln().exp();
            let err = ((back - w) / w).abs().hi();
            // exp turns the absolute error of ln into relative error.
            let bound = 1e-31 * (1.0 + x.ln().abs());
            assert!(err < bound, "x={x} err={err:e}");
        }
    }

    #[test]
    fn powi_is_exact_on_small_integers() {
        assert_eq!(Wide::from(2.0).powi(10), Wide::from(1024.0));
        assert_eq!(Wide::from(2.0).powi(-3), Wide::from(0.125));
    }

    #[test]
    fn round_handles_low_part() {
        assert_eq!(Wide::from_parts(2.5, 1e-20).round(), Wide::from(3.0));
        assert_eq!(Wide::from_parts(2.5, -1e-20).round(), Wide::from(2.0));
        assert_eq!(Wide::from(-1.4).round(), Wide::from(-1.0));
    }
}

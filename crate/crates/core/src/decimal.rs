//! Exact conversions between [`Wide`] values, big rationals and decimal text.
//!
//! Witness coordinates are written with 40 significant digits, or exactly
//! when 40 digits would not reproduce the same double-double value.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::wide::Wide;

pub const WITNESS_DIGITS: usize = 40;

/// Witness text for `x`: [`WITNESS_DIGITS`] significant digits when that
/// parses back to `x`, otherwise the exact (finite) decimal expansion.
pub fn format_witness(x: Wide) -> String {
    let short = format_wide(x, WITNESS_DIGITS);
    if !x.is_finite() || parse_wide(&short).ok() == Some(x) {
        return short;
    }
    let r = wide_to_rational(x).expect("finite");
    // A dyadic N / 2^k equals N·5^k / 10^k, so this many digits is exact.
    let k = r.denom().bits().saturating_sub(1) as usize;
    let scaled = r.numer().abs() * num_traits::pow(BigInt::from(5u8), k);
    format_rational(&r, scaled.to_string().len())
}

/// Exact rational value of a finite `f64`.
pub fn f64_to_rational(x: f64) -> Option<BigRational> {
    BigRational::from_float(x)
}

/// Exact rational value `hi + lo` of a finite [`Wide`].
pub fn wide_to_rational(x: Wide) -> Option<BigRational> {
    Some(f64_to_rational(x.hi())? + f64_to_rational(x.lo())?)
}

/// Nearest double-double to a rational (each component correctly rounded).
pub fn rational_to_wide(r: &BigRational) -> Wide {
    let hi = r.to_f64().unwrap_or(f64::NAN);
    if !hi.is_finite() {
        return Wide::from(hi);
    }
    let rest = r - f64_to_rational(hi).expect("finite");
    let lo = rest.to_f64().unwrap_or(0.0);
    Wide::from_parts(hi, lo)
}

/// Parses a decimal (`-1.25e-3`), an integer, or a ratio `p/q` of decimals.
pub fn parse_rational(text: &str) -> Result<BigRational> {
    let t = text.trim();
    if let Some((num, den)) = t.split_once('/') {
        let n = parse_decimal(num)?;
        let d = parse_decimal(den)?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{text}`")));
        }
        return Ok(n / d);
    }
    parse_decimal(t)
}

fn parse_decimal(text: &str) -> Result<BigRational> {
    let bad = || Error::Parse(format!("not a number: `{text}`"));
    let t = text.trim();
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(pos) => {
            let e: i64 = t[pos + 1..].parse().map_err(|_| bad())?;
            (&t[..pos], e)
        }
        None => (t, 0),
    };
    let (negative, body) = match mantissa.as_bytes().first() {
        Some(b'-') => (true, &mantissa[1..]),
        Some(b'+') => (false, &mantissa[1..]),
        _ => (false, mantissa),
    };
    let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part
        .bytes()
        .chain(frac_part.bytes())
        .all(|b| b.is_ascii_digit())
    {
        return Err(bad());
    }
    if exponent.abs() > 100_000 {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = BigInt::parse_bytes(digits.as_bytes(), 10).ok_or_else(bad)?;
    if negative {
        value = -value;
    }
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10u8);
    let r = if scale >= 0 {
        BigRational::from_integer(value * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(value, num_traits::pow(ten, (-scale) as usize))
    };
    Ok(r)
}

/// Parses decimal or ratio text into the nearest [`Wide`].
pub fn parse_wide(text: &str) -> Result<Wide> {
    Ok(rational_to_wide(&parse_rational(text)?))
}

/// Numerator and denominator of a decimal or ratio literal in lowest
/// terms, each rounded to the nearest [`Wide`] (exact below `2^106`).
pub fn parse_ratio_wide(text: &str) -> Result<(Wide, Wide)> {
    let r = parse_rational(text)?;
    let num = rational_to_wide(&BigRational::from_integer(r.numer().clone()));
    let den = rational_to_wide(&BigRational::from_integer(r.denom().clone()));
    Ok((num, den))
}

/// Scientific notation with `digits` significant digits, correctly rounded
/// from the exact value of `x`.
pub fn format_wide(x: Wide, digits: usize) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if !x.is_finite() {
        return if x.hi() > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let r = wide_to_rational(x).expect("finite");
    format_rational(&r, digits)
}

pub fn format_rational(r: &BigRational, digits: usize) -> String {
    let digits = digits.max(1);
    if r.is_zero() {
        return "0".into();
    }
    let negative = r.is_negative();
    let a = r.abs();
    let ten = BigRational::from_integer(BigInt::from(10u8));
    // Decimal exponent estimate from the bit lengths, then corrected.
    let bits = a.numer().bits() as i64 - a.denom().bits() as i64;
    let mut exp10 = (bits as f64 * std::f64::consts::LOG10_2).floor() as i64;
    let pow10 = |e: i64| -> BigRational {
        if e >= 0 {
            num_traits::pow(ten.clone(), e as usize)
        } else {
            BigRational::one() / num_traits::pow(ten.clone(), (-e) as usize)
        }
    };
    while pow10(exp10) > a {
        exp10 -= 1;
    }
    while pow10(exp10 + 1) <= a {
        exp10 += 1;
    }
    let scaled = &a * pow10(digits as i64 - 1 - exp10);
    let mut m = scaled.round().to_integer();
    let limit = num_traits::pow(BigInt::from(10u8), digits);
    if m >= limit {
        m /= 10;
        exp10 += 1;
    }
    let s = m.to_string();
    let (lead, tail) = s.split_at(1);
    let tail = tail.trim_end_matches('0');
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    out.push_str(lead);
    if !tail.is_empty() {
        out.push('.');
        out.push_str(tail);
    }
    if exp10 != 0 {
        out.push_str(&format!("e{exp10}"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_ratios_and_exponents() {
        assert_eq!(
            parse_rational("3/2").unwrap(),
            BigRational::new(3.into(), 2.into())
        );
        assert_eq!(
            parse_rational("-1.25e-1").unwrap(),
            BigRational::new((-1).into(), 8.into())
        );
        assert_eq!(
            parse_rational("7").unwrap(),
            BigRational::from_integer(7.into())
        );
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
        assert!(parse_rational("1.2.3").is_err());
    }

    #[test]
    fn formats_with_correct_rounding() {
        let r = BigRational::new(9.into(), 17.into());
        assert_eq!(format_rational(&r, 5), "5.2941e-1");
        assert_eq!(
            format_rational(&BigRational::from_integer(1000.into()), 3),
            "1e3"
        );
        assert_eq!(
            format_rational(&BigRational::new(999_999.into(), 1_000_000.into()), 3),
            "1"
        );
    }

    #[test]
    fn wide_survives_text_round_trip() {
        let x = Wide::from(2.0).ln() / Wide::from(3.0);
        let text = format_wide(x, WITNESS_DIGITS);
        assert_eq!(parse_wide(&text).unwrap(), x);
        let y = -Wide::from(1e-300).ln();
        assert_eq!(parse_wide(&format_witness(y)).unwrap(), y);
        for z in [
            Wide::from_parts(6.390217287371916, 6.93359375e-41),
            Wide::from(-12.587637795192325),
            Wide::from_parts(1.0, 1e-300),
        ] {
            assert_eq!(parse_wide(&format_witness(z)).unwrap(), z);
        }
    }

    #[test]
    fn one_third_is_nearest_double_double() {
        let w = parse_wide("1/3").unwrap();
        let err = (w * Wide::from(3.0) - Wide::ONE).abs().hi();
        assert!(err < 1e-31);
    }
}

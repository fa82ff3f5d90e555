//! Parsing of points, exponent grids and index lists from the command line.

use anyhow::{bail, Context, Result};
use cyclab_core::decimal::{parse_ratio_wide, parse_rational, rational_to_wide};
use cyclab_core::numerics::EvalPoint;
use cyclab_core::search::Target;
use cyclab_core::PredicateId;
pub fn parse_number(text: &str) -> Result<f64> {
    let r = parse_rational(text)?;
    Ok(rational_to_wide(&r).to_f64())
}

/// Comma-separated positive coordinates such as `2,1/2,3.5`.
pub fn parse_point(text: &str) -> Result<EvalPoint> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    if parts.iter().all(|p| p.is_empty()) {
        bail!(cyclab_core::Error::EmptyPoint);
    }
    let mut ratios = Vec::with_capacity(parts.len());
    for (index, part) in parts.iter().enumerate() {
        let (num, den) = parse_ratio_wide(part)?;
        let value = (num / den).to_f64();
        if !(num.hi() > 0.0 && den.hi() > 0.0 && value.is_finite() && value > 0.0) {
            bail!(cyclab_core::Error::NonPositiveInput { index, value });
        }
        ratios.push((num, den));
    }
    Ok(EvalPoint::from_ratios(&ratios)?)
}

/// A single number, a comma list, or an inclusive grid `start:stop:step`.
pub fn parse_grid(text: &str) -> Result<Vec<f64>> {
    let t = text.trim();
    if t.is_empty() {
        bail!(cyclab_core::Error::Domain("empty exponent grid".into()));
    }
    if t.contains(':') {
        let parts: Vec<&str> = t.split(':').collect();
        if parts.len() != 3 {
            bail!(cyclab_core::Error::Parse(format!(
                "grid `{t}` must look like start:stop:step"
            )));
        }
        let start = parse_number(parts[0])?;
        let stop = parse_number(parts[1])?;
        let step = parse_number(parts[2])?;
        if step.is_nan() || step <= 0.0 || !start.is_finite() || !stop.is_finite() {
            bail!(cyclab_core::Error::Domain(format!("invalid grid `{t}`")));
        }
        if stop < start {
            bail!(cyclab_core::Error::Domain(format!(
                "empty exponent grid `{t}`"
            )));
        }
        let steps = ((stop - start) / step + 1e-9).floor() as usize;
        if steps > 1_000_000 {
            bail!(cyclab_core::Error::Domain(format!(
                "grid `{t}` is too fine"
            )));
        }
        return Ok((0..=steps).map(|k| tidy(start + k as f64 * step)).collect());
    }
    t.split(',')
        .map(|p| parse_number(p).with_context(|| format!("in list `{t}`")))
        .collect()
}

/// Removes the representation noise of `start + k·step`.
fn tidy(x: f64) -> f64 {
    let r: f64 = format!("{x:.12}").parse().unwrap_or(x);
    if (r - x).abs() <= 1e-12 * (1.0 + x.abs()) {
        r
    } else {
        x
    }
}

/// Integers as a comma list or an inclusive range `a..b`.
pub fn parse_usizes(text: &str) -> Result<Vec<usize>> {
    let t = text.trim();
    if let Some((a, b)) = t.split_once("..") {
        let a: usize = a.trim().parse().context("range start")?;
        let b: usize = b
            .trim_start_matches('=')
            .trim()
            .parse()
            .context("range end")?;
        if b < a {
            bail!(cyclab_core::Error::Domain(format!("empty range `{t}`")));
        }
        return Ok((a..=b).collect());
    }
    t.split(',')
        .map(|p| {
            p.trim()
                .parse::<usize>()
                .with_context(|| format!("bad integer `{p}`"))
        })
        .collect()
}

pub fn parse_target(text: &str) -> Result<Target> {
    let key = text.trim().to_ascii_lowercase().replace('-', "_");
    if matches!(
        key.as_str(),
        "ineq3_reversed" | "reversal" | "power_sum_reversal"
    ) {
        return Ok(Target::PowerSumReversal);
    }
    Ok(Target::Predicate(key.parse::<PredicateId>()?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(
            parse_grid("1:2:0.25").unwrap(),
            vec![1.0, 1.25, 1.5, 1.75, 2.0]
        );
        assert_eq!(parse_grid("1:4:0.1").unwrap().len(), 31);
        assert_eq!(parse_grid("1:4:0.1").unwrap()[3], 1.3);
        assert_eq!(parse_grid("-1,3/2").unwrap(), vec![-1.0, 1.5]);
        assert!(parse_grid("").is_err());
        assert!(parse_grid("2:1:0.1").is_err());
    }

    #[test]
    fn points() {
        let p = parse_point("2, 1/2").unwrap();
        assert_eq!(p.n(), 2);
        assert!(p.log(0) + p.log(1) == 0.0);
        assert!(parse_point("0,1").is_err());
        assert!(parse_point("-1,1").is_err());
        assert!(parse_point("x").is_err());
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_usizes("2..4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_usizes("2,5").unwrap(), vec![2, 5]);
    }
}

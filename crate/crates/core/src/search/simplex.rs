//! Nelder–Mead downhill simplex.

/// Result of one local descent.
#[derive(Clone, Debug)]
pub struct Descent {
    pub x: Vec<f64>,
    pub f: f64,
    pub evaluations: usize,
}

#[derive(Clone, Copy, Debug)]
pub struct SimplexParams {
    pub step: f64,
    pub max_evals: usize,
    /// Stop once the spread of values and the simplex diameter fall below
    /// these.
    pub f_tol: f64,
    pub x_tol: f64,
}

impl Default for SimplexParams {
    fn default() -> Self {
        SimplexParams {
            step: 1.0,
            max_evals: 5_000,
            f_tol: 1e-15,
            x_tol: 1e-10,
        }
    }
}

/// Minimizes `f` from `x0`. Non-finite values are treated as `+∞`, so the
/// objective may reject points by returning NaN or infinity.
pub fn nelder_mead<F>(mut f: F, x0: &[f64], params: SimplexParams) -> Descent
where
    F: FnMut(&[f64]) -> f64,
{
    let d = x0.len();
    let mut evals = 0usize;
    // Past the cap every point scores +∞ without calling `f`.
    let cap = params.max_evals;
    let mut eval = |x: &[f64], evals: &mut usize| {
        if *evals >= cap {
            return f64::INFINITY;
        }
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    if d == 0 {
        let v = eval(x0, &mut evals);
        return Descent {
            x: x0.to_vec(),
            f: v,
            evaluations: evals,
        };
    }

    let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(d + 1);
    let f0 = eval(x0, &mut evals);
    simplex.push((x0.to_vec(), f0));
    for k in 0..d {
        let mut x = x0.to_vec();
        x[k] += params.step;
        let v = eval(&x, &mut evals);
        simplex.push((x, v));
    }

    let (alpha, gamma, rho, sigma) = (1.0, 2.0, 0.5, 0.5);
    while evals < params.max_evals {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0].1;
        let worst = simplex[d].1;
        let diameter = simplex[1..]
            .iter()
            .map(|(x, _)| {
                x.iter()
                    .zip(&simplex[0].0)
                    .map(|(a, b)| (a - b).abs())
                    .fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        let spread = if worst.is_finite() {
            (worst - best).abs()
        } else {
            f64::INFINITY
        };
        if spread <= params.f_tol * (1.0 + best.abs()) && diameter <= params.x_tol {
            break;
        }

        let mut centroid = vec![0.0; d];
        for (x, _) in &simplex[..d] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / d as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[d].0)
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };

        let xr = along(alpha);
        let fr = eval(&xr, &mut evals);
        if fr < simplex[0].1 {
            let xe = along(gamma);
            let fe = eval(&xe, &mut evals);
            simplex[d] = if fe < fr { (xe, fe) } else { (xr, fr) };
            continue;
        }
        if fr < simplex[d - 1].1 {
            simplex[d] = (xr, fr);
            continue;
        }
        let (xc, fc) = if fr < simplex[d].1 {
            let xc = along(rho);
            let fc = eval(&xc, &mut evals);
            (xc, fc.min(f64::INFINITY))
        } else {
            let xc = along(-rho);
            let fc = eval(&xc, &mut evals);
            (xc, fc)
        };
        if fc < simplex[d].1.min(fr) {
            simplex[d] = (xc, fc);
            continue;
        }
        let x_best = simplex[0].0.clone();
        for (x, v) in simplex.iter_mut().skip(1) {
            for (xi, bi) in x.iter_mut().zip(&x_best) {
                *xi = bi + sigma * (*xi - bi);
            }
            *v = eval(x, &mut evals);
        }
    }
    simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
    let (x, f) = simplex.swap_remove(0);
    Descent {
        x,
        f,
        evaluations: evals,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_rosenbrock_minimum() {
        let rosen = |x: &[f64]| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2);
        let r = nelder_mead(
            rosen,
            &[-1.2, 1.0],
            SimplexParams {
                max_evals: 20_000,
                ..SimplexParams::default()
            },
        );
        assert!(r.f < 1e-12, "{r:?}");
        assert!((r.x[0] - 1.0).abs() < 1e-5);
    }

    #[test]
    fn respects_the_evaluation_budget() {
        let r = nelder_mead(
            |x: &[f64]| x.iter().map(|v| v.sin()).sum(),
            &[0.0; 4],
            SimplexParams {
                max_evals: 50,
                ..SimplexParams::default()
            },
        );
        assert!(r.evaluations <= 50 + 4);
    }

    #[test]
    fn rejected_region_is_avoided() {
        let f = |x: &[f64]| {
            if x[0] < 0.0 {
                f64::NAN
            } else {
                (x[0] - 2.0).powi(2)
            }
        };
        let r = nelder_mead(f, &[1.0], SimplexParams::default());
        assert!((r.x[0] - 2.0).abs() < 1e-6);
    }
}

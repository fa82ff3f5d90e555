//! Deterministic log-uniform point streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::EvalPoint;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub n: usize,
    /// Coordinates are drawn with `ln x_i` uniform in `[-L, L]`.
    pub log_range: f64,
    /// Rescale every draw onto `∏ x_i = 1`.
    pub project: bool,
    pub count: usize,
    pub seed: u64,
}

impl SampleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::Domain("n must be at least 1".into()));
        }
        if !(self.log_range.is_finite() && self.log_range > 0.0) {
            return Err(Error::Domain(format!(
                "log range must be positive, got {}",
                self.log_range
            )));
        }
        if self.count == 0 {
            return Err(Error::Domain("count must be at least 1".into()));
        }
        Ok(())
    }
}

/// RNG for stream `stream` of `seed`. Distinct streams never overlap.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Log-coordinates of one draw: on `Σ l = 0` when `project`, otherwise a
/// draw with `Σ l < 0` is replaced by its reciprocal point `−l`, which is
/// feasible, stays inside `[−L, L]` and has the same distribution.
pub fn draw_logs<R: Rng>(rng: &mut R, n: usize, log_range: f64, project: bool) -> Vec<f64> {
    let mut logs: Vec<f64> = (0..n)
        .map(|_| rng.random_range(-log_range..=log_range))
        .collect();
    let total: f64 = logs.iter().sum();
    if project {
        let mean = total / n as f64;
        logs.iter_mut().for_each(|l| *l -= mean);
    } else if total < 0.0 {
        logs.iter_mut().for_each(|l| *l = -*l);
    }
    logs
}

/// Turns drawn logs into a point; projected draws are re-centred in extended
/// precision so their log-product is zero to double-double accuracy.
pub fn point_from_draw(logs: &[f64], project: bool) -> EvalPoint {
    let p = EvalPoint::from_logs(logs).expect("finite non-empty draw");
    if project {
        crate::numerics::project_to_boundary(&p)
    } else {
        p
    }
}

/// Iterator over the points of a [`SampleConfig`].
pub struct SampleStream {
    rng: ChaCha8Rng,
    cfg: SampleConfig,
    emitted: usize,
}

impl Iterator for SampleStream {
    type Item = EvalPoint;

    fn next(&mut self) -> Option<EvalPoint> {
        if self.emitted >= self.cfg.count {
            return None;
        }
        self.emitted += 1;
        let logs = draw_logs(
            &mut self.rng,
            self.cfg.n,
            self.cfg.log_range,
            self.cfg.project,
        );
        Some(point_from_draw(&logs, self.cfg.project))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = self.cfg.count - self.emitted;
        (left, Some(left))
    }
}

pub fn sample_points(cfg: &SampleConfig) -> Result<SampleStream> {
    cfg.validate()?;
    Ok(SampleStream {
        rng: stream_rng(cfg.seed, 0),
        cfg: *cfg,
        emitted: 0,
    })
}

use std::f64::consts::PI;

use rand::Rng;

use super::EmulatedEstimate;
use crate::error::{Error, Result};

/// Median runs used when a routine boosts its own success probability.
pub const DEFAULT_MEDIAN_RUNS: usize = 15;

/// `2π√(a(1−a))/M + π²/M²`.
pub fn amplitude_bound(a: f64, m: usize) -> f64 {
    let m = m as f64;
    2.0 * PI * (a * (1.0 - a)).max(0.0).sqrt() / m + PI * PI / (m * m)
}

/// Smallest power-of-two grid whose worst-case bound `π/M + π²/M²` is at
/// most `eps`.
pub fn grid_size_for(eps: f64) -> usize {
    let mut m = 2usize;
    while PI / m as f64 + PI * PI / (m as f64 * m as f64) > eps {
        m *= 2;
    }
    m
}

/// Outcome law of phase estimation on `a = sin²(πω)` with an `M`-point grid.
/// Outcome `y` has probability `½[F(y − Mω) + F(y + Mω)]` with the Fejér
/// kernel `F(δ) = sin²(πδ) / (M² sin²(πδ/M))`, and reports `sin²(πy/M)`.
#[derive(Debug, Clone)]
pub struct AmplitudeEstimator {
    a: f64,
    m: usize,
    probs: Vec<f64>,
    cdf: Vec<f64>,
}

impl AmplitudeEstimator {
    pub fn new(a: f64, m: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) {
            return Err(Error::invalid(format!("amplitude must lie in [0, 1], got {a}")));
        }
        if m < 2 {
            return Err(Error::invalid("grid size must be >= 2"));
        }
        let mf = m as f64;
        let mut x = mf * a.sqrt().asin() / PI;
        let on_grid = (x - x.round()).abs() < 1e-9;
        if on_grid {
            x = x.round();
        }
        let kernel = |delta: f64| -> f64 {
            if on_grid {
                let r = delta.rem_euclid(mf);
                if r < 0.5 || mf - r < 0.5 {
                    1.0
                } else {
                    0.0
                }
            } else {
                let num = (PI * delta).sin();
                let den = mf * (PI * delta / mf).sin();
                (num * num) / (den * den)
            }
        };
        let probs: Vec<f64> = (0..m)
            .map(|y| 0.5 * (kernel(y as f64 - x) + kernel(y as f64 + x)))
            .collect();
        let mut acc = 0.0;
        let cdf = probs
            .iter()
            .map(|p| {
                acc += p;
                acc
            })
            .collect();
        Ok(Self { a, m, probs, cdf })
    }

    pub fn grid_size(&self) -> usize {
        self.m
    }

    /// `(reported value, probability)` for every grid outcome.
    pub fn outcome_distribution(&self) -> Vec<(f64, f64)> {
        (0..self.m).map(|y| (self.grid_value(y), self.probs[y])).collect()
    }

    fn grid_value(&self, y: usize) -> f64 {
        (PI * y as f64 / self.m as f64).sin().powi(2)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let total = *self.cdf.last().expect("m >= 2");
        let u = rng.random::<f64>() * total;
        let y = self.cdf.partition_point(|&c| c <= u).min(self.m - 1);
        self.grid_value(y)
    }

    pub fn bound(&self) -> f64 {
        amplitude_bound(self.a, self.m)
    }

    pub fn estimate<R: Rng + ?Sized>(&self, rng: &mut R) -> EmulatedEstimate<f64> {
        let value = self.sample(rng);
        EmulatedEstimate {
            value,
            error_budget: self.bound(),
            samples_used: self.m as u64,
            failed: (value - self.a).abs() > self.bound(),
        }
    }
}

/// One amplitude-estimation run.
pub fn amplitude_estimate<R: Rng + ?Sized>(a: f64, m: usize, rng: &mut R) -> Result<EmulatedEstimate<f64>> {
    Ok(AmplitudeEstimator::new(a, m)?.estimate(rng))
}

/// Median of `runs` independent invocations.
pub fn median_boost(runs: usize, mut estimator: impl FnMut() -> f64) -> Result<f64> {
    if runs == 0 || runs % 2 == 0 {
        return Err(Error::invalid(format!("median boosting needs an odd run count, got {runs}")));
    }
    let mut values: Vec<f64> = (0..runs).map(|_| estimator()).collect();
    values.sort_by(f64::total_cmp);
    Ok(values[runs / 2])
}

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::tomography::tomography_l2;
use super::EmulatedEstimate;
use crate::error::{Error, Result};
use crate::linalg::{dist2, dot, norm2};
use crate::noise::truncated_normal;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimsReport {
    pub trials: usize,
    /// Largest `‖x̂ − ŷ‖ / (‖x − y‖ / ‖x‖)` seen; the claim bounds it by `√2`.
    pub angle_max_ratio: f64,
    pub angle_bound: f64,
    /// Largest `‖c̄ − c‖ / (√η (ε_a + ε_b))` seen; the claim bounds it by 1.
    pub norm_direction_max_ratio: f64,
    pub norm_direction_bound: f64,
    pub pass: bool,
}

fn gaussian_vec<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    (0..d).map(|_| StandardNormal.sample(rng)).collect()
}

fn unit(v: &[f64]) -> Vec<f64> {
    let n = norm2(v);
    v.iter().map(|x| x / n).collect()
}

/// Rotate unit `c` towards a random orthogonal direction so that the chord
/// `‖c′ − c‖` equals `chord`.
fn rotate<R: Rng + ?Sized>(c: &[f64], chord: f64, rng: &mut R) -> Vec<f64> {
    let mut z = gaussian_vec(c.len(), rng);
    let proj = dot(&z, c);
    z.iter_mut().zip(c).for_each(|(a, b)| *a -= proj * b);
    let nz = norm2(&z);
    if nz == 0.0 {
        return c.to_vec();
    }
    let phi = 2.0 * (0.5 * chord).min(1.0).asin();
    c.iter().zip(&z).map(|(a, b)| phi.cos() * a + phi.sin() * b / nz).collect()
}

/// Randomized check of the two error-composition inequalities: unit
/// normalization inflates errors by at most `√2/‖x‖` when the angle is
/// below `π/2`, and a norm error `ε_a‖c‖` plus a direction error `ε_b` give
/// `‖c̄ − c‖ ≤ √η (ε_a + ε_b)` for `‖c‖ ≤ √η`.
pub fn compose_error_claims<R: Rng + ?Sized>(trials: usize, eta: f64, rng: &mut R) -> Result<ClaimsReport> {
    if !(eta >= 1.0) {
        return Err(Error::invalid("eta must be >= 1"));
    }
    let mut angle_max: f64 = 0.0;
    let mut nd_max: f64 = 0.0;
    for _ in 0..trials {
        let d = rng.random_range(2..=32);
        let x = gaussian_vec(d, rng);
        let nx = norm2(&x);
        let y = loop {
            let e = unit(&gaussian_vec(d, rng));
            let size = rng.random_range(0.0..2.0) * nx;
            let y: Vec<f64> = x.iter().zip(&e).map(|(a, b)| a + size * b).collect();
            if dot(&x, &y) > 0.0 {
                break y;
            }
        };
        let diff = dist2(&x, &y);
        if diff > 0.0 {
            angle_max = angle_max.max(dist2(&unit(&x), &unit(&y)) / (diff / nx));
        }

        let c_dir = unit(&gaussian_vec(d, rng));
        let c_norm = rng.random_range(0.0..=1.0) * eta.sqrt();
        let eps_a = rng.random_range(0.0..0.5);
        let eps_b = rng.random_range(0.0..0.5);
        let n_bar = c_norm * (1.0 + rng.random_range(-1.0..=1.0) * eps_a);
        let dir_bar = rotate(&c_dir, rng.random_range(0.0..=1.0) * eps_b, rng);
        let c: Vec<f64> = c_dir.iter().map(|v| v * c_norm).collect();
        let c_bar: Vec<f64> = dir_bar.iter().map(|v| v * n_bar).collect();
        let bound = eta.sqrt() * (eps_a + eps_b);
        if bound > 0.0 {
            nd_max = nd_max.max(dist2(&c, &c_bar) / bound);
        }
    }
    let angle_bound = std::f64::consts::SQRT_2;
    Ok(ClaimsReport {
        trials,
        angle_max_ratio: angle_max,
        angle_bound,
        norm_direction_max_ratio: nd_max,
        norm_direction_bound: 1.0,
        pass: angle_max <= angle_bound * (1.0 + 1e-12) && nd_max <= 1.0 + 1e-12,
    })
}

/// Recover a vector from a direction estimate (`ℓ2` tomography at `eps_b`)
/// and a norm estimate with relative error below `eps_a`. The budget is
/// `‖c‖ (ε_a + ε_b)`, which is at most `√η (ε_a + ε_b)` for data-spanned
/// vectors.
pub fn vector_estimate<R: Rng + ?Sized>(
    c: &[f64],
    eps_a: f64,
    eps_b: f64,
    rng: &mut R,
) -> Result<EmulatedEstimate<Vec<f64>>> {
    let norm = norm2(c);
    if norm == 0.0 {
        return Ok(EmulatedEstimate {
            value: c.to_vec(),
            error_budget: 0.0,
            samples_used: 1,
            failed: false,
        });
    }
    let direction = tomography_l2(&unit(c), eps_b, rng)?;
    let norm_bar = norm + truncated_normal(eps_a * norm, 1.0, rng);
    let value: Vec<f64> = direction.value.iter().map(|v| v * norm_bar).collect();
    let budget = norm * (eps_a + eps_b);
    let failed = dist2(&value, c) > budget;
    Ok(EmulatedEstimate {
        value,
        error_budget: budget,
        samples_used: direction.samples_used + 1,
        failed,
    })
}

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use super::EmulatedEstimate;
use crate::error::{Error, Result};
use crate::linalg::{dist2, norm2};

/// Sample-count constant `C` in `N = ⌈C ln d / δ²⌉` and `N = ⌈C d ln d / ε²⌉`.
pub const DEFAULT_TOMOGRAPHY_C: f64 = 36.0;

pub fn linf_sample_count(d: usize, delta: f64, c: f64) -> u64 {
    ((c * (d as f64).ln() / (delta * delta)).ceil() as u64).max(1)
}

pub fn l2_sample_count(d: usize, eps: f64, c: f64) -> u64 {
    ((c * d as f64 * (d as f64).ln() / (eps * eps)).ceil() as u64).max(1)
}

/// Counts of `trials` categorical draws, via conditional binomials.
fn multinomial<R: Rng + ?Sized>(trials: u64, probs: &[f64], rng: &mut R) -> Vec<u64> {
    let mut left = trials;
    let mut mass = 1.0;
    let mut out = Vec::with_capacity(probs.len());
    for (i, &p) in probs.iter().enumerate() {
        if left == 0 || i + 1 == probs.len() {
            out.push(if i + 1 == probs.len() { left } else { 0 });
            left = 0;
            continue;
        }
        let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 0.0 };
        let c = Binomial::new(left, q).expect("q in [0, 1]").sample(rng);
        out.push(c);
        left -= c;
        mass -= p;
    }
    out
}

fn check_input(x: &[f64], tol: f64) -> Result<()> {
    if x.is_empty() {
        return Err(Error::invalid("tomography needs a nonempty vector"));
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::invalid(format!("tomography precision must lie in (0, 1), got {tol}")));
    }
    if (norm2(x) - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("tomography input must be a unit vector"));
    }
    Ok(())
}

/// Two measurement rounds of `n` shots each. Round one samples index `i`
/// with probability `x_i²` and takes `√(count/n)` as the magnitude. Round
/// two measures `½ Σ_i (x_i ± a_i)|i, ±⟩` against the estimated magnitudes
/// `a` and declares `x_i` positive when the `+` outcome for `i` shows up more
/// than `0.4 a_i² n` times.
fn reconstruct<R: Rng + ?Sized>(x: &[f64], n: u64, rng: &mut R) -> Vec<f64> {
    let probs: Vec<f64> = x.iter().map(|v| v * v).collect();
    let counts = multinomial(n, &probs, rng);
    let mags: Vec<f64> = counts.iter().map(|&c| (c as f64 / n as f64).sqrt()).collect();
    let mut interference = Vec::with_capacity(2 * x.len());
    for (xi, ai) in x.iter().zip(&mags) {
        interference.push((xi + ai).powi(2) / 4.0);
        interference.push((xi - ai).powi(2) / 4.0);
    }
    let total: f64 = interference.iter().sum();
    interference.iter_mut().for_each(|p| *p /= total);
    let signs = multinomial(n, &interference, rng);
    let mut out: Vec<f64> = mags
        .iter()
        .enumerate()
        .map(|(i, &a)| {
            if signs[2 * i] as f64 > 0.4 * a * a * n as f64 {
                a
            } else {
                -a
            }
        })
        .collect();
    let norm = norm2(&out);
    out.iter_mut().for_each(|v| *v /= norm);
    out
}

/// `ℓ∞` tomography with `C = 36`.
pub fn tomography_linf<R: Rng + ?Sized>(x: &[f64], delta: f64, rng: &mut R) -> Result<EmulatedEstimate<Vec<f64>>> {
    tomography_linf_with(x, delta, DEFAULT_TOMOGRAPHY_C, rng)
}

pub fn tomography_linf_with<R: Rng + ?Sized>(
    x: &[f64],
    delta: f64,
    c: f64,
    rng: &mut R,
) -> Result<EmulatedEstimate<Vec<f64>>> {
    check_input(x, delta)?;
    let n = linf_sample_count(x.len(), delta, c);
    let value = reconstruct(x, n, rng);
    let err = value.iter().zip(x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(EmulatedEstimate {
        value,
        error_budget: delta,
        samples_used: 2 * n,
        failed: err > delta,
    })
}

/// `ℓ2` tomography with `C = 36`.
pub fn tomography_l2<R: Rng + ?Sized>(x: &[f64], eps: f64, rng: &mut R) -> Result<EmulatedEstimate<Vec<f64>>> {
    tomography_l2_with(x, eps, DEFAULT_TOMOGRAPHY_C, rng)
}

pub fn tomography_l2_with<R: Rng + ?Sized>(
    x: &[f64],
    eps: f64,
    c: f64,
    rng: &mut R,
) -> Result<EmulatedEstimate<Vec<f64>>> {
    check_input(x, eps)?;
    let n = l2_sample_count(x.len(), eps, c);
    let value = reconstruct(x, n, rng);
    let err = dist2(&value, x);
    Ok(EmulatedEstimate {
        value,
        error_budget: eps,
        samples_used: 2 * n,
        failed: err > eps,
    })
}

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{is_symmetric, sym_eigen};

/// `log det Σ` from a symmetric eigendecomposition.
pub fn logdet_exact(sigma: &DMatrix<f64>) -> Result<f64> {
    if !sigma.is_square() || !is_symmetric(sigma, 1e-9) {
        return Err(Error::NotPositiveDefinite);
    }
    let (values, _) = sym_eigen(sigma);
    if values.iter().any(|v| !(*v > 0.0)) {
        return Err(Error::NotPositiveDefinite);
    }
    Ok(values.iter().map(|v| v.ln()).sum())
}

/// Tuning of the stochastic Chebyshev estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LogDetConfig {
    /// Power-iteration steps for the `λ_max` estimate.
    pub power_iters: usize,
    /// `c = safety · λ_max`.
    pub safety: f64,
    /// Steps of shifted power iteration for the `λ_min` estimate.
    pub min_iters: usize,
    /// The interval's lower end is `min_margin · λ_min / c`.
    pub min_margin: f64,
    /// `p = ⌈probe_constant · ln(2/δ) / ε²⌉`.
    pub probe_constant: f64,
    /// Cap on the probe count of either phase.
    pub max_probes: usize,
    /// `m = ⌈degree_constant · √κ · ln(1/ε_poly)⌉`.
    pub degree_constant: f64,
    /// Probes processed together as one `d × block` matrix.
    pub block: usize,
}

impl Default for LogDetConfig {
    fn default() -> Self {
        Self {
            power_iters: 20,
            safety: 1.1,
            min_iters: 100,
            min_margin: 0.5,
            probe_constant: 14.0,
            max_probes: 2048,
            degree_constant: 1.0,
            block: 64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogDetEstimate {
    pub value: f64,
    /// Phase-one estimate of `log det(Σ/c)` at relative precision ¼.
    pub coarse: f64,
    pub scale: f64,
    pub lambda_min_estimate: f64,
    pub degree: usize,
    pub probes_coarse: usize,
    pub probes_fine: usize,
}

/// Estimate `log det Σ` to absolute error `eps` with probability `1 − δ`.
pub fn logdet_chebyshev<R: Rng + ?Sized>(sigma: &DMatrix<f64>, eps: f64, delta: f64, rng: &mut R) -> Result<f64> {
    Ok(logdet_chebyshev_with(sigma, eps, delta, &LogDetConfig::default(), rng)?.value)
}

fn random_unit<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DVector<f64> {
    let v: DVector<f64> = DVector::from_fn(d, |_, _| StandardNormal.sample(rng));
    let n = v.norm();
    if n == 0.0 {
        DVector::from_element(d, 1.0 / (d as f64).sqrt())
    } else {
        v / n
    }
}

/// Rayleigh quotient after `iters` power steps on `m`.
fn power_iteration<R: Rng + ?Sized>(m: &DMatrix<f64>, iters: usize, rng: &mut R) -> f64 {
    let mut x = random_unit(m.nrows(), rng);
    let mut rq = 0.0;
    for _ in 0..iters {
        let y = m * &x;
        rq = x.dot(&y);
        let n = y.norm();
        if n == 0.0 {
            return 0.0;
        }
        x = y / n;
    }
    rq.max(x.dot(&(m * &x)))
}

/// Chebyshev interpolation coefficients of `log` on `[a, b]`, degree `m`.
fn chebyshev_log_coefficients(a: f64, b: f64, m: usize) -> Vec<f64> {
    let nodes = m + 1;
    let f: Vec<f64> = (0..nodes)
        .map(|k| {
            let x = (PI * (k as f64 + 0.5) / nodes as f64).cos();
            (0.5 * ((b - a) * x + b + a)).ln()
        })
        .collect();
    (0..=m)
        .map(|j| {
            let s: f64 = (0..nodes)
                .map(|k| f[k] * (PI * j as f64 * (k as f64 + 0.5) / nodes as f64).cos())
                .sum();
            let c = 2.0 * s / nodes as f64;
            if j == 0 {
                0.5 * c
            } else {
                c
            }
        })
        .collect()
}

/// Hutchinson estimate of `tr p(B)` with Rademacher probes, where `p` is the
/// Chebyshev series with coefficients `coef` on `[a, b]`.
fn hutchinson<R: Rng + ?Sized>(b_mat: &DMatrix<f64>, a: f64, b: f64, coef: &[f64], probes: usize, block: usize, rng: &mut R) -> f64 {
    let d = b_mat.nrows();
    // B̃ = (2B − (a+b)I)/(b−a) maps the spectrum into [−1, 1]
    let mut bt = b_mat * (2.0 / (b - a));
    for i in 0..d {
        bt[(i, i)] -= (a + b) / (b - a);
    }
    let mut total = 0.0;
    let mut done = 0;
    while done < probes {
        let cols = block.min(probes - done);
        let z = DMatrix::from_fn(d, cols, |_, _| if rng.random::<bool>() { 1.0 } else { -1.0 });
        let mut w_prev = z.clone();
        let mut acc = &z * coef[0];
        if coef.len() > 1 {
            let mut w = &bt * &z;
            acc += &w * coef[1];
            for &c in &coef[2..] {
                let next = (&bt * &w) * 2.0 - &w_prev;
                acc += &next * c;
                w_prev = w;
                w = next;
            }
        }
        total += z.dot(&acc);
        done += cols;
    }
    total / probes as f64
}

fn probe_count(cfg: &LogDetConfig, eps: f64, delta: f64) -> usize {
    let p = (cfg.probe_constant * (2.0 / delta).ln() / (eps * eps)).ceil();
    (p as usize).clamp(1, cfg.max_probes.max(1))
}

/// Stochastic Chebyshev estimator with the two-phase precision schedule:
/// rescale by `c = 1.1 λ_max`, estimate `log det(Σ/c)` once at relative
/// precision ¼ to get `γ̂`, then again at `ε′ = ε / (4|γ̂|)`, and add `d log c`.
pub fn logdet_chebyshev_with<R: Rng + ?Sized>(
    sigma: &DMatrix<f64>,
    eps: f64,
    delta: f64,
    cfg: &LogDetConfig,
    rng: &mut R,
) -> Result<LogDetEstimate> {
    if !(eps > 0.0 && eps < 1.0 && delta > 0.0 && delta < 1.0) {
        return Err(Error::invalid("eps and delta must lie in (0, 1)"));
    }
    if !sigma.is_square() || sigma.is_empty() || !is_symmetric(sigma, 1e-9) {
        return Err(Error::NotPositiveDefinite);
    }
    let d = sigma.nrows();
    let lambda_max = power_iteration(sigma, cfg.power_iters, rng);
    if !(lambda_max > 0.0) {
        return Err(Error::NotPositiveDefinite);
    }
    let c = cfg.safety * lambda_max;
    // λ_max(cI − Σ) = c − λ_min
    let mut shifted = -sigma.clone();
    for i in 0..d {
        shifted[(i, i)] += c;
    }
    let lambda_min = c - power_iteration(&shifted, cfg.min_iters, rng);
    let tol = 1e-12 * lambda_max;
    if lambda_min < -tol {
        return Err(Error::NotPositiveDefinite);
    }
    if lambda_min <= tol {
        return Err(Error::SingularWithinTolerance);
    }
    if sigma.clone().cholesky().is_none() {
        return Err(Error::NotPositiveDefinite);
    }
    let scaled = sigma / c;
    let lo = (cfg.min_margin * lambda_min / c).min(0.5);
    let hi = 1.0;
    let kappa = hi / lo;
    let eps_poly = eps / (2.0 * d as f64);
    let degree = ((cfg.degree_constant * kappa.sqrt() * (1.0 / eps_poly).ln()).ceil() as usize).max(1);
    let coef = chebyshev_log_coefficients(lo, hi, degree);

    let probes_coarse = probe_count(cfg, 0.25, delta);
    let coarse = hutchinson(&scaled, lo, hi, &coef, probes_coarse, cfg.block, rng);
    let eps_fine = (eps / (4.0 * coarse.abs().max(eps))).min(0.25);
    let probes_fine = probe_count(cfg, eps_fine, delta);
    let fine = hutchinson(&scaled, lo, hi, &coef, probes_fine, cfg.block, rng);
    Ok(LogDetEstimate {
        value: fine + d as f64 * c.ln(),
        coarse,
        scale: c,
        lambda_min_estimate: lambda_min,
        degree,
        probes_coarse,
        probes_fine,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn exact_examples() {
        assert_eq!(logdet_exact(&DMatrix::identity(4, 4)).unwrap(), 0.0);
        let m = DMatrix::from_diagonal_element(2, 2, 0.5);
        assert!((logdet_exact(&m).unwrap() + 1.386294).abs() < 1e-6);
        assert!(logdet_exact(&DMatrix::from_diagonal_element(2, 2, -1.0)).is_err());
    }

    #[test]
    fn scaled_identity_is_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = DMatrix::from_diagonal_element(10, 10, 3.0);
        let est = logdet_chebyshev(&m, 0.1, 0.1, &mut rng).unwrap();
        assert!((est - 10.0 * 3f64.ln()).abs() < 0.1);
    }

    #[test]
    fn singular_matrix_is_reported() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.0]));
        assert_eq!(logdet_chebyshev(&m, 0.1, 0.1, &mut rng), Err(Error::SingularWithinTolerance));
    }

    #[test]
    fn chebyshev_series_approximates_log() {
        let coef = chebyshev_log_coefficients(0.05, 1.0, 40);
        for &x in &[0.06, 0.3, 0.9] {
            let t = (2.0 * x - 1.05) / 0.95;
            let (mut t0, mut t1) = (1.0, t);
            let mut s = coef[0] + coef[1] * t;
            for &c in &coef[2..] {
                let t2 = 2.0 * t * t1 - t0;
                s += c * t2;
                t0 = t1;
                t1 = t2;
            }
            assert!((s - f64::ln(x)).abs() < 1e-6);
        }
    }
}

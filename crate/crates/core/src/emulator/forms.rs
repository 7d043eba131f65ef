use std::f64::consts::PI;

use nalgebra::DVector;
use rand::Rng;

use super::amplitude::{grid_size_for, median_boost, AmplitudeEstimator, DEFAULT_MEDIAN_RUNS};
use super::EmulatedEstimate;
use crate::error::{Error, Result};
use crate::gmm::{
    gaussian_log_pdf, log_weighted_densities, responsibilities_from_log, softmax, Covariance, Dataset, GmmParams,
};
use crate::linalg::{dot, norm2};

/// Estimate `uᵀ A w` with `A = Σ` or `A = Σ⁻¹` to absolute error
/// `eps ‖u‖ ‖w‖`, where `‖Σ‖₂ ≤ 1`.
///
/// The normalized value `s′ = uᵀAw · λ / (‖u‖‖w‖)` lies in `[−1, 1]`, with
/// `λ = λ_min(Σ)` for the inverse and `1` otherwise. It is read out by
/// amplitude estimation of the interference probability `p = (1 + s′)/2`,
/// boosted by a median of 15 runs. The grid size, and therefore the sample
/// count, grows like `1 / (eps λ)`, which carries the condition number for
/// the inverse.
pub fn bilinear_form_estimate<R: Rng + ?Sized>(
    u: &[f64],
    w: &[f64],
    sigma: &Covariance,
    inverse: bool,
    eps: f64,
    rng: &mut R,
) -> Result<EmulatedEstimate<f64>> {
    let d = sigma.dim();
    if u.len() != d || w.len() != d {
        return Err(Error::DimensionMismatch {
            context: "bilinear form",
            expected: d,
            found: if u.len() != d { u.len() } else { w.len() },
        });
    }
    if !(eps > 0.0) {
        return Err(Error::invalid("form precision must be positive"));
    }
    let eigen = sigma.eigenvalues();
    if eigen.max() > 1.0 + 1e-12 {
        return Err(Error::invalid("form estimation needs a covariance with spectral norm <= 1"));
    }
    let (nu, nw) = (norm2(u), norm2(w));
    if nu == 0.0 || nw == 0.0 {
        return Ok(EmulatedEstimate {
            value: 0.0,
            error_budget: 0.0,
            samples_used: 1,
            failed: false,
        });
    }
    let aw: DVector<f64> = if inverse {
        sigma.solve(w)
    } else {
        sigma.to_dense() * DVector::from_column_slice(w)
    };
    let truth = dot(u, aw.as_slice());
    let lambda = if inverse { eigen.min() } else { 1.0 };
    let s = (truth * lambda / (nu * nw)).clamp(-1.0, 1.0);
    let p = (0.5 * (1.0 + s)).clamp(0.0, 1.0);
    let m = grid_size_for(0.5 * eps * lambda);
    let est = AmplitudeEstimator::new(p, m)?;
    let p_hat = median_boost(DEFAULT_MEDIAN_RUNS, || est.sample(rng))?;
    let value = (2.0 * p_hat - 1.0) * nu * nw / lambda;
    let budget = eps * nu * nw;
    Ok(EmulatedEstimate {
        value,
        error_budget: budget,
        samples_used: (m * DEFAULT_MEDIAN_RUNS) as u64,
        failed: (value - truth).abs() > budget,
    })
}

/// `vᵀ Σ^{±1} v` to absolute error `eps ‖v‖²`.
pub fn quadratic_form_estimate<R: Rng + ?Sized>(
    v: &[f64],
    sigma: &Covariance,
    inverse: bool,
    eps: f64,
    rng: &mut R,
) -> Result<EmulatedEstimate<f64>> {
    bilinear_form_estimate(v, v, sigma, inverse, eps, rng)
}

/// Estimate the Gaussian log-density exponent
/// `−½((v−μ)ᵀΣ⁻¹(v−μ) + d log 2π + log det Σ)` from the three terms
/// `vᵀΣ⁻¹v`, `vᵀΣ⁻¹μ` and `μᵀΣ⁻¹μ`, each to absolute error `ε₁/4`, and a
/// caller-supplied log-determinant estimate. `Σ` is rescaled to unit
/// spectral norm first. The reported budget `2ε₁` holds whenever the
/// log-determinant estimate is within `ε₁`.
pub fn gaussian_exponent_estimate<R: Rng + ?Sized>(
    v: &[f64],
    mu: &[f64],
    sigma: &Covariance,
    log_det_est: f64,
    eps1: f64,
    rng: &mut R,
) -> Result<EmulatedEstimate<f64>> {
    if !(eps1 > 0.0) {
        return Err(Error::invalid("exponent precision must be positive"));
    }
    let truth = gaussian_log_pdf(v, mu, sigma, sigma.log_det())?;
    let c = sigma.spectral_norm().max(1.0);
    let scaled = if c > 1.0 { sigma.scaled(1.0 / c)? } else { sigma.clone() };
    let target = eps1 / 4.0;
    let mut samples = 0;
    let mut term = |a: &[f64], b: &[f64], rng: &mut R| -> Result<f64> {
        let (na, nb) = (norm2(a), norm2(b));
        if na == 0.0 || nb == 0.0 {
            return Ok(0.0);
        }
        // an error of target·c on the rescaled form is target on the original
        let est = bilinear_form_estimate(a, b, &scaled, true, target * c / (na * nb), rng)?;
        samples += est.samples_used;
        Ok(est.value / c)
    };
    let q_vv = term(v, v, rng)?;
    let q_vm = term(v, mu, rng)?;
    let q_mm = term(mu, mu, rng)?;
    let d = v.len() as f64;
    let value = -0.5 * (q_vv - 2.0 * q_vm + q_mm + d * (2.0 * PI).ln() + log_det_est);
    Ok(EmulatedEstimate {
        value,
        error_budget: 2.0 * eps1,
        samples_used: samples.max(1),
        failed: (value - truth).abs() > 2.0 * eps1,
    })
}

/// Estimate the responsibility vector of one sample to per-entry error
/// `ε₁`. Each exponent is estimated at precision `ε₁/√(2k)` with the exact
/// cached log-determinants; the softmax is applied after the noise, so the
/// output is always a probability vector. `eps1 = 0` is the exact path and
/// reproduces the noise-free computation bit for bit.
pub fn responsibility_estimate<R: Rng + ?Sized>(
    v: &[f64],
    params: &GmmParams,
    eps1: f64,
    rng: &mut R,
) -> Result<EmulatedEstimate<Vec<f64>>> {
    if !(eps1 >= 0.0) {
        return Err(Error::invalid("responsibility precision must be nonnegative"));
    }
    let row = Dataset::new(1, v.len(), v.to_vec())?;
    let exact_log = log_weighted_densities(&row, params)?;
    let truth = responsibilities_from_log(1, params.k(), exact_log)?;
    let truth = truth.row(0);
    if eps1 == 0.0 {
        return Ok(EmulatedEstimate {
            value: truth.to_vec(),
            error_budget: 0.0,
            samples_used: 1,
            failed: false,
        });
    }
    let k = params.k();
    let precision = eps1 / (2.0 * k as f64).sqrt();
    let mut samples = 0;
    let mut logits = Vec::with_capacity(k);
    for j in 0..k {
        let theta = params.theta()[j];
        if theta == 0.0 {
            logits.push(f64::NEG_INFINITY);
            continue;
        }
        let cov = &params.covariances()[j];
        let est = gaussian_exponent_estimate(v, params.means()[j].as_slice(), cov, cov.log_det(), precision, rng)?;
        samples += est.samples_used;
        logits.push(theta.ln() + est.value);
    }
    let value = softmax(&logits).ok_or(Error::DegenerateResponsibilityRow(0))?;
    let err = value.iter().zip(truth).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    Ok(EmulatedEstimate {
        value,
        error_budget: eps1,
        samples_used: samples.max(1),
        failed: err > eps1,
    })
}

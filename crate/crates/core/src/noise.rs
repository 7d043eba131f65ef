//! Bounded perturbation of mixture parameters, emulating the estimation error
//! of the quantum EM subroutines.
//!
//! Every coordinate receives a truncated-normal draw on an interval whose
//! half-width makes the vector-level bounds hold by construction:
//! `‖θ̄ − θ‖ ≤ δ_θ`, `‖μ̄_j − μ_j‖ ≤ δ_μ` and `‖Σ̄_j − Σ_j‖_F ≤ δ_μ√η`.
//! Covariances are perturbed in their eigenbasis and then floored at
//! `sigma_floor` (and at `λ_max / κ_τ` when a condition cap is set).

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gmm::{Covariance, CovarianceKind, GmmParams};

/// Singular-value floor used when none is configured.
pub const DEFAULT_SIGMA_FLOOR: f64 = 0.07;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseSpec {
    #[serde(default)]
    pub delta_theta: f64,
    #[serde(default)]
    pub delta_mu: f64,
    #[serde(default = "default_sigma_floor")]
    pub sigma_floor: f64,
    #[serde(default)]
    pub kappa_cap: Option<f64>,
    #[serde(default = "default_trunc_sigma")]
    pub trunc_sigma: f64,
    /// Seed for the noise stream; the fit seed is used when absent.
    #[serde(default)]
    pub seed: Option<u64>,
}

fn default_sigma_floor() -> f64 {
    DEFAULT_SIGMA_FLOOR
}

fn default_trunc_sigma() -> f64 {
    1.0
}

impl Default for NoiseSpec {
    fn default() -> Self {
        Self {
            delta_theta: 0.0,
            delta_mu: 0.0,
            sigma_floor: DEFAULT_SIGMA_FLOOR,
            kappa_cap: None,
            trunc_sigma: 1.0,
            seed: None,
        }
    }
}

impl NoiseSpec {
    pub fn new(delta_theta: f64, delta_mu: f64) -> Self {
        Self {
            delta_theta,
            delta_mu,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite_nonneg = |v: f64| v.is_finite() && v >= 0.0;
        if !finite_nonneg(self.delta_theta) || !finite_nonneg(self.delta_mu) {
            return Err(Error::invalid("noise deltas must be finite and nonnegative"));
        }
        if !(self.sigma_floor > 0.0 && self.sigma_floor.is_finite()) {
            return Err(Error::invalid("sigma_floor must be positive"));
        }
        if !(self.trunc_sigma > 0.0 && self.trunc_sigma.is_finite()) {
            return Err(Error::invalid("trunc_sigma must be positive"));
        }
        if let Some(cap) = self.kappa_cap {
            if !(cap > 1.0) {
                return Err(Error::invalid("kappa_cap must exceed 1"));
            }
        }
        Ok(())
    }

    /// Frobenius bound on each covariance perturbation, `δ_μ √η`.
    pub fn covariance_bound(&self, eta: f64) -> f64 {
        self.delta_mu * eta.sqrt()
    }
}

/// Draw from `N(0, sigma²)` conditioned on `(−half, half)`. Zero width
/// returns exactly zero without touching the generator.
pub fn truncated_normal<R: Rng + ?Sized>(half: f64, sigma: f64, rng: &mut R) -> f64 {
    if half <= 0.0 {
        return 0.0;
    }
    if half <= sigma {
        // uniform proposal; acceptance is at least e^{-1/2}
        loop {
            let x = rng.random_range(-half..half);
            if rng.random::<f64>() < (-0.5 * (x / sigma).powi(2)).exp() {
                return x;
            }
        }
    }
    // normal proposal; acceptance is at least P(|Z| < 1)
    loop {
        let z: f64 = StandardNormal.sample(rng);
        let x = sigma * z;
        if x.abs() < half {
            return x;
        }
    }
}

/// Perturbed weights after clamping and renormalization, together with the
/// clamped vector before renormalization.
pub fn perturb_theta<R: Rng + ?Sized>(theta: &[f64], spec: &NoiseSpec, rng: &mut R) -> Result<(Vec<f64>, Vec<f64>)> {
    if spec.delta_theta == 0.0 {
        return Ok((theta.to_vec(), theta.to_vec()));
    }
    let half = spec.delta_theta / (theta.len() as f64).sqrt();
    let raw: Vec<f64> = theta
        .iter()
        .map(|t| (t + truncated_normal(half, spec.trunc_sigma, rng)).max(0.0))
        .collect();
    let total: f64 = raw.iter().sum();
    if !(total > 0.0) {
        return Err(Error::NoiseDestroysSimplex);
    }
    Ok((raw.iter().map(|t| t / total).collect(), raw))
}

pub fn perturb_means<R: Rng + ?Sized>(means: &[DVector<f64>], spec: &NoiseSpec, rng: &mut R) -> Vec<DVector<f64>> {
    if spec.delta_mu == 0.0 {
        return means.to_vec();
    }
    means
        .iter()
        .map(|m| {
            let half = spec.delta_mu / (m.len() as f64).sqrt();
            m.map(|x| x + truncated_normal(half, spec.trunc_sigma, rng))
        })
        .collect()
}

fn spectral_floor(spec: &NoiseSpec, lambda_max: f64) -> f64 {
    match spec.kappa_cap {
        Some(cap) => spec.sigma_floor.max(lambda_max / cap),
        None => spec.sigma_floor,
    }
}

/// Floor eigenvalues at `sigma_floor` and, with a cap, at `λ_max / κ_τ`.
pub fn threshold(cov: &Covariance, spec: &NoiseSpec) -> Result<Covariance> {
    let floor = spectral_floor(spec, cov.spectral_norm());
    cov.map_spectrum(|_, v| v.max(floor))
}

fn perturb_one<R: Rng + ?Sized>(cov: &Covariance, half: f64, spec: &NoiseSpec, rng: &mut R) -> Result<Covariance> {
    if half == 0.0 {
        return Ok(cov.clone());
    }
    let noisy: Vec<f64> = {
        let values = match cov.shape() {
            crate::gmm::CovarianceShape::Diagonal => cov.variances(),
            crate::gmm::CovarianceShape::Dense => cov.eigenvalues(),
            crate::gmm::CovarianceShape::Spherical => DVector::from_element(1, cov.variances()[0]),
        };
        values.iter().map(|v| v + truncated_normal(half, spec.trunc_sigma, rng)).collect()
    };
    let lambda_max = noisy.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let floor = spectral_floor(spec, lambda_max);
    cov.map_spectrum(|i, _| noisy[i].max(floor))
}

/// Thresholded references and their perturbations. Tied covariances are
/// perturbed once and shared; soft k-means covariances are fixed by
/// definition and left alone.
pub fn perturb_covariances<R: Rng + ?Sized>(
    covs: &[Covariance],
    kind: CovarianceKind,
    eta: f64,
    spec: &NoiseSpec,
    rng: &mut R,
) -> Result<(Vec<Covariance>, Vec<Covariance>)> {
    if let CovarianceKind::SoftKMeans { .. } = kind {
        return Ok((covs.to_vec(), covs.to_vec()));
    }
    let d = covs[0].dim() as f64;
    let half = spec.covariance_bound(eta) / d.sqrt();
    let reference: Vec<Covariance> = covs.iter().map(|c| threshold(c, spec)).collect::<Result<_>>()?;
    let noisy = if kind == CovarianceKind::Tied {
        vec![perturb_one(&reference[0], half, spec, rng)?; covs.len()]
    } else {
        reference
            .iter()
            .map(|c| perturb_one(c, half, spec, rng))
            .collect::<Result<_>>()?
    };
    Ok((reference, noisy))
}

/// Output of [`apply`].
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub params: GmmParams,
    /// Weights after clamping, before renormalization.
    pub raw_theta: Vec<f64>,
    /// Input with thresholded covariances: the point the bounds are
    /// measured from.
    pub reference: GmmParams,
}

/// Perturb weights, means and covariances in that order from one stream.
pub fn apply<R: Rng + ?Sized>(params: &GmmParams, spec: &NoiseSpec, eta: f64, rng: &mut R) -> Result<Perturbation> {
    spec.validate()?;
    if !(eta >= 1.0 && eta.is_finite()) {
        return Err(Error::invalid(format!("eta must be >= 1, got {eta}")));
    }
    let (theta, raw_theta) = perturb_theta(params.theta(), spec, rng)?;
    let means = perturb_means(params.means(), spec, rng);
    let (ref_covs, covs) = perturb_covariances(params.covariances(), params.kind(), eta, spec, rng)?;
    let reference = GmmParams::new(params.kind(), params.theta().to_vec(), params.means().to_vec(), ref_covs)?;
    let out = if spec.delta_theta == 0.0 {
        GmmParams::new(params.kind(), theta, means, covs)?
    } else {
        GmmParams::with_normalized_theta(params.kind(), theta, means, covs)?
    };
    debug_assert!(
        verify_bounds(&reference, &out, Some(&raw_theta), spec, eta)
            .map(|r| r.pass)
            .unwrap_or(false),
        "noise channel broke its own bounds"
    );
    Ok(Perturbation {
        params: out,
        raw_theta,
        reference,
    })
}

/// Measured distances against the three bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    /// `‖θ̄ − θ‖₂` after renormalization.
    pub theta_dist: f64,
    /// `‖θ̄ − θ‖₂` before renormalization, when known.
    pub theta_dist_raw: Option<f64>,
    pub mean_dist_max: f64,
    pub cov_dist_max: f64,
    pub theta_bound: f64,
    pub mean_bound: f64,
    pub cov_bound: f64,
    pub pass: bool,
}

fn within(value: f64, bound: f64) -> bool {
    value <= bound * (1.0 + 1e-9) + 1e-12
}

/// Check the bounds between `before` and `after`. The weight bound uses the
/// pre-renormalization vector when `raw_theta` is given.
pub fn verify_bounds(
    before: &GmmParams,
    after: &GmmParams,
    raw_theta: Option<&[f64]>,
    spec: &NoiseSpec,
    eta: f64,
) -> Result<BoundsReport> {
    if before.k() != after.k() || before.d() != after.d() {
        return Err(Error::DimensionMismatch {
            context: "verify_bounds",
            expected: before.k() * before.d(),
            found: after.k() * after.d(),
        });
    }
    let l2 = |a: &[f64], b: &[f64]| crate::linalg::dist2(a, b);
    let theta_dist = l2(before.theta(), after.theta());
    let theta_dist_raw = match raw_theta {
        Some(raw) if raw.len() != before.k() => {
            return Err(Error::DimensionMismatch {
                context: "raw weights",
                expected: before.k(),
                found: raw.len(),
            })
        }
        Some(raw) => Some(l2(before.theta(), raw)),
        None => None,
    };
    let mean_dist_max = before
        .means()
        .iter()
        .zip(after.means())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    let cov_dist_max = before
        .covariances()
        .iter()
        .zip(after.covariances())
        .map(|(a, b)| a.frobenius_distance(b))
        .fold(0.0, f64::max);
    let theta_bound = spec.delta_theta;
    let mean_bound = spec.delta_mu;
    let cov_bound = spec.covariance_bound(eta);
    let pass = within(theta_dist_raw.unwrap_or(theta_dist), theta_bound)
        && within(mean_dist_max, mean_bound)
        && within(cov_dist_max, cov_bound);
    Ok(BoundsReport {
        theta_dist,
        theta_dist_raw,
        mean_dist_max,
        cov_dist_max,
        theta_bound,
        mean_bound,
        cov_bound,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn truncated_normal_stays_inside() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for half in [0.01, 0.5, 3.0] {
            for _ in 0..2000 {
                assert!(truncated_normal(half, 1.0, &mut rng).abs() < half);
            }
        }
    }

    #[test]
    fn single_weight_stays_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spec = NoiseSpec::new(0.3, 0.0);
        for _ in 0..100 {
            assert_eq!(perturb_theta(&[1.0], &spec, &mut rng).unwrap().0, vec![1.0]);
        }
    }

    #[test]
    fn threshold_only_floors_small_eigenvalue() {
        let c = Covariance::diagonal(DVector::from_vec(vec![1.0, 0.05])).unwrap();
        let t = threshold(&c, &NoiseSpec::default()).unwrap();
        assert_eq!(t.variances().as_slice(), &[1.0, 0.07]);
    }

    #[test]
    fn kappa_cap_raises_floor() {
        let c = Covariance::diagonal(DVector::from_vec(vec![10.0, 0.5])).unwrap();
        let spec = NoiseSpec {
            kappa_cap: Some(4.0),
            ..NoiseSpec::default()
        };
        assert_eq!(threshold(&c, &spec).unwrap().variances().as_slice(), &[10.0, 2.5]);
    }

    #[test]
    fn invalid_spec_is_rejected() {
        assert!(NoiseSpec::new(-1.0, 0.0).validate().is_err());
        let spec = NoiseSpec {
            kappa_cap: Some(1.0),
            ..NoiseSpec::default()
        };
        assert!(spec.validate().is_err());
    }
}

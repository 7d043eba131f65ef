//! Monte-Carlo suites that check each randomized routine against its error
//! contract. Every suite is a pure function of its configuration and seed.

use std::f64::consts::{PI, SQRT_2};

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::emulator::{
    median_boost, quadratic_form_estimate, responsibility_estimate, tomography_l2, tomography_linf,
    AmplitudeEstimator, DEFAULT_MEDIAN_RUNS,
};
use crate::error::{Error, Result};
use crate::gmm::{softmax, Covariance, CovarianceKind, GmmParams};
use crate::linalg::dist2;
use crate::noise::{self, NoiseSpec, DEFAULT_SIGMA_FLOOR};
use crate::profiler::{logdet_chebyshev, logdet_exact};
use crate::synth::random_orthogonal;

/// Names accepted by [`SuiteConfig::default_for`].
pub const SUITE_NAMES: [&str; 7] = [
    "lipschitz",
    "responsibility-error",
    "tomography",
    "amplitude",
    "quadratic-form",
    "noise-bounds",
    "logdet",
];

/// One parameter setting within a suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseReport {
    pub label: String,
    pub trials: usize,
    pub max_observed: f64,
    pub bound: f64,
    /// Fraction of trials within the bound.
    pub pass_fraction: f64,
    pub required_fraction: f64,
    pub pass: bool,
}

impl CaseReport {
    fn new(label: String, trials: usize, max_observed: f64, bound: f64, hits: usize, required: f64) -> Self {
        let pass_fraction = if trials == 0 { 1.0 } else { hits as f64 / trials as f64 };
        Self {
            label,
            trials,
            max_observed,
            bound,
            pass_fraction,
            required_fraction: required,
            pass: pass_fraction >= required,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub suite: String,
    pub seed: u64,
    pub trials: usize,
    pub pass: bool,
    pub cases: Vec<CaseReport>,
}

impl SuiteReport {
    fn new(suite: &str, seed: u64, cases: Vec<CaseReport>) -> Self {
        Self {
            suite: suite.to_string(),
            seed,
            trials: cases.iter().map(|c| c.trials).sum(),
            pass: cases.iter().all(|c| c.pass),
            cases,
        }
    }
}

/// Case generator seeded from the suite seed and the case index.
fn case_rng(seed: u64, case: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(case as u64);
    rng
}

fn gaussian_vec<R: Rng + ?Sized>(d: usize, scale: f64, rng: &mut R) -> Vec<f64> {
    (0..d)
        .map(|_| scale * Distribution::<f64>::sample(&StandardNormal, rng))
        .collect()
}

fn unit_vec<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let v = gaussian_vec(d, 1.0, rng);
        let n = crate::linalg::norm2(&v);
        if n > 0.0 {
            return v.into_iter().map(|x| x / n).collect();
        }
    }
}

/// Absolute slack for comparing an observed error against a bound that
/// can be met with equality.
fn within(observed: f64, bound: f64) -> bool {
    observed <= bound * (1.0 + 1e-12) + 1e-15
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LipschitzConfig {
    pub trials: usize,
    /// Length of the softmax input.
    pub dims: Vec<usize>,
    /// Standard deviation of the random inputs.
    pub scale: f64,
}

impl Default for LipschitzConfig {
    fn default() -> Self {
        Self {
            trials: 10_000,
            dims: vec![2, 8, 32],
            scale: 3.0,
        }
    }
}

fn run_lipschitz(cfg: &LipschitzConfig, seed: u64) -> Result<SuiteReport> {
    if cfg.dims.iter().any(|d| *d < 2) {
        return Err(Error::invalid("softmax dimensions must be >= 2"));
    }
    let cases = cfg
        .dims
        .par_iter()
        .enumerate()
        .map(|(c, &k)| {
            let mut rng = case_rng(seed, c);
            let mut worst: f64 = 0.0;
            let mut hits = 0;
            for t in 0..cfg.trials {
                let x = gaussian_vec(k, cfg.scale, &mut rng);
                // alternate far pairs with nearby ones, where the local
                // slope is probed
                let step = if t % 2 == 0 { cfg.scale } else { 1e-3 };
                let y: Vec<f64> = x.iter().zip(gaussian_vec(k, step, &mut rng)).map(|(a, b)| a + b).collect();
                let dx = dist2(&x, &y);
                if dx == 0.0 {
                    hits += 1;
                    continue;
                }
                let (sx, sy) = (softmax(&x).expect("finite"), softmax(&y).expect("finite"));
                let ratio = dist2(&sx, &sy) / dx;
                worst = worst.max(ratio);
                hits += usize::from(within(ratio, SQRT_2));
            }
            CaseReport::new(format!("k={k}"), cfg.trials, worst, SQRT_2, hits, 1.0)
        })
        .collect();
    Ok(SuiteReport::new("lipschitz", seed, cases))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResponsibilityConfig {
    pub trials: usize,
    pub eps: Vec<f64>,
    pub ks: Vec<usize>,
    /// Standard deviation of the random exponents.
    pub scale: f64,
    /// Trials of the full emulated responsibility routine; 0 skips it.
    pub emulator_trials: usize,
    pub emulator_k: usize,
    pub emulator_d: usize,
    pub emulator_eps: f64,
}

impl Default for ResponsibilityConfig {
    fn default() -> Self {
        Self {
            trials: 10_000,
            eps: vec![1e-3, 1e-2],
            ks: vec![2, 8, 32],
            scale: 2.0,
            emulator_trials: 50,
            emulator_k: 3,
            emulator_d: 4,
            emulator_eps: 0.05,
        }
    }
}

fn run_responsibility(cfg: &ResponsibilityConfig, seed: u64) -> Result<SuiteReport> {
    if cfg.eps.iter().any(|e| !(*e > 0.0)) || cfg.ks.iter().any(|k| *k == 0) {
        return Err(Error::invalid("responsibility suite needs positive eps and k"));
    }
    let grid: Vec<(f64, usize)> = cfg.eps.iter().flat_map(|&e| cfg.ks.iter().map(move |&k| (e, k))).collect();
    let mut cases: Vec<CaseReport> = grid
        .par_iter()
        .enumerate()
        .map(|(c, &(eps, k))| {
            let mut rng = case_rng(seed, c);
            let bound = (2.0 * k as f64).sqrt() * eps;
            let mut worst: f64 = 0.0;
            let mut hits = 0;
            for t in 0..cfg.trials {
                let x = gaussian_vec(k, cfg.scale, &mut rng);
                // every other trial uses the corners of the perturbation box
                let y: Vec<f64> = x
                    .iter()
                    .map(|v| {
                        let delta = if t % 2 == 0 {
                            if rng.random::<bool>() {
                                eps
                            } else {
                                -eps
                            }
                        } else {
                            rng.random_range(-eps..=eps)
                        };
                        v + delta
                    })
                    .collect();
                let (r, rb) = (softmax(&x).expect("finite"), softmax(&y).expect("finite"));
                let err = r.iter().zip(&rb).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                worst = worst.max(err);
                hits += usize::from(within(err, bound));
            }
            CaseReport::new(format!("eps={eps},k={k}"), cfg.trials, worst, bound, hits, 1.0)
        })
        .collect();
    if cfg.emulator_trials > 0 {
        let mut rng = case_rng(seed, grid.len());
        let (k, d, eps) = (cfg.emulator_k, cfg.emulator_d, cfg.emulator_eps);
        let mut worst: f64 = 0.0;
        let mut hits = 0;
        for _ in 0..cfg.emulator_trials {
            let params = random_params(k, d, CovarianceKind::Diagonal, &mut rng)?;
            let v = gaussian_vec(d, 1.0, &mut rng);
            let exact = responsibility_estimate(&v, &params, 0.0, &mut rng)?.value;
            let est = responsibility_estimate(&v, &params, eps, &mut rng)?;
            let err = est.value.iter().zip(&exact).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            worst = worst.max(err);
            hits += usize::from(within(err, eps));
        }
        cases.push(CaseReport::new(
            format!("emulated eps={eps},k={k},d={d}"),
            cfg.emulator_trials,
            worst,
            eps,
            hits,
            0.99,
        ));
    }
    Ok(SuiteReport::new("responsibility-error", seed, cases))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TomographyConfig {
    pub trials: usize,
    pub dims: Vec<usize>,
    pub precisions: Vec<f64>,
    pub required_fraction: f64,
}

impl Default for TomographyConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            dims: vec![4, 16, 64],
            precisions: vec![0.05, 0.1],
            required_fraction: 0.99,
        }
    }
}

fn run_tomography(cfg: &TomographyConfig, seed: u64) -> Result<SuiteReport> {
    let mut grid = Vec::new();
    for &d in &cfg.dims {
        for &p in &cfg.precisions {
            for norm in ["linf", "l2"] {
                grid.push((d, p, norm));
            }
        }
    }
    let cases = grid
        .par_iter()
        .enumerate()
        .map(|(c, &(d, p, norm))| -> Result<CaseReport> {
            let mut rng = case_rng(seed, c);
            let mut worst: f64 = 0.0;
            let mut hits = 0;
            for _ in 0..cfg.trials {
                let x = unit_vec(d, &mut rng);
                let (est, err) = if norm == "linf" {
                    let e = tomography_linf(&x, p, &mut rng)?;
                    let err = e.value.iter().zip(&x).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                    (e, err)
                } else {
                    let e = tomography_l2(&x, p, &mut rng)?;
                    let err = dist2(&e.value, &x);
                    (e, err)
                };
                debug_assert!((crate::linalg::norm2(&est.value) - 1.0).abs() < 1e-9);
                worst = worst.max(err);
                hits += usize::from(within(err, p));
            }
            Ok(CaseReport::new(
                format!("{norm},d={d},precision={p}"),
                cfg.trials,
                worst,
                p,
                hits,
                cfg.required_fraction,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport::new("tomography", seed, cases))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AmplitudeConfig {
    pub trials: usize,
    pub amplitudes: Vec<f64>,
    pub grids: Vec<usize>,
    pub median_runs: usize,
    /// Required single-run success rate, `8/π²` by default.
    pub single_required: f64,
    pub boosted_required: f64,
}

impl Default for AmplitudeConfig {
    fn default() -> Self {
        Self {
            trials: 10_000,
            amplitudes: vec![0.1, 0.5, 0.9],
            grids: vec![16, 64, 256],
            median_runs: DEFAULT_MEDIAN_RUNS,
            single_required: 8.0 / (PI * PI),
            boosted_required: 0.999,
        }
    }
}

fn run_amplitude(cfg: &AmplitudeConfig, seed: u64) -> Result<SuiteReport> {
    let grid: Vec<(f64, usize)> = cfg
        .amplitudes
        .iter()
        .flat_map(|&a| cfg.grids.iter().map(move |&m| (a, m)))
        .collect();
    let nested = grid
        .par_iter()
        .enumerate()
        .map(|(c, &(a, m))| -> Result<[CaseReport; 2]> {
            let est = AmplitudeEstimator::new(a, m)?;
            let bound = est.bound();
            let mut rng = case_rng(seed, c);
            let (mut worst1, mut worst_b): (f64, f64) = (0.0, 0.0);
            let (mut hits1, mut hits_b) = (0, 0);
            for _ in 0..cfg.trials {
                let err = (est.sample(&mut rng) - a).abs();
                worst1 = worst1.max(err);
                hits1 += usize::from(within(err, bound));
                let boosted = median_boost(cfg.median_runs, || est.sample(&mut rng))?;
                let err = (boosted - a).abs();
                worst_b = worst_b.max(err);
                hits_b += usize::from(within(err, bound));
            }
            Ok([
                CaseReport::new(format!("single a={a},M={m}"), cfg.trials, worst1, bound, hits1, cfg.single_required),
                CaseReport::new(
                    format!("median{} a={a},M={m}", cfg.median_runs),
                    cfg.trials,
                    worst_b,
                    bound,
                    hits_b,
                    cfg.boosted_required,
                ),
            ])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport::new("amplitude", seed, nested.into_iter().flatten().collect()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadraticFormConfig {
    pub trials: usize,
    pub d: usize,
    pub eps: f64,
    /// Eigenvalues of the random covariances are drawn from `[min_eigenvalue, 1]`.
    pub min_eigenvalue: f64,
    pub required_fraction: f64,
}

impl Default for QuadraticFormConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            d: 8,
            eps: 0.05,
            min_eigenvalue: 0.1,
            required_fraction: 0.99,
        }
    }
}

fn run_quadratic_form(cfg: &QuadraticFormConfig, seed: u64) -> Result<SuiteReport> {
    if !(cfg.min_eigenvalue > 0.0 && cfg.min_eigenvalue <= 1.0) || cfg.d == 0 {
        return Err(Error::invalid("quadratic-form suite needs d >= 1 and min_eigenvalue in (0, 1]"));
    }
    let cases = [false, true]
        .par_iter()
        .enumerate()
        .map(|(c, &inverse)| -> Result<CaseReport> {
            let mut rng = case_rng(seed, c);
            let mut worst: f64 = 0.0;
            let mut hits = 0;
            for _ in 0..cfg.trials {
                let q = random_orthogonal(cfg.d, &mut rng);
                let lambda = DVector::from_fn(cfg.d, |_, _| rng.random_range(cfg.min_eigenvalue..=1.0));
                let sigma = Covariance::dense(&q * DMatrix::from_diagonal(&lambda) * q.transpose())?;
                let sigma = sigma.scaled(1.0 / sigma.spectral_norm())?;
                let v = gaussian_vec(cfg.d, 1.0, &mut rng);
                let est = quadratic_form_estimate(&v, &sigma, inverse, cfg.eps, &mut rng)?;
                let vv = v.iter().map(|x| x * x).sum::<f64>();
                let exact = if inverse {
                    crate::linalg::dot(&v, sigma.solve(&v).as_slice())
                } else {
                    crate::linalg::dot(&v, (sigma.to_dense() * DVector::from_column_slice(&v)).as_slice())
                };
                // error relative to ‖v‖², the scale of the contract
                let err = (est.value - exact).abs() / vv;
                worst = worst.max(err);
                hits += usize::from(within(err, cfg.eps));
            }
            let label = if inverse { "inverse" } else { "direct" };
            Ok(CaseReport::new(
                format!("{label},d={},eps={}", cfg.d, cfg.eps),
                cfg.trials,
                worst,
                cfg.eps,
                hits,
                cfg.required_fraction,
            ))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SuiteReport::new("quadratic-form", seed, cases))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NoiseBoundsConfig {
    pub trials: usize,
    pub k: usize,
    pub d: usize,
    pub eta: f64,
    pub delta_theta: f64,
    pub delta_mu: f64,
    pub sigma_floor: f64,
    pub kappa_cap: Option<f64>,
    pub kind: CovarianceKind,
}

impl Default for NoiseBoundsConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            k: 16,
            d: 40,
            eta: 10.0,
            delta_theta: 0.038,
            delta_mu: 0.5,
            sigma_floor: DEFAULT_SIGMA_FLOOR,
            kappa_cap: None,
            kind: CovarianceKind::Diagonal,
        }
    }
}

/// Random mixture with log-uniform variances in `[0.01, 2]`, so some fall
/// below the default floor.
pub fn random_params<R: Rng + ?Sized>(k: usize, d: usize, kind: CovarianceKind, rng: &mut R) -> Result<GmmParams> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let theta = raw.iter().map(|w| w / total).collect();
    let means = (0..k).map(|_| DVector::from_vec(gaussian_vec(d, 1.0, rng))).collect();
    let (lo, hi) = (0.01f64.ln(), 2f64.ln());
    let variances = |rng: &mut R| DVector::from_fn(d, |_, _| rng.random_range(lo..=hi).exp());
    let dense = |rng: &mut R| -> Result<Covariance> {
        let q = random_orthogonal(d, rng);
        let lambda = variances(rng);
        Covariance::dense(&q * DMatrix::from_diagonal(&lambda) * q.transpose())
    };
    let covs = match kind {
        CovarianceKind::Full => (0..k).map(|_| dense(rng)).collect::<Result<Vec<_>>>()?,
        CovarianceKind::Tied => vec![dense(rng)?; k],
        CovarianceKind::Diagonal => (0..k)
            .map(|_| Covariance::diagonal(DVector::from_fn(d, |_, _| rng.random_range(lo..=hi).exp())))
            .collect::<Result<Vec<_>>>()?,
        CovarianceKind::Spherical => (0..k)
            .map(|_| Covariance::spherical(rng.random_range(lo..=hi).exp(), d))
            .collect::<Result<Vec<_>>>()?,
        CovarianceKind::SoftKMeans { beta } => vec![Covariance::spherical(0.5 / beta, d)?; k],
    };
    GmmParams::with_normalized_theta(kind, theta, means, covs)
}

fn run_noise_bounds(cfg: &NoiseBoundsConfig, seed: u64) -> Result<SuiteReport> {
    let spec = NoiseSpec {
        delta_theta: cfg.delta_theta,
        delta_mu: cfg.delta_mu,
        sigma_floor: cfg.sigma_floor,
        kappa_cap: cfg.kappa_cap,
        ..NoiseSpec::default()
    };
    spec.validate()?;
    let mut rng = case_rng(seed, 0);
    let mut worst = [0.0f64; 3];
    let mut hits = [0usize; 3];
    let mut bounds = [0.0; 3];
    for _ in 0..cfg.trials {
        let params = random_params(cfg.k, cfg.d, cfg.kind, &mut rng)?;
        let out = noise::apply(&params, &spec, cfg.eta, &mut rng)?;
        let r = noise::verify_bounds(&out.reference, &out.params, Some(&out.raw_theta), &spec, cfg.eta)?;
        let observed = [r.theta_dist_raw.unwrap_or(r.theta_dist), r.mean_dist_max, r.cov_dist_max];
        bounds = [r.theta_bound, r.mean_bound, r.cov_bound];
        for i in 0..3 {
            worst[i] = worst[i].max(observed[i]);
            hits[i] += usize::from(observed[i] <= bounds[i] * (1.0 + 1e-9) + 1e-12);
        }
    }
    let cases = ["theta", "means", "covariances"]
        .iter()
        .enumerate()
        .map(|(i, name)| CaseReport::new(name.to_string(), cfg.trials, worst[i], bounds[i], hits[i], 1.0))
        .collect();
    Ok(SuiteReport::new("noise-bounds", seed, cases))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LogDetSuiteConfig {
    pub matrices: usize,
    pub trials_per_matrix: usize,
    pub d: usize,
    pub eps: f64,
    pub delta: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    /// Defaults to `1 − δ`.
    pub required_fraction: Option<f64>,
}

impl Default for LogDetSuiteConfig {
    fn default() -> Self {
        Self {
            matrices: 20,
            trials_per_matrix: 1,
            d: 50,
            eps: 0.5,
            delta: 0.1,
            min_eigenvalue: 0.1,
            max_eigenvalue: 0.9,
            required_fraction: None,
        }
    }
}

/// SPD matrix with a Haar-random eigenbasis and eigenvalues uniform in
/// `[lo, hi]`.
pub fn random_spd<R: Rng + ?Sized>(d: usize, lo: f64, hi: f64, rng: &mut R) -> DMatrix<f64> {
    let q = random_orthogonal(d, rng);
    let lambda = DVector::from_fn(d, |_, _| rng.random_range(lo..=hi));
    crate::linalg::symmetrize(&(&q * DMatrix::from_diagonal(&lambda) * q.transpose()))
}

fn run_logdet(cfg: &LogDetSuiteConfig, seed: u64) -> Result<SuiteReport> {
    if !(cfg.min_eigenvalue > 0.0 && cfg.min_eigenvalue <= cfg.max_eigenvalue) {
        return Err(Error::invalid("logdet suite needs 0 < min_eigenvalue <= max_eigenvalue"));
    }
    let required = cfg.required_fraction.unwrap_or(1.0 - cfg.delta);
    let results = (0..cfg.matrices)
        .into_par_iter()
        .map(|c| -> Result<Vec<f64>> {
            let mut rng = case_rng(seed, c);
            let m = random_spd(cfg.d, cfg.min_eigenvalue, cfg.max_eigenvalue, &mut rng);
            let exact = logdet_exact(&m)?;
            (0..cfg.trials_per_matrix)
                .map(|_| Ok((logdet_chebyshev(&m, cfg.eps, cfg.delta, &mut rng)? - exact).abs()))
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    let errors: Vec<f64> = results.into_iter().flatten().collect();
    let worst = errors.iter().copied().fold(0.0, f64::max);
    let hits = errors.iter().filter(|e| **e <= cfg.eps).count();
    let case = CaseReport::new(
        format!(
            "d={},eigenvalues in [{}, {}],eps={},delta={}",
            cfg.d, cfg.min_eigenvalue, cfg.max_eigenvalue, cfg.eps, cfg.delta
        ),
        errors.len(),
        worst,
        cfg.eps,
        hits,
        required,
    );
    Ok(SuiteReport::new("logdet", seed, vec![case]))
}

/// A suite together with its parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum SuiteConfig {
    Lipschitz(LipschitzConfig),
    ResponsibilityError(ResponsibilityConfig),
    Tomography(TomographyConfig),
    Amplitude(AmplitudeConfig),
    QuadraticForm(QuadraticFormConfig),
    NoiseBounds(NoiseBoundsConfig),
    LogDet(LogDetSuiteConfig),
}

impl SuiteConfig {
    /// Default parameters for a suite name.
    pub fn default_for(name: &str) -> Result<Self> {
        Ok(match name {
            "lipschitz" => Self::Lipschitz(Default::default()),
            "responsibility-error" => Self::ResponsibilityError(Default::default()),
            "tomography" => Self::Tomography(Default::default()),
            "amplitude" => Self::Amplitude(Default::default()),
            "quadratic-form" => Self::QuadraticForm(Default::default()),
            "noise-bounds" => Self::NoiseBounds(Default::default()),
            "logdet" => Self::LogDet(Default::default()),
            other => {
                return Err(Error::invalid(format!(
                    "unknown suite '{other}'; expected one of {}",
                    SUITE_NAMES.join(", ")
                )))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Lipschitz(_) => "lipschitz",
            Self::ResponsibilityError(_) => "responsibility-error",
            Self::Tomography(_) => "tomography",
            Self::Amplitude(_) => "amplitude",
            Self::QuadraticForm(_) => "quadratic-form",
            Self::NoiseBounds(_) => "noise-bounds",
            Self::LogDet(_) => "logdet",
        }
    }

    pub fn run(&self, seed: u64) -> Result<SuiteReport> {
        match self {
            Self::Lipschitz(c) => run_lipschitz(c, seed),
            Self::ResponsibilityError(c) => run_responsibility(c, seed),
            Self::Tomography(c) => run_tomography(c, seed),
            Self::Amplitude(c) => run_amplitude(c, seed),
            Self::QuadraticForm(c) => run_quadratic_form(c, seed),
            Self::NoiseBounds(c) => run_noise_bounds(c, seed),
            Self::LogDet(c) => run_logdet(c, seed),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_suite_is_rejected() {
        assert!(SuiteConfig::default_for("nope").is_err());
        for name in SUITE_NAMES {
            assert_eq!(SuiteConfig::default_for(name).unwrap().name(), name);
        }
    }

    #[test]
    fn zero_noise_gives_zero_distances() {
        let cfg = NoiseBoundsConfig {
            trials: 20,
            delta_theta: 0.0,
            delta_mu: 0.0,
            ..Default::default()
        };
        let r = run_noise_bounds(&cfg, 3).unwrap();
        assert!(r.pass);
        assert!(r.cases.iter().all(|c| c.max_observed == 0.0));
    }

    #[test]
    fn small_lipschitz_run_passes() {
        let cfg = LipschitzConfig {
            trials: 200,
            ..Default::default()
        };
        assert!(run_lipschitz(&cfg, 0).unwrap().pass);
    }
}

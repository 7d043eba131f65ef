//! Per-iteration runtime formulas of quantum EM against the classical
//! `k n d²` baseline.
//!
//! All hidden constants and polylogarithmic factors are set to 1, so the
//! numbers compare scaling shapes only.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiler::ProfileReport;

pub const DISCLAIMER: &str =
    "model units: hidden constants and polylog factors set to 1; compare scaling, not wall-clock time";

/// How per-component `κ(Σ_j)` and `μ(Σ_j)` collapse to one number.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reduction {
    #[default]
    Max,
    Mean,
}

/// Power of `κ(V)` in `T_Σ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum KappaVPower {
    #[default]
    Squared,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorTag {
    Ml,
    Map,
}

/// Every number the formulas consume.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostInputs {
    pub k: usize,
    pub d: usize,
    pub eta: f64,
    pub kappa_sigma: f64,
    pub mu_sigma: f64,
    pub kappa_v: f64,
    pub mu_v: f64,
    pub mu_v_prime: f64,
    pub delta_theta: f64,
    pub delta_mu: f64,
    pub eps_tau: f64,
}

impl CostInputs {
    fn validate(&self) -> Result<()> {
        let values = [
            self.eta,
            self.kappa_sigma,
            self.mu_sigma,
            self.kappa_v,
            self.mu_v,
            self.mu_v_prime,
            self.delta_theta,
            self.delta_mu,
            self.eps_tau,
        ];
        if self.k == 0 || self.d == 0 || values.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::invalid("cost inputs must all be positive and finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct CostOptions {
    pub reduction: Reduction,
    pub kappa_v_power: KappaVPower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostReport {
    pub estimator: EstimatorTag,
    pub t_theta: f64,
    pub t_mu: f64,
    pub t_sigma: f64,
    pub t_ell: f64,
    pub dominant_term: String,
    /// `k d²`: the classical cost is this times `n`.
    pub classical_cost_per_sample: f64,
    /// `k n d²` when a sample count was given.
    pub classical_cost: Option<f64>,
    pub n: Option<usize>,
    pub crossover_n: Option<f64>,
    pub inputs_echo: CostInputs,
    pub options: CostOptions,
    /// `μ(V′)` came from its Frobenius upper bound.
    pub mu_v_prime_is_bound: bool,
    pub disclaimer: String,
}

impl CostReport {
    pub fn max_term(&self) -> f64 {
        self.t_theta.max(self.t_mu).max(self.t_sigma).max(self.t_ell)
    }

    /// `k n d²`.
    pub fn classical_at(&self, n: f64) -> f64 {
        self.classical_cost_per_sample * n
    }
}

/// Evaluate the four terms literally.
pub fn evaluate(inputs: &CostInputs, opts: CostOptions, estimator: EstimatorTag, n: Option<usize>) -> Result<CostReport> {
    inputs.validate()?;
    let CostInputs {
        k,
        d,
        eta,
        kappa_sigma,
        mu_sigma,
        kappa_v,
        mu_v,
        mu_v_prime,
        delta_theta,
        delta_mu,
        eps_tau,
    } = inputs.clone();
    let (k, d) = (k as f64, d as f64);
    let sigma_part = k.powf(3.5) * eta.powf(1.5) * kappa_sigma * mu_sigma;
    let kv = match opts.kappa_v_power {
        KappaVPower::Squared => kappa_v * kappa_v,
        KappaVPower::Linear => kappa_v,
    };
    let t_theta = sigma_part / (delta_theta * delta_theta);
    let t_mu = k * d * eta * kappa_v * (mu_v + sigma_part) / delta_mu.powi(3);
    let t_sigma = k * d * d * eta * kv * (mu_v_prime + eta * eta * k.powf(3.5) * kappa_sigma * mu_sigma) / delta_mu.powi(3);
    let t_ell = k.powf(1.5) * eta.powf(1.5) * kappa_sigma * mu_sigma / (eps_tau * eps_tau);
    let terms = [("t_theta", t_theta), ("t_mu", t_mu), ("t_sigma", t_sigma), ("t_ell", t_ell)];
    // first maximal term in the order above
    let dominant = terms
        .iter()
        .fold(terms[0], |best, t| if t.1 > best.1 { *t } else { best })
        .0;
    let per_sample = k * d * d;
    let mut report = CostReport {
        estimator,
        t_theta,
        t_mu,
        t_sigma,
        t_ell,
        dominant_term: dominant.to_string(),
        classical_cost_per_sample: per_sample,
        classical_cost: n.map(|n| per_sample * n as f64),
        n,
        crossover_n: None,
        inputs_echo: inputs.clone(),
        options: opts,
        mu_v_prime_is_bound: false,
        disclaimer: DISCLAIMER.to_string(),
    };
    report.crossover_n = crossover_n(&report);
    Ok(report)
}

/// Collapse a profile into formula inputs. Returns whether `μ(V′)` is the
/// upper bound rather than an exact value.
pub fn inputs_from_profile(
    profile: &ProfileReport,
    delta_theta: f64,
    delta_mu: f64,
    eps_tau: f64,
    reduction: Reduction,
) -> (CostInputs, bool) {
    let reduce = |xs: &[f64]| match reduction {
        Reduction::Max => xs.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        Reduction::Mean => xs.iter().sum::<f64>() / xs.len().max(1) as f64,
    };
    let kappas: Vec<f64> = profile.kappa_sigma.iter().map(|p| p.effective()).collect();
    let (mu_v_prime, is_bound) = match profile.mu_v_prime {
        Some(v) => (v, false),
        None => (profile.mu_v_prime_bound, true),
    };
    (
        CostInputs {
            k: profile.k,
            d: profile.d,
            eta: profile.eta,
            kappa_sigma: reduce(&kappas),
            mu_sigma: reduce(&profile.mu_sigma),
            kappa_v: profile.kappa_v,
            mu_v: profile.mu_v,
            mu_v_prime,
            delta_theta,
            delta_mu,
            eps_tau,
        },
        is_bound,
    )
}

fn from_profile(
    profile: &ProfileReport,
    delta_theta: f64,
    delta_mu: f64,
    eps_tau: f64,
    opts: CostOptions,
    estimator: EstimatorTag,
    n: Option<usize>,
) -> Result<CostReport> {
    let (inputs, is_bound) = inputs_from_profile(profile, delta_theta, delta_mu, eps_tau, opts.reduction);
    let mut report = evaluate(&inputs, opts, estimator, n)?;
    report.mu_v_prime_is_bound = is_bound;
    Ok(report)
}

/// Cost of one quantum EM iteration for maximum likelihood.
pub fn qem_iteration_cost(
    profile: &ProfileReport,
    delta_theta: f64,
    delta_mu: f64,
    eps_tau: f64,
    opts: CostOptions,
    n: Option<usize>,
) -> Result<CostReport> {
    from_profile(profile, delta_theta, delta_mu, eps_tau, opts, EstimatorTag::Ml, n)
}

/// Cost of one quantum EM iteration for MAP. The terms are the same; the
/// classical MAP update runs on top of the recovered ML quantities.
pub fn map_iteration_cost(
    profile: &ProfileReport,
    delta_theta: f64,
    delta_mu: f64,
    eps_tau: f64,
    opts: CostOptions,
    n: Option<usize>,
) -> Result<CostReport> {
    from_profile(profile, delta_theta, delta_mu, eps_tau, opts, EstimatorTag::Map, n)
}

/// Sample count beyond which `k n d²` exceeds the largest quantum term,
/// `max(1, max_term / (k d²))`.
pub fn crossover_n(report: &CostReport) -> Option<f64> {
    let max = report.max_term();
    if !max.is_finite() || !(report.classical_cost_per_sample > 0.0) {
        return None;
    }
    Some((max / report.classical_cost_per_sample).max(1.0))
}

/// `(n, classical, quantum max term)` points for plotting.
pub fn cost_curve(report: &CostReport, ns: &[f64]) -> Vec<(f64, f64, f64)> {
    ns.iter().map(|&n| (n, report.classical_at(n), report.max_term())).collect()
}

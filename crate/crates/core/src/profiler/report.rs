use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::logdet::{logdet_chebyshev_with, LogDetConfig};
use super::matrix::{condition_number, mu_param, mu_v_prime};
use crate::error::{Error, Result};
use crate::gmm::{Dataset, GmmParams};
use crate::noise::DEFAULT_SIGMA_FLOOR;

/// Largest `n · d²` for which `μ(V′)` is computed exactly.
pub const DEFAULT_V_PRIME_BUDGET: usize = 50_000_000;

/// `η = max ‖v_i‖²` after scaling the shortest row to unit norm.
pub fn eta(data: &Dataset) -> Result<f64> {
    data.eta()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaPair {
    pub raw: f64,
    /// Condition number over singular values above the threshold; `None`
    /// when none survive.
    pub thresholded: Option<f64>,
}

impl KappaPair {
    /// The thresholded value when available.
    pub fn effective(&self) -> f64 {
        self.thresholded.unwrap_or(self.raw)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileReport {
    pub n: usize,
    pub d: usize,
    pub k: usize,
    #[serde(rename = "kappa_V")]
    pub kappa_v: f64,
    pub kappa_threshold: f64,
    pub kappa_sigma: Vec<KappaPair>,
    #[serde(rename = "mu_V")]
    pub mu_v: f64,
    /// Exact `μ(V′)`, present when requested and within budget.
    #[serde(rename = "mu_V_prime")]
    pub mu_v_prime: Option<f64>,
    /// Upper bound `‖V′‖_F / ‖V′‖₂-lower-bound`, capped at `√min(n, d²)`.
    #[serde(rename = "mu_V_prime_bound")]
    pub mu_v_prime_bound: f64,
    pub mu_sigma: Vec<f64>,
    pub eta: f64,
    /// `|log det Σ_j|` from the stochastic estimator.
    pub log_abs_dets: Vec<f64>,
    /// Signed exact log-determinants for cross-checking.
    pub log_dets_exact: Vec<f64>,
    pub spectral_norms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileOptions {
    pub include_v_prime: bool,
    pub v_prime_budget: usize,
    pub kappa_threshold: f64,
    pub logdet_eps: f64,
    pub logdet_delta: f64,
    pub logdet: LogDetConfig,
    pub seed: u64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        Self {
            include_v_prime: false,
            v_prime_budget: DEFAULT_V_PRIME_BUDGET,
            kappa_threshold: DEFAULT_SIGMA_FLOOR,
            logdet_eps: 0.5,
            logdet_delta: 0.1,
            logdet: LogDetConfig::default(),
            seed: 0,
        }
    }
}

/// `‖V′‖_F` is `√Σ‖v_i‖⁴` and `‖V′‖₂` is at least both the largest row norm
/// `max ‖v_i‖²` and `‖V′ᵀ1‖/√n = ‖VᵀV‖_F/√n`.
fn v_prime_bound(data: &Dataset) -> f64 {
    let frob = data.row_norms().iter().map(|r| r.powi(4)).sum::<f64>().sqrt();
    let max_row = data.row_norms().iter().map(|r| r * r).fold(0.0, f64::max);
    let m = data.matrix();
    let gram = m.tr_mul(&m);
    let lower = max_row.max(gram.norm() / (data.n() as f64).sqrt());
    let cap = (data.n().min(data.d() * data.d()) as f64).sqrt();
    (frob / lower).min(cap)
}

/// Measure every runtime parameter of a dataset and fitted model.
pub fn profile(data: &Dataset, params: &GmmParams, opts: &ProfileOptions) -> Result<ProfileReport> {
    if data.d() != params.d() {
        return Err(Error::DimensionMismatch {
            context: "profile data vs model",
            expected: params.d(),
            found: data.d(),
        });
    }
    let (n, d) = (data.n(), data.d());
    let mu_v_prime = if opts.include_v_prime {
        let needed = n * d * d;
        if needed > opts.v_prime_budget {
            return Err(Error::MemoryBudget {
                needed,
                budget: opts.v_prime_budget,
            });
        }
        Some(mu_v_prime(data)?)
    } else {
        None
    };
    let v = data.matrix();
    let tau = opts.kappa_threshold;
    let per_component: Vec<Result<(KappaPair, f64, f64, f64, f64)>> = params
        .covariances()
        .par_iter()
        .enumerate()
        .map(|(j, cov)| {
            let dense = cov.to_dense();
            let kappa = KappaPair {
                raw: condition_number(&dense, None)?,
                thresholded: match condition_number(&dense, Some(tau)) {
                    Ok(k) => Some(k),
                    Err(Error::NoSingularValueAboveThreshold(_)) => None,
                    Err(e) => return Err(e),
                },
            };
            let mu = mu_param(&dense)?;
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream(j as u64);
            let est = logdet_chebyshev_with(&dense, opts.logdet_eps, opts.logdet_delta, &opts.logdet, &mut rng)?;
            Ok((kappa, mu, est.value.abs(), cov.log_det(), cov.spectral_norm()))
        })
        .collect();
    let mut report = ProfileReport {
        n,
        d,
        k: params.k(),
        kappa_v: condition_number(&v, None)?,
        kappa_threshold: tau,
        kappa_sigma: Vec::new(),
        mu_v: mu_param(&v)?,
        mu_v_prime,
        mu_v_prime_bound: v_prime_bound(data),
        mu_sigma: Vec::new(),
        eta: data.eta()?,
        log_abs_dets: Vec::new(),
        log_dets_exact: Vec::new(),
        spectral_norms: Vec::new(),
    };
    for r in per_component {
        let (kappa, mu, lad, exact, norm) = r?;
        report.kappa_sigma.push(kappa);
        report.mu_sigma.push(mu);
        report.log_abs_dets.push(lad);
        report.log_dets_exact.push(exact);
        report.spectral_norms.push(norm);
    }
    Ok(report)
}

fn avg_max(values: &[f64]) -> (f64, f64) {
    let avg = values.iter().sum::<f64>() / values.len().max(1) as f64;
    (avg, values.iter().copied().fold(f64::NEG_INFINITY, f64::max))
}

impl ProfileReport {
    /// Plain-text table with average and maximum over components.
    pub fn table(&self) -> String {
        let kappa: Vec<f64> = self.kappa_sigma.iter().map(KappaPair::effective).collect();
        let rows: [(&str, (f64, f64)); 6] = [
            ("‖Σ‖₂", avg_max(&self.spectral_norms)),
            ("|log det Σ|", avg_max(&self.log_abs_dets)),
            ("κ*(Σ)", avg_max(&kappa)),
            ("μ(Σ)", avg_max(&self.mu_sigma)),
            ("μ(V)", (self.mu_v, self.mu_v)),
            ("κ(V)", (self.kappa_v, self.kappa_v)),
        ];
        let mut out = String::new();
        let _ = writeln!(out, "{:<14}{:>14}{:>14}", "", "avg", "max");
        for (label, (avg, max)) in rows {
            let pad = 14 - label.chars().count().min(14);
            let _ = writeln!(out, "{label}{}{avg:>14.4}{max:>14.4}", " ".repeat(pad));
        }
        let _ = writeln!(out, "η = {:.4}, n = {}, d = {}, k = {}", self.eta, self.n, self.d, self.k);
        out
    }
}

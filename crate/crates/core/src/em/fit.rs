use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::gmm::{log_mixture_densities, log_weighted_densities, responsibilities, Dataset, GmmParams, Responsibilities};
use crate::noise::{self, NoiseSpec};

use super::config::{Estimator, FitConfig, StoppingRule};
use super::init::initialize;
use super::mstep::m_step;

/// One EM iteration as seen after its M-step (and noise, if any).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub log_likelihood: f64,
    pub mean_probability: f64,
    pub wall_ms: f64,
    /// Log-likelihood dropped by more than `1e-9` relative. Expected only
    /// under noise or MAP.
    pub non_monotone: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub params: GmmParams,
    pub iterations: usize,
    pub trace: Vec<TraceRecord>,
    pub converged: bool,
}

/// Alias kept for call sites that read better with the step name.
pub fn e_step(data: &Dataset, params: &GmmParams) -> Result<Responsibilities> {
    responsibilities(data, params)
}

/// Hard labels `argmax_j r_ij`, lowest index on ties. The argmax of the
/// unnormalized log weights is the same as that of the responsibilities.
pub fn predict_labels(data: &Dataset, params: &GmmParams) -> Result<Vec<usize>> {
    let logw = log_weighted_densities(data, params)?;
    Ok(logw.chunks_exact(params.k()).map(crate::gmm::argmax_first).collect())
}

fn statistics(data: &Dataset, params: &GmmParams) -> Result<(f64, f64)> {
    let logs = log_mixture_densities(data, params)?;
    let ll = logs.iter().sum();
    let mp = logs.iter().map(|l| l.exp()).sum::<f64>() / data.n() as f64;
    Ok((ll, mp))
}

/// Stream id separating the noise generator from the initialization one
/// when both derive from the same seed.
const NOISE_STREAM: u64 = 1;

/// Run EM. With `noise`, each M-step output is passed through the noise
/// channel before the next E-step.
pub fn fit(data: &Dataset, cfg: &FitConfig, noise: Option<&NoiseSpec>) -> Result<FitResult> {
    cfg.validate()?;
    if let Estimator::Map(prior) = &cfg.estimator {
        prior.validate(cfg.k, data.d())?;
    }
    let noise_setup = match noise {
        Some(spec) => {
            spec.validate()?;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed.unwrap_or(cfg.seed));
            rng.set_stream(NOISE_STREAM);
            Some((spec, data.eta()?, rng))
        }
        None => None,
    };
    let mut noise_setup = noise_setup;
    let rule = match cfg.stopping {
        StoppingRule::Auto if noise.is_some() => StoppingRule::MeanProbability,
        StoppingRule::Auto => StoppingRule::AvgLogLikelihood,
        r => r,
    };
    let floor = cfg.resolve_floor(data);
    let n = data.n() as f64;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut params = initialize(data, cfg, &mut rng)?;
    let (mut prev_ll, mut prev_mp) = statistics(data, &params)?;
    let mut trace = Vec::new();
    let mut converged = false;

    for iteration in 1..=cfg.max_iters {
        let start = Instant::now();
        let resp = e_step(data, &params)?;
        let mut next = m_step(data, &resp, cfg.kind, &cfg.estimator, floor)?;
        if let Some((spec, eta, noise_rng)) = noise_setup.as_mut() {
            next = noise::apply(&next, spec, *eta, noise_rng)?.params;
        }
        let (ll, mp) = statistics(data, &next)?;
        let wall_ms = start.elapsed().as_secs_f64() * 1e3;
        trace.push(TraceRecord {
            iteration,
            log_likelihood: ll,
            mean_probability: mp,
            wall_ms,
            non_monotone: ll < prev_ll - 1e-9 * prev_ll.abs(),
        });
        let delta = match rule {
            StoppingRule::MeanProbability => (mp - prev_mp).abs(),
            _ => (ll - prev_ll).abs() / n,
        };
        params = next;
        prev_ll = ll;
        prev_mp = mp;
        if delta < cfg.eps_tau {
            converged = true;
            break;
        }
    }
    Ok(FitResult {
        params,
        iterations: trace.len(),
        trace,
        converged,
    })
}

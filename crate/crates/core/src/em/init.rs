use nalgebra::DVector;
use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::gmm::{log_likelihood, responsibilities, Covariance, CovarianceKind, Dataset, GmmParams, Responsibilities};
use crate::linalg::sq_dist;

use super::config::{FitConfig, InitStrategy};
use super::mstep::{m_step, m_step_ml};

/// Starting parameters for EM.
pub fn initialize<R: Rng + ?Sized>(data: &Dataset, cfg: &FitConfig, rng: &mut R) -> Result<GmmParams> {
    cfg.validate()?;
    if cfg.k > data.n() {
        return Err(Error::TooManyComponents { k: cfg.k, n: data.n() });
    }
    let floor = cfg.resolve_floor(data);
    match cfg.init {
        InitStrategy::RandomEm => random_em(data, cfg.k, cfg.kind, floor, rng),
        InitStrategy::KMeansPP { rounds } => {
            let centers = kmeans(data, cfg.k, rounds, rng);
            let labels = assign(data, &centers);
            let labels = reseed_empty(data, labels, &centers, cfg.k);
            hard_m_step(data, &labels, cfg.k, cfg.kind, floor)
        }
        InitStrategy::SmallEm { restarts, burn_iters } => {
            let mut best: Option<(f64, GmmParams)> = None;
            let mut last_err = None;
            for _ in 0..restarts {
                match burn_in(data, cfg, floor, burn_iters, rng) {
                    Ok((ll, p)) => {
                        if best.as_ref().is_none_or(|(b, _)| ll > *b) {
                            best = Some((ll, p));
                        }
                    }
                    Err(e) => last_err = Some(e),
                }
            }
            best.map(|(_, p)| p).ok_or_else(|| last_err.expect("restarts >= 1"))
        }
        InitStrategy::Cem => {
            let start = random_em(data, cfg.k, cfg.kind, floor, rng)?;
            let labels = responsibilities(data, &start)?.argmax();
            let centers: Vec<Vec<f64>> = start.means().iter().map(|m| m.as_slice().to_vec()).collect();
            let labels = reseed_empty(data, labels, &centers, cfg.k);
            hard_m_step(data, &labels, cfg.k, cfg.kind, floor)
        }
    }
}

fn burn_in<R: Rng + ?Sized>(
    data: &Dataset,
    cfg: &FitConfig,
    floor: f64,
    iters: usize,
    rng: &mut R,
) -> Result<(f64, GmmParams)> {
    let mut params = random_em(data, cfg.k, cfg.kind, floor, rng)?;
    for _ in 0..iters {
        let resp = responsibilities(data, &params)?;
        params = m_step(data, &resp, cfg.kind, &cfg.estimator, floor)?;
    }
    Ok((log_likelihood(data, &params)?, params))
}

fn random_em<R: Rng + ?Sized>(
    data: &Dataset,
    k: usize,
    kind: CovarianceKind,
    floor: f64,
    rng: &mut R,
) -> Result<GmmParams> {
    let idx = sample(rng, data.n(), k);
    let means: Vec<DVector<f64>> = idx.iter().map(|i| DVector::from_column_slice(data.row(i))).collect();
    let global = data.covariance();
    let cov = match kind {
        CovarianceKind::SoftKMeans { beta } => Covariance::spherical(1.0 / (2.0 * beta), data.d())?,
        _ => Covariance::project(&global, kind.shape(), floor)?,
    };
    GmmParams::with_normalized_theta(kind, vec![1.0; k], means, vec![cov; k])
}

/// k-means++ seeding: first center uniform, each later one drawn with
/// probability proportional to the squared distance to its nearest center.
/// Returns row indices.
pub fn kmeans_pp_seeds<R: Rng + ?Sized>(data: &Dataset, k: usize, rng: &mut R) -> Vec<usize> {
    let n = data.n();
    let mut seeds = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = data.rows().map(|v| sq_dist(v, data.row(seeds[0]))).collect();
    while seeds.len() < k {
        let next = match WeightedIndex::new(&d2) {
            Ok(w) => w.sample(rng),
            // every remaining point coincides with a center
            Err(_) => {
                let free: Vec<usize> = (0..n).filter(|i| !seeds.contains(i)).collect();
                free[rng.random_range(0..free.len())]
            }
        };
        seeds.push(next);
        for (i, v) in data.rows().enumerate() {
            d2[i] = d2[i].min(sq_dist(v, data.row(next)));
        }
    }
    seeds
}

/// D² seeding followed by `rounds` Lloyd iterations. Returns centers.
pub fn kmeans<R: Rng + ?Sized>(data: &Dataset, k: usize, rounds: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let mut centers: Vec<Vec<f64>> = kmeans_pp_seeds(data, k, rng)
        .into_iter()
        .map(|i| data.row(i).to_vec())
        .collect();
    for _ in 0..rounds {
        let labels = reseed_empty(data, assign(data, &centers), &centers, k);
        let next = centroids(data, &labels, k);
        if next == centers {
            break;
        }
        centers = next;
    }
    centers
}

fn assign(data: &Dataset, centers: &[Vec<f64>]) -> Vec<usize> {
    data.rows()
        .map(|v| {
            let mut best = (0, f64::INFINITY);
            for (j, c) in centers.iter().enumerate() {
                let dist = sq_dist(v, c);
                if dist < best.1 {
                    best = (j, dist);
                }
            }
            best.0
        })
        .collect()
}

fn centroids(data: &Dataset, labels: &[usize], k: usize) -> Vec<Vec<f64>> {
    let mut sums = vec![vec![0.0; data.d()]; k];
    let mut counts = vec![0usize; k];
    for (v, &l) in data.rows().zip(labels) {
        counts[l] += 1;
        for (s, x) in sums[l].iter_mut().zip(v) {
            *s += x;
        }
    }
    for (s, c) in sums.iter_mut().zip(&counts) {
        s.iter_mut().for_each(|x| *x /= *c as f64);
    }
    sums
}

/// Give every empty cluster the point farthest from its current center
/// (lowest index on ties), taken only from clusters that keep at least one
/// point.
fn reseed_empty(data: &Dataset, mut labels: Vec<usize>, centers: &[Vec<f64>], k: usize) -> Vec<usize> {
    loop {
        let mut counts = vec![0usize; k];
        labels.iter().for_each(|&l| counts[l] += 1);
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return labels;
        };
        let mut far = (usize::MAX, -1.0);
        for (i, v) in data.rows().enumerate() {
            let l = labels[i];
            if counts[l] < 2 {
                continue;
            }
            let dist = sq_dist(v, &centers[l]);
            if dist > far.1 {
                far = (i, dist);
            }
        }
        // k <= n guarantees some cluster has two points
        labels[far.0] = empty;
    }
}

fn hard_m_step(data: &Dataset, labels: &[usize], k: usize, kind: CovarianceKind, floor: f64) -> Result<GmmParams> {
    let resp = Responsibilities::from_labels(labels, k)?;
    m_step_ml(data, &resp, kind, floor)
}

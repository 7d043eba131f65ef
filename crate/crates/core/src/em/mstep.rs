use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gmm::{Covariance, CovarianceKind, CovarianceShape, Dataset, GmmParams, Responsibilities};

use super::config::{Estimator, MapPrior};

/// Sufficient statistics of one component under soft assignments.
#[derive(Debug, Clone, PartialEq)]
pub struct ComponentStats {
    /// `r_j = Σ_i r_ij`.
    pub weight: f64,
    /// `Σ_i r_ij v_i`.
    pub weighted_sum: DVector<f64>,
    /// `x̄_j`, zero when the component is empty.
    pub mean: DVector<f64>,
    /// `Σ_i r_ij (v_i − x̄_j)(v_i − x̄_j)ᵀ`, unnormalized. Only the diagonal
    /// is filled when the statistics were gathered without `full`.
    pub scatter: DMatrix<f64>,
}

fn check(data: &Dataset, resp: &Responsibilities) -> Result<()> {
    if data.n() != resp.n() {
        return Err(Error::DimensionMismatch {
            context: "responsibility rows vs samples",
            expected: data.n(),
            found: resp.n(),
        });
    }
    Ok(())
}

/// Per-component weighted moments. Components are processed in parallel;
/// each reduction runs in a fixed row order, so results are deterministic.
pub fn component_stats(data: &Dataset, resp: &Responsibilities, full: bool) -> Result<Vec<ComponentStats>> {
    check(data, resp)?;
    let (n, d) = (data.n(), data.d());
    Ok((0..resp.k())
        .into_par_iter()
        .map(|j| {
            let mut weight = 0.0;
            let mut sum = DVector::zeros(d);
            for (i, v) in data.rows().enumerate() {
                let r = resp.get(i, j);
                weight += r;
                for (s, x) in sum.iter_mut().zip(v) {
                    *s += r * x;
                }
            }
            let mean = if weight > 0.0 { &sum / weight } else { DVector::zeros(d) };
            let scatter = if full {
                let mut centered = DMatrix::zeros(n, d);
                for (i, v) in data.rows().enumerate() {
                    let w = resp.get(i, j).sqrt();
                    for c in 0..d {
                        centered[(i, c)] = w * (v[c] - mean[c]);
                    }
                }
                centered.tr_mul(&centered)
            } else {
                let mut diag = DVector::zeros(d);
                for (i, v) in data.rows().enumerate() {
                    let r = resp.get(i, j);
                    for c in 0..d {
                        let x = v[c] - mean[c];
                        diag[c] += r * x * x;
                    }
                }
                DMatrix::from_diagonal(&diag)
            };
            ComponentStats {
                weight,
                weighted_sum: sum,
                mean,
                scatter,
            }
        })
        .collect())
}

/// Covariance update in raw-moment form,
/// `Σ_i r_ij v_i v_iᵀ / r_j − μ_j μ_jᵀ`. Algebraically equal to the centered
/// scatter divided by `r_j`; kept as an independent cross-check.
pub fn raw_moment_covariance(data: &Dataset, resp: &Responsibilities, j: usize) -> Result<DMatrix<f64>> {
    check(data, resp)?;
    let d = data.d();
    let mut second = DMatrix::zeros(d, d);
    let mut sum = DVector::zeros(d);
    let mut weight = 0.0;
    for (i, v) in data.rows().enumerate() {
        let r = resp.get(i, j);
        let v = DVector::from_column_slice(v);
        second += r * &v * v.transpose();
        sum += r * v;
        weight += r;
    }
    if weight <= 0.0 {
        return Err(Error::EmptyComponent(j));
    }
    let mu = sum / weight;
    Ok(second / weight - &mu * mu.transpose())
}

fn needs_full(kind: CovarianceKind) -> bool {
    kind.shape() == CovarianceShape::Dense
}

/// Turn per-component dense estimates into covariances of `kind`, pooling
/// for Tied and flooring eigenvalues at `floor`.
fn finalize(kind: CovarianceKind, mats: Vec<DMatrix<f64>>, weights: &[f64], floor: f64) -> Result<Vec<Covariance>> {
    let k = mats.len();
    let d = mats[0].nrows();
    match kind {
        CovarianceKind::SoftKMeans { beta } => Ok(vec![Covariance::spherical(1.0 / (2.0 * beta), d)?; k]),
        CovarianceKind::Tied => {
            let total: f64 = weights.iter().sum();
            let mut pooled = DMatrix::zeros(d, d);
            for (m, w) in mats.iter().zip(weights) {
                pooled += m * (*w / total);
            }
            Ok(vec![Covariance::project(&pooled, CovarianceShape::Dense, floor)?; k])
        }
        _ => mats
            .par_iter()
            .map(|m| Covariance::project(m, kind.shape(), floor))
            .collect(),
    }
}

/// Maximum-likelihood M-step.
pub fn m_step_ml(data: &Dataset, resp: &Responsibilities, kind: CovarianceKind, reg_floor: f64) -> Result<GmmParams> {
    let stats = component_stats(data, resp, needs_full(kind))?;
    let empty_below = 1e-12 * data.n() as f64;
    if let Some(j) = stats.iter().position(|s| s.weight < empty_below) {
        return Err(Error::EmptyComponent(j));
    }
    let weights: Vec<f64> = stats.iter().map(|s| s.weight).collect();
    let total: f64 = weights.iter().sum();
    let theta = weights.iter().map(|w| w / total).collect();
    let mats = stats.iter().map(|s| &s.scatter / s.weight).collect();
    let covs = finalize(kind, mats, &weights, reg_floor)?;
    let means = stats.into_iter().map(|s| s.mean).collect();
    GmmParams::with_normalized_theta(kind, theta, means, covs)
}

/// MAP M-step under a Dirichlet / Normal-inverse-Wishart prior. The prior is
/// not validated here so that limiting cases can be evaluated; `fit`
/// validates it.
pub fn m_step_map(
    data: &Dataset,
    resp: &Responsibilities,
    kind: CovarianceKind,
    prior: &MapPrior,
    reg_floor: f64,
) -> Result<GmmParams> {
    let (n, d, k) = (data.n() as f64, data.d(), resp.k());
    if prior.alpha.len() != k || prior.m0.len() != d || prior.s0.nrows() != d || prior.s0.ncols() != d {
        return Err(Error::invalid("prior dimensions do not match the model"));
    }
    let stats = component_stats(data, resp, needs_full(kind))?;
    let alpha_total: f64 = prior.alpha.iter().sum();
    let theta_denom = n + alpha_total - k as f64;
    let mut theta = Vec::with_capacity(k);
    for (j, s) in stats.iter().enumerate() {
        let t = (s.weight + prior.alpha[j] - 1.0) / theta_denom;
        if !(t >= 0.0) {
            return Err(Error::InvalidDirichletPrior(j));
        }
        theta.push(t);
    }
    let iota0 = prior.iota0;
    let mut means = Vec::with_capacity(k);
    let mut mats = Vec::with_capacity(k);
    for s in &stats {
        let rj = s.weight;
        if rj == 0.0 {
            means.push(prior.m0.clone());
        } else {
            means.push((&s.weighted_sum + &prior.m0 * iota0) / (rj + iota0));
        }
        let denom = prior.nu0 + rj + d as f64 + 2.0;
        if !(denom > 0.0) {
            return Err(Error::invalid("nu0 + r_j + d + 2 must be positive"));
        }
        let mut m = &prior.s0 + &s.scatter;
        if rj > 0.0 {
            let diff = &s.mean - &prior.m0;
            m += (iota0 * rj / (iota0 + rj)) * &diff * diff.transpose();
        }
        mats.push(m / denom);
    }
    let weights: Vec<f64> = stats.iter().map(|s| s.weight.max(f64::MIN_POSITIVE)).collect();
    let covs = finalize(kind, mats, &weights, reg_floor)?;
    GmmParams::with_normalized_theta(kind, theta, means, covs)
}

/// Dispatch on the estimator.
pub fn m_step(
    data: &Dataset,
    resp: &Responsibilities,
    kind: CovarianceKind,
    estimator: &Estimator,
    reg_floor: f64,
) -> Result<GmmParams> {
    match estimator {
        Estimator::Ml => m_step_ml(data, resp, kind, reg_floor),
        Estimator::Map(prior) => m_step_map(data, resp, kind, prior, reg_floor),
    }
}

/// Pooled per-dimension variance scaled by `k^{-1/d}`, as a diagonal matrix.
pub fn pooled_prior_s0(data: &Dataset, k: usize, reg_floor: f64) -> Result<DMatrix<f64>> {
    if data.n() < 2 {
        return Err(Error::invalid("pooled prior needs at least two samples"));
    }
    if k == 0 {
        return Err(Error::invalid("k must be >= 1"));
    }
    let d = data.d();
    let mean = data.mean();
    let mut var = vec![0.0; d];
    for row in data.rows() {
        for c in 0..d {
            let x = row[c] - mean[c];
            var[c] += x * x;
        }
    }
    let scale = (k as f64).powf(-1.0 / d as f64);
    Ok(DMatrix::from_diagonal(&DVector::from_iterator(
        d,
        var.iter().map(|v| (v / data.n() as f64).max(reg_floor) * scale),
    )))
}

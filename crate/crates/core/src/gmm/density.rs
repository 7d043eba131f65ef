use std::f64::consts::PI;

use rayon::prelude::*;

use super::covariance::Covariance;
use super::dataset::Dataset;
use super::params::GmmParams;
use crate::error::{Error, Result};

/// Rows below this many entries are not worth handing to the thread pool.
const PAR_MIN_ROWS: usize = 256;

/// Log-density of `N(mu, sigma)` at `v`. `log_det` is passed in so callers can
/// use a cached or an estimated value.
pub fn gaussian_log_pdf(v: &[f64], mu: &[f64], sigma: &Covariance, log_det: f64) -> Result<f64> {
    let d = v.len();
    if mu.len() != d || sigma.dim() != d {
        return Err(Error::DimensionMismatch {
            context: "gaussian_log_pdf",
            expected: d,
            found: if mu.len() != d { mu.len() } else { sigma.dim() },
        });
    }
    let diff: Vec<f64> = v.iter().zip(mu).map(|(a, b)| a - b).collect();
    let q = sigma.mahalanobis_sq(&diff);
    Ok(-0.5 * (q + d as f64 * (2.0 * PI).ln() + log_det))
}

/// `log Σ exp(x_i)`, stable under large magnitudes. Empty or all `-∞`
/// input gives `-∞`.
pub fn log_sum_exp(x: &[f64]) -> f64 {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + x.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Softmax with max subtraction. Returns `None` when every entry is `-∞`.
pub fn softmax(x: &[f64]) -> Option<Vec<f64>> {
    let mut out = x.to_vec();
    softmax_in_place(&mut out).then_some(out)
}

fn softmax_in_place(x: &mut [f64]) -> bool {
    let max = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return false;
    }
    let mut total = 0.0;
    for v in x.iter_mut() {
        *v = (*v - max).exp();
        total += *v;
    }
    for v in x.iter_mut() {
        *v /= total;
    }
    true
}

/// Posterior component probabilities, an `n × k` row-stochastic matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Responsibilities {
    n: usize,
    k: usize,
    r: Vec<f64>,
}

impl Responsibilities {
    /// Validate a row-major `n × k` buffer.
    pub fn new(n: usize, k: usize, r: Vec<f64>) -> Result<Self> {
        if r.len() != n * k || k == 0 {
            return Err(Error::DimensionMismatch {
                context: "responsibilities",
                expected: n * k,
                found: r.len(),
            });
        }
        for (i, row) in r.chunks_exact(k).enumerate() {
            let sum: f64 = row.iter().sum();
            if row.iter().any(|v| !(0.0..=1.0).contains(v)) || (sum - 1.0).abs() > 1e-12 {
                return Err(Error::DegenerateResponsibilityRow(i));
            }
        }
        Ok(Self { n, k, r })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let k = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut r = Vec::with_capacity(rows.len() * k);
        for row in rows {
            if row.as_ref().len() != k {
                return Err(Error::DimensionMismatch {
                    context: "responsibility row",
                    expected: k,
                    found: row.as_ref().len(),
                });
            }
            r.extend_from_slice(row.as_ref());
        }
        Self::new(rows.len(), k, r)
    }

    /// One-hot rows from hard labels.
    pub fn from_labels(labels: &[usize], k: usize) -> Result<Self> {
        let mut r = vec![0.0; labels.len() * k];
        for (i, &l) in labels.iter().enumerate() {
            if l >= k {
                return Err(Error::invalid(format!("label {l} out of range for k = {k}")));
            }
            r[i * k + l] = 1.0;
        }
        Self::new(labels.len(), k, r)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.r[i * self.k..(i + 1) * self.k]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.r.chunks_exact(self.k)
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.r[i * self.k + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.r
    }

    /// Column sums `Σ_i r_ij`.
    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.k];
        for row in self.rows() {
            for (s, v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums
    }

    /// Per-row argmax with ties going to the lowest index.
    pub fn argmax(&self) -> Vec<usize> {
        self.rows().map(argmax_first).collect()
    }
}

pub(crate) fn argmax_first(row: &[f64]) -> usize {
    let mut best = 0;
    for (j, &v) in row.iter().enumerate().skip(1) {
        if v > row[best] {
            best = j;
        }
    }
    best
}

fn check_dims(data: &Dataset, params: &GmmParams) -> Result<()> {
    if data.d() != params.d() {
        return Err(Error::DimensionMismatch {
            context: "data vs model dimension",
            expected: params.d(),
            found: data.d(),
        });
    }
    Ok(())
}

fn weighted_row(v: &[f64], params: &GmmParams, log_theta: &[f64], log_dets: &[f64], out: &mut [f64]) {
    for (j, o) in out.iter_mut().enumerate() {
        *o = if log_theta[j] == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            let mu = params.means()[j].as_slice();
            // dimensions were checked up front
            log_theta[j]
                + gaussian_log_pdf(v, mu, &params.covariances()[j], log_dets[j]).unwrap_or(f64::NAN)
        };
    }
}

/// Row-major `n × k` matrix of `log θ_j + log φ(v_i; μ_j, Σ_j)`.
pub fn log_weighted_densities(data: &Dataset, params: &GmmParams) -> Result<Vec<f64>> {
    check_dims(data, params)?;
    let k = params.k();
    let log_theta: Vec<f64> = params.theta().iter().map(|t| t.ln()).collect();
    let log_dets = params.log_dets();
    let mut out = vec![0.0; data.n() * k];
    let fill = |(v, o): (&[f64], &mut [f64])| weighted_row(v, params, &log_theta, &log_dets, o);
    if data.n() >= PAR_MIN_ROWS {
        data.as_slice()
            .par_chunks_exact(data.d())
            .zip(out.par_chunks_exact_mut(k))
            .for_each(fill);
    } else {
        data.rows().zip(out.chunks_exact_mut(k)).for_each(fill);
    }
    if out.iter().any(|v| v.is_nan()) {
        return Err(Error::NonFinite("log densities"));
    }
    Ok(out)
}

/// Normalize each row of a log-weight matrix into responsibilities.
pub fn responsibilities_from_log(n: usize, k: usize, mut logw: Vec<f64>) -> Result<Responsibilities> {
    for (i, row) in logw.chunks_exact_mut(k).enumerate() {
        if !softmax_in_place(row) {
            return Err(Error::DegenerateResponsibilityRow(i));
        }
    }
    Ok(Responsibilities { n, k, r: logw })
}

/// Exact posterior responsibilities, computed in log space.
pub fn responsibilities(data: &Dataset, params: &GmmParams) -> Result<Responsibilities> {
    let logw = log_weighted_densities(data, params)?;
    responsibilities_from_log(data.n(), params.k(), logw)
}

/// Per-sample `log p(v_i | γ)`.
pub fn log_mixture_densities(data: &Dataset, params: &GmmParams) -> Result<Vec<f64>> {
    let logw = log_weighted_densities(data, params)?;
    Ok(logw.chunks_exact(params.k()).map(log_sum_exp).collect())
}

/// `Σ_i log Σ_j θ_j φ(v_i; μ_j, Σ_j)`.
pub fn log_likelihood(data: &Dataset, params: &GmmParams) -> Result<f64> {
    Ok(log_mixture_densities(data, params)?.iter().sum())
}

/// `(1/n) Σ_i p(v_i | γ)`.
pub fn mean_probability(data: &Dataset, params: &GmmParams) -> Result<f64> {
    let logs = log_mixture_densities(data, params)?;
    Ok(logs.iter().map(|l| l.exp()).sum::<f64>() / data.n() as f64)
}

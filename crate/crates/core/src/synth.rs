//! Synthetic mixtures with controlled mean separation, used as ground truth
//! for accuracy scoring and as profiler fixtures.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gmm::{Covariance, CovarianceKind, CovarianceShape, Dataset, GmmParams};
use crate::linalg::dist2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub k: usize,
    pub d: usize,
    pub n: usize,
    /// Minimum pairwise distance between means, in units of `sigma`.
    pub separation: f64,
    /// Largest per-direction standard deviation of any component.
    #[serde(default = "one")]
    pub sigma: f64,
    #[serde(default = "diagonal")]
    pub kind: CovarianceKind,
    #[serde(default)]
    pub seed: u64,
}

fn one() -> f64 {
    1.0
}

fn diagonal() -> CovarianceKind {
    CovarianceKind::Diagonal
}

impl SynthSpec {
    pub fn new(k: usize, d: usize, n: usize, separation: f64) -> Self {
        Self {
            k,
            d,
            n,
            separation,
            sigma: 1.0,
            kind: CovarianceKind::Diagonal,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::invalid("synthetic dataset needs n >= 1"));
        }
        if self.k == 0 || self.d == 0 {
            return Err(Error::invalid("synthetic mixture needs k >= 1 and d >= 1"));
        }
        if !(self.separation >= 0.0 && self.separation.is_finite()) {
            return Err(Error::invalid("separation must be finite and nonnegative"));
        }
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::invalid("sigma must be positive"));
        }
        self.kind.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Synthetic {
    pub data: Dataset,
    pub truth: GmmParams,
    pub labels: Vec<usize>,
}

/// Haar-distributed orthogonal matrix from the QR factorization of a
/// Gaussian matrix, with the sign convention fixed by `R`'s diagonal.
pub fn random_orthogonal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::from_fn(d, d, |_, _| StandardNormal.sample(rng));
    let qr = g.qr();
    let (mut q, r) = qr.unpack();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

fn random_means<R: Rng + ?Sized>(spec: &SynthSpec, rng: &mut R) -> Vec<DVector<f64>> {
    let min_dist = spec.separation * spec.sigma;
    let mut scale = min_dist.max(spec.sigma);
    let mut means: Vec<DVector<f64>> = Vec::with_capacity(spec.k);
    let mut failures = 0;
    while means.len() < spec.k {
        let cand = DVector::from_fn(spec.d, |_, _| scale * Distribution::<f64>::sample(&StandardNormal, rng));
        if means.iter().all(|m| dist2(m.as_slice(), cand.as_slice()) >= min_dist) {
            means.push(cand);
        } else {
            failures += 1;
            if failures % 100 == 0 {
                scale *= 1.5;
            }
        }
    }
    means
}

/// Variances drawn in `[σ²/2, σ²]`.
fn random_variances<R: Rng + ?Sized>(d: usize, sigma: f64, rng: &mut R) -> DVector<f64> {
    DVector::from_fn(d, |_, _| sigma * sigma * rng.random_range(0.5..=1.0))
}

fn random_dense<R: Rng + ?Sized>(d: usize, sigma: f64, rng: &mut R) -> Result<Covariance> {
    let q = random_orthogonal(d, rng);
    let lambda = random_variances(d, sigma, rng);
    Covariance::dense(&q * DMatrix::from_diagonal(&lambda) * q.transpose())
}

fn random_covariances<R: Rng + ?Sized>(spec: &SynthSpec, rng: &mut R) -> Result<Vec<Covariance>> {
    let (k, d, s) = (spec.k, spec.d, spec.sigma);
    match spec.kind {
        CovarianceKind::Full => (0..k).map(|_| random_dense(d, s, rng)).collect(),
        CovarianceKind::Tied => Ok(vec![random_dense(d, s, rng)?; k]),
        CovarianceKind::Diagonal => (0..k).map(|_| Covariance::diagonal(random_variances(d, s, rng))).collect(),
        CovarianceKind::Spherical => (0..k)
            .map(|_| Covariance::spherical(s * s * rng.random_range(0.5..=1.0), d))
            .collect(),
        CovarianceKind::SoftKMeans { beta } => Ok(vec![Covariance::spherical(0.5 / beta, d)?; k]),
    }
}

/// Draw a ground-truth mixture: means at least `separation · σ` apart,
/// weights proportional to `U[1, 2]`.
pub fn random_mixture<R: Rng + ?Sized>(spec: &SynthSpec, rng: &mut R) -> Result<GmmParams> {
    spec.validate()?;
    let raw: Vec<f64> = (0..spec.k).map(|_| rng.random_range(1.0..2.0)).collect();
    let total: f64 = raw.iter().sum();
    let theta = raw.iter().map(|w| w / total).collect();
    let means = random_means(spec, rng);
    let covs = random_covariances(spec, rng)?;
    GmmParams::with_normalized_theta(spec.kind, theta, means, covs)
}

/// Draw `n` labeled samples from a mixture.
pub fn sample_mixture<R: Rng + ?Sized>(params: &GmmParams, n: usize, rng: &mut R) -> Result<(Dataset, Vec<usize>)> {
    if n == 0 {
        return Err(Error::invalid("cannot draw an empty sample"));
    }
    let d = params.d();
    let factors: Vec<DMatrix<f64>> = params
        .covariances()
        .iter()
        .map(|c| match c.shape() {
            CovarianceShape::Dense => c
                .to_dense()
                .cholesky()
                .map(|ch| ch.l())
                .ok_or(Error::NotPositiveDefinite),
            _ => Ok(DMatrix::from_diagonal(&c.variances().map(f64::sqrt))),
        })
        .collect::<Result<_>>()?;
    let mut cdf = Vec::with_capacity(params.k());
    let mut acc = 0.0;
    for t in params.theta() {
        acc += t;
        cdf.push(acc);
    }
    let mut points = Vec::with_capacity(n * d);
    let mut labels = Vec::with_capacity(n);
    for _ in 0..n {
        let u = rng.random::<f64>() * acc;
        let j = cdf.partition_point(|&c| c <= u).min(params.k() - 1);
        let z = DVector::from_fn(d, |_, _| StandardNormal.sample(rng));
        let x = &params.means()[j] + &factors[j] * z;
        points.extend(x.iter());
        labels.push(j);
    }
    Ok((Dataset::new(n, d, points)?, labels))
}

/// Mixture and dataset from one seeded stream.
pub fn generate(spec: &SynthSpec) -> Result<Synthetic> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let truth = random_mixture(spec, &mut rng)?;
    let (data, labels) = sample_mixture(&truth, spec.n, &mut rng)?;
    Ok(Synthetic { data, truth, labels })
}

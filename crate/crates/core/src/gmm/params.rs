use nalgebra::DVector;

use super::covariance::{Covariance, CovarianceKind};
use crate::error::{Error, Result};

/// Tolerance on `Σθ = 1`.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Mixture parameters `(θ, μ, Σ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GmmParams {
    kind: CovarianceKind,
    theta: Vec<f64>,
    means: Vec<DVector<f64>>,
    covariances: Vec<Covariance>,
}

impl GmmParams {
    pub fn new(
        kind: CovarianceKind,
        theta: Vec<f64>,
        means: Vec<DVector<f64>>,
        covariances: Vec<Covariance>,
    ) -> Result<Self> {
        kind.validate()?;
        let k = theta.len();
        if k == 0 {
            return Err(Error::invalid("a mixture needs at least one component"));
        }
        for (context, found) in [("means", means.len()), ("covariances", covariances.len())] {
            if found != k {
                return Err(Error::DimensionMismatch {
                    context,
                    expected: k,
                    found,
                });
            }
        }
        if theta.iter().any(|t| !t.is_finite() || *t < 0.0) {
            return Err(Error::invalid("mixing weights must be finite and nonnegative"));
        }
        let total: f64 = theta.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL {
            return Err(Error::invalid(format!("mixing weights sum to {total}, not 1")));
        }
        let d = means[0].len();
        if d == 0 {
            return Err(Error::invalid("dimension must be >= 1"));
        }
        for m in &means {
            if m.len() != d {
                return Err(Error::DimensionMismatch {
                    context: "mean",
                    expected: d,
                    found: m.len(),
                });
            }
            if m.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("mean"));
            }
        }
        for c in &covariances {
            if c.dim() != d {
                return Err(Error::DimensionMismatch {
                    context: "covariance",
                    expected: d,
                    found: c.dim(),
                });
            }
            if c.shape() != kind.shape() {
                return Err(Error::invalid(format!(
                    "covariance storage does not match kind {}",
                    kind.name()
                )));
            }
        }
        match kind {
            CovarianceKind::Tied if covariances.iter().any(|c| c != &covariances[0]) => {
                return Err(Error::invalid("tied covariances must be identical"));
            }
            CovarianceKind::SoftKMeans { beta } => {
                let fixed = 1.0 / (2.0 * beta);
                if covariances.iter().any(|c| c.variances().iter().any(|v| *v != fixed)) {
                    return Err(Error::invalid("soft k-means covariances must equal I/(2β)"));
                }
            }
            _ => {}
        }
        Ok(Self {
            kind,
            theta,
            means,
            covariances,
        })
    }

    /// Build while renormalizing θ by its sum. Used where weights are
    /// computed from floating-point sums that may drift by a few ulps.
    pub fn with_normalized_theta(
        kind: CovarianceKind,
        mut theta: Vec<f64>,
        means: Vec<DVector<f64>>,
        covariances: Vec<Covariance>,
    ) -> Result<Self> {
        let total: f64 = theta.iter().sum();
        if !(total > 0.0 && total.is_finite()) {
            return Err(Error::NoiseDestroysSimplex);
        }
        theta.iter_mut().for_each(|t| *t /= total);
        Self::new(kind, theta, means, covariances)
    }

    pub fn k(&self) -> usize {
        self.theta.len()
    }

    pub fn d(&self) -> usize {
        self.means[0].len()
    }

    pub fn kind(&self) -> CovarianceKind {
        self.kind
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn means(&self) -> &[DVector<f64>] {
        &self.means
    }

    pub fn covariances(&self) -> &[Covariance] {
        &self.covariances
    }

    pub fn log_dets(&self) -> Vec<f64> {
        self.covariances.iter().map(Covariance::log_det).collect()
    }

    /// Replace the mixing weights, keeping everything else.
    pub fn with_theta(&self, theta: Vec<f64>) -> Result<Self> {
        Self::new(self.kind, theta, self.means.clone(), self.covariances.clone())
    }

    pub fn into_parts(self) -> (CovarianceKind, Vec<f64>, Vec<DVector<f64>>, Vec<Covariance>) {
        (self.kind, self.theta, self.means, self.covariances)
    }
}

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gmm::{CovarianceKind, Dataset};

use super::mstep::pooled_prior_s0;

/// Default stopping tolerance.
pub const DEFAULT_EPS_TAU: f64 = 7e-3;
/// Default iteration cap.
pub const DEFAULT_MAX_ITERS: usize = 70;
/// Automatic regularization floor as a fraction of the mean data variance.
pub const AUTO_FLOOR_FRACTION: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum InitStrategy {
    /// k distinct random rows as means, global covariance, uniform weights.
    RandomEm,
    /// D²-sampled seeds refined by `rounds` Lloyd iterations.
    KMeansPP { rounds: usize },
    /// Best of `restarts` random starts after `burn_iters` EM steps each.
    SmallEm { restarts: usize, burn_iters: usize },
    /// One classification EM step (E, hard assign, M) from a random start.
    Cem,
}

impl Default for InitStrategy {
    fn default() -> Self {
        InitStrategy::KMeansPP { rounds: 10 }
    }
}

impl InitStrategy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            InitStrategy::SmallEm { restarts, burn_iters } if restarts == 0 || burn_iters == 0 => {
                Err(Error::invalid("small-EM needs restarts >= 1 and burn_iters >= 1"))
            }
            _ => Ok(()),
        }
    }
}

/// Dirichlet prior on weights and Normal-inverse-Wishart prior on each
/// `(μ_j, Σ_j)`. Fields are public so degenerate limits can be studied;
/// [`MapPrior::validate`] enforces the proper-prior contract.
#[derive(Debug, Clone, PartialEq)]
pub struct MapPrior {
    pub alpha: Vec<f64>,
    pub m0: DVector<f64>,
    pub iota0: f64,
    pub nu0: f64,
    pub s0: DMatrix<f64>,
}

impl MapPrior {
    /// Weakly informative defaults: flat Dirichlet, prior mean at the data
    /// mean, `ι₀ = 0.01`, `ν₀ = d + 2` and the pooled-variance scale matrix.
    pub fn pooled(data: &Dataset, k: usize, reg_floor: f64) -> Result<Self> {
        let d = data.d();
        Ok(Self {
            alpha: vec![1.0; k],
            m0: DVector::from_vec(data.mean()),
            iota0: 0.01,
            nu0: d as f64 + 2.0,
            s0: pooled_prior_s0(data, k, reg_floor)?,
        })
    }

    pub fn validate(&self, k: usize, d: usize) -> Result<()> {
        if self.alpha.len() != k {
            return Err(Error::DimensionMismatch {
                context: "Dirichlet prior",
                expected: k,
                found: self.alpha.len(),
            });
        }
        if self.m0.len() != d || self.s0.nrows() != d || self.s0.ncols() != d {
            return Err(Error::DimensionMismatch {
                context: "NIW prior",
                expected: d,
                found: if self.m0.len() != d { self.m0.len() } else { self.s0.nrows() },
            });
        }
        if let Some(j) = self.alpha.iter().position(|a| !(*a >= 1.0)) {
            return Err(Error::InvalidDirichletPrior(j));
        }
        if !(self.iota0 > 0.0) {
            return Err(Error::invalid("iota0 must be positive"));
        }
        if !(self.nu0 > d as f64 + 1.0) {
            return Err(Error::invalid("nu0 must exceed d + 1"));
        }
        if self.s0.clone().cholesky().is_none() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Estimator {
    Ml,
    Map(MapPrior),
}

/// Statistic the stopping rule compares between iterations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StoppingRule {
    /// Average log-likelihood without noise, mean probability with noise.
    #[default]
    Auto,
    /// `|ℓᵗ − ℓᵗ⁻¹| / n < ε_τ`.
    AvgLogLikelihood,
    /// `|E[p]ᵗ − E[p]ᵗ⁻¹| < ε_τ`.
    MeanProbability,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitConfig {
    pub k: usize,
    pub kind: CovarianceKind,
    pub eps_tau: f64,
    pub max_iters: usize,
    /// Covariance eigenvalue floor. `None` means
    /// `AUTO_FLOOR_FRACTION × mean data variance`.
    pub reg_floor: Option<f64>,
    pub init: InitStrategy,
    pub seed: u64,
    pub estimator: Estimator,
    pub stopping: StoppingRule,
}

impl FitConfig {
    pub fn new(k: usize, kind: CovarianceKind) -> Self {
        Self {
            k,
            kind,
            eps_tau: DEFAULT_EPS_TAU,
            max_iters: DEFAULT_MAX_ITERS,
            reg_floor: None,
            init: InitStrategy::default(),
            seed: 0,
            estimator: Estimator::Ml,
            stopping: StoppingRule::Auto,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(Error::invalid("k must be >= 1"));
        }
        if !(self.eps_tau > 0.0) {
            return Err(Error::invalid("eps_tau must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::invalid("max_iters must be >= 1"));
        }
        if let Some(f) = self.reg_floor {
            if !(f > 0.0 && f.is_finite()) {
                return Err(Error::invalid("reg_floor must be positive"));
            }
        }
        self.kind.validate()?;
        self.init.validate()
    }

    /// The eigenvalue floor that applies to `data`.
    pub fn resolve_floor(&self, data: &Dataset) -> f64 {
        self.reg_floor.unwrap_or_else(|| auto_floor(data))
    }
}

pub(crate) fn auto_floor(data: &Dataset) -> f64 {
    let var = data.mean_variance();
    if var > 0.0 {
        AUTO_FLOOR_FRACTION * var
    } else {
        AUTO_FLOOR_FRACTION
    }
}

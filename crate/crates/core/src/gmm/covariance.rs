use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{from_eigen, is_symmetric, sym_eigen, symmetrize};

/// Structural constraint shared by all components of a mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum CovarianceKind {
    Full,
    Diagonal,
    Spherical,
    Tied,
    /// Every component uses the fixed covariance `I / (2β)`.
    SoftKMeans { beta: f64 },
}

impl CovarianceKind {
    pub fn validate(&self) -> Result<()> {
        match *self {
            CovarianceKind::SoftKMeans { beta } if !(beta > 0.0 && beta.is_finite()) => {
                Err(Error::invalid(format!("stiffness must be positive, got {beta}")))
            }
            _ => Ok(()),
        }
    }

    /// Storage shape a covariance of this kind must have.
    pub fn shape(&self) -> CovarianceShape {
        match self {
            CovarianceKind::Full | CovarianceKind::Tied => CovarianceShape::Dense,
            CovarianceKind::Diagonal => CovarianceShape::Diagonal,
            CovarianceKind::Spherical | CovarianceKind::SoftKMeans { .. } => {
                CovarianceShape::Spherical
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            CovarianceKind::Full => "full",
            CovarianceKind::Diagonal => "diagonal",
            CovarianceKind::Spherical => "spherical",
            CovarianceKind::Tied => "tied",
            CovarianceKind::SoftKMeans { .. } => "soft-kmeans",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CovarianceShape {
    Dense,
    Diagonal,
    Spherical,
}

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    /// Symmetric matrix plus its lower Cholesky factor.
    Dense {
        matrix: DMatrix<f64>,
        chol: DMatrix<f64>,
    },
    Diagonal(DVector<f64>),
    Spherical { variance: f64, dim: usize },
}

/// A symmetric positive definite covariance matrix. Immutable: the cached
/// log-determinant is computed once at construction and can never go stale.
#[derive(Debug, Clone, PartialEq)]
pub struct Covariance {
    repr: Repr,
    log_det: f64,
}

impl Covariance {
    pub fn dense(matrix: DMatrix<f64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::invalid("covariance must be a nonempty square matrix"));
        }
        if matrix.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("covariance"));
        }
        if !is_symmetric(&matrix, 1e-9) {
            return Err(Error::NotPositiveDefinite);
        }
        let matrix = symmetrize(&matrix);
        let chol = matrix
            .clone()
            .cholesky()
            .ok_or(Error::NotPositiveDefinite)?
            .unpack();
        let log_det = 2.0 * chol.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        if !log_det.is_finite() {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Self {
            repr: Repr::Dense { matrix, chol },
            log_det,
        })
    }

    pub fn diagonal(variances: DVector<f64>) -> Result<Self> {
        if variances.is_empty() {
            return Err(Error::invalid("covariance dimension must be >= 1"));
        }
        if variances.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::NotPositiveDefinite);
        }
        let log_det = variances.iter().map(|v| v.ln()).sum();
        Ok(Self {
            repr: Repr::Diagonal(variances),
            log_det,
        })
    }

    pub fn spherical(variance: f64, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("covariance dimension must be >= 1"));
        }
        if !(variance.is_finite() && variance > 0.0) {
            return Err(Error::NotPositiveDefinite);
        }
        Ok(Self {
            repr: Repr::Spherical { variance, dim },
            log_det: dim as f64 * variance.ln(),
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self::spherical(1.0, dim).expect("identity is SPD")
    }

    /// Build a covariance of the given storage shape from a dense symmetric
    /// matrix, projecting onto the shape (Diagonal keeps the diagonal,
    /// Spherical keeps trace/d) and flooring eigenvalues at `floor`.
    pub fn project(matrix: &DMatrix<f64>, shape: CovarianceShape, floor: f64) -> Result<Self> {
        let d = matrix.nrows();
        match shape {
            CovarianceShape::Dense => {
                let (values, vectors) = sym_eigen(matrix);
                if values.iter().all(|&v| v >= floor) {
                    return Self::dense(symmetrize(matrix));
                }
                let clamped = values.map(|v| v.max(floor));
                Self::dense(from_eigen(&clamped, &vectors))
            }
            CovarianceShape::Diagonal => {
                Self::diagonal(DVector::from_iterator(d, matrix.diagonal().iter().map(|v| v.max(floor))))
            }
            CovarianceShape::Spherical => {
                let var = matrix.trace() / d as f64;
                Self::spherical(var.max(floor), d)
            }
        }
    }

    pub fn dim(&self) -> usize {
        match &self.repr {
            Repr::Dense { matrix, .. } => matrix.nrows(),
            Repr::Diagonal(v) => v.len(),
            Repr::Spherical { dim, .. } => *dim,
        }
    }

    pub fn shape(&self) -> CovarianceShape {
        match &self.repr {
            Repr::Dense { .. } => CovarianceShape::Dense,
            Repr::Diagonal(_) => CovarianceShape::Diagonal,
            Repr::Spherical { .. } => CovarianceShape::Spherical,
        }
    }

    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// `xᵀ Σ⁻¹ x` through the factorization.
    pub fn mahalanobis_sq(&self, x: &[f64]) -> f64 {
        match &self.repr {
            Repr::Dense { chol, .. } => {
                // forward substitution L y = x
                let d = x.len();
                let mut y = vec![0.0; d];
                let mut acc = 0.0;
                for i in 0..d {
                    let mut s = x[i];
                    for j in 0..i {
                        s -= chol[(i, j)] * y[j];
                    }
                    y[i] = s / chol[(i, i)];
                    acc += y[i] * y[i];
                }
                acc
            }
            Repr::Diagonal(v) => x.iter().zip(v.iter()).map(|(a, s)| a * a / s).sum(),
            Repr::Spherical { variance, .. } => x.iter().map(|a| a * a).sum::<f64>() / variance,
        }
    }

    /// `Σ⁻¹ b`.
    pub fn solve(&self, b: &[f64]) -> DVector<f64> {
        match &self.repr {
            Repr::Dense { chol, .. } => {
                let l = nalgebra::Cholesky::pack_dirty(chol.clone());
                l.solve(&DVector::from_column_slice(b))
            }
            Repr::Diagonal(v) => DVector::from_iterator(b.len(), b.iter().zip(v.iter()).map(|(a, s)| a / s)),
            Repr::Spherical { variance, .. } => DVector::from_iterator(b.len(), b.iter().map(|a| a / variance)),
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        match &self.repr {
            Repr::Dense { matrix, .. } => matrix.clone(),
            Repr::Diagonal(v) => DMatrix::from_diagonal(v),
            Repr::Spherical { variance, dim } => DMatrix::from_diagonal_element(*dim, *dim, *variance),
        }
    }

    /// Eigenvalues sorted ascending.
    pub fn eigenvalues(&self) -> DVector<f64> {
        match &self.repr {
            Repr::Dense { matrix, .. } => sym_eigen(matrix).0,
            Repr::Diagonal(v) => {
                let mut vals: Vec<f64> = v.iter().copied().collect();
                vals.sort_by(f64::total_cmp);
                DVector::from_vec(vals)
            }
            Repr::Spherical { variance, dim } => DVector::from_element(*dim, *variance),
        }
    }

    pub fn spectral_norm(&self) -> f64 {
        self.eigenvalues().max()
    }

    /// Apply `f(index, eigenvalue)` to the spectrum while keeping the
    /// eigenbasis and storage shape. Diagonal entries are indexed in storage
    /// order; dense eigenvalues ascending; a spherical covariance has a single
    /// shared eigenvalue at index 0. Returns `self` unchanged when `f` is the
    /// identity on every eigenvalue.
    pub fn map_spectrum(&self, mut f: impl FnMut(usize, f64) -> f64) -> Result<Self> {
        match &self.repr {
            Repr::Dense { matrix, .. } => {
                let (values, vectors) = sym_eigen(matrix);
                let mapped = DVector::from_iterator(
                    values.len(),
                    values.iter().enumerate().map(|(i, &v)| f(i, v)),
                );
                if mapped == values {
                    return Ok(self.clone());
                }
                Self::dense(from_eigen(&mapped, &vectors))
            }
            Repr::Diagonal(v) => {
                let mapped = DVector::from_iterator(v.len(), v.iter().enumerate().map(|(i, &x)| f(i, x)));
                if &mapped == v {
                    return Ok(self.clone());
                }
                Self::diagonal(mapped)
            }
            Repr::Spherical { variance, dim } => {
                let mapped = f(0, *variance);
                if mapped == *variance {
                    return Ok(self.clone());
                }
                Self::spherical(mapped, *dim)
            }
        }
    }

    /// Number of independent eigenvalues `map_spectrum` visits.
    pub fn spectrum_len(&self) -> usize {
        match &self.repr {
            Repr::Spherical { .. } => 1,
            _ => self.dim(),
        }
    }

    /// Diagonal variances for Diagonal storage, the scalar for Spherical.
    pub fn variances(&self) -> DVector<f64> {
        match &self.repr {
            Repr::Dense { matrix, .. } => matrix.diagonal(),
            Repr::Diagonal(v) => v.clone(),
            Repr::Spherical { variance, dim } => DVector::from_element(*dim, *variance),
        }
    }

    /// `c · Σ` for `c > 0`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        match &self.repr {
            Repr::Dense { matrix, .. } => Self::dense(matrix * c),
            Repr::Diagonal(v) => Self::diagonal(v * c),
            Repr::Spherical { variance, dim } => Self::spherical(variance * c, *dim),
        }
    }

    pub fn frobenius_distance(&self, other: &Covariance) -> f64 {
        (self.to_dense() - other.to_dense()).norm()
    }
}

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::norm2;

/// An `n × d` sample matrix stored row-major, one sample per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    n: usize,
    d: usize,
    points: Vec<f64>,
    row_norms: Vec<f64>,
    normalized: bool,
}

impl Dataset {
    /// Build from a row-major buffer of `n * d` values.
    pub fn new(n: usize, d: usize, points: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::invalid("dataset needs n >= 1 and d >= 1"));
        }
        if points.len() != n * d {
            return Err(Error::DimensionMismatch {
                context: "dataset buffer",
                expected: n * d,
                found: points.len(),
            });
        }
        if points.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("dataset"));
        }
        let row_norms = points.chunks_exact(d).map(norm2).collect();
        Ok(Self {
            n,
            d,
            points,
            row_norms,
            normalized: false,
        })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let d = rows.first().map(|r| r.as_ref().len()).unwrap_or(0);
        let mut points = Vec::with_capacity(rows.len() * d);
        for r in rows {
            let r = r.as_ref();
            if r.len() != d {
                return Err(Error::DimensionMismatch {
                    context: "dataset row",
                    expected: d,
                    found: r.len(),
                });
            }
            points.extend_from_slice(r);
        }
        Self::new(rows.len(), d, points)
    }

    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        let mut points = Vec::with_capacity(m.len());
        for i in 0..m.nrows() {
            points.extend(m.row(i).iter().copied());
        }
        Self::new(m.nrows(), m.ncols(), points)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.points[i * self.d..(i + 1) * self.d]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.points.chunks_exact(self.d)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.points
    }

    pub fn row_norms(&self) -> &[f64] {
        &self.row_norms
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(self.n, self.d, &self.points)
    }

    /// Rescale so that the shortest sample has unit norm.
    pub fn normalize(&self) -> Result<Dataset> {
        let min = self.min_norm()?;
        let mut out = self.scaled(1.0 / min);
        out.normalized = true;
        Ok(out)
    }

    /// Largest squared row norm after normalizing the shortest row to 1.
    pub fn eta(&self) -> Result<f64> {
        let min = self.min_norm()?;
        let max = self.row_norms.iter().copied().fold(0.0, f64::max);
        if self.normalized {
            Ok(max * max)
        } else {
            Ok((max / min).powi(2))
        }
    }

    fn min_norm(&self) -> Result<f64> {
        let (idx, min) = self
            .row_norms
            .iter()
            .copied()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("dataset is nonempty");
        if min <= 0.0 {
            return Err(Error::ZeroNormSample(idx));
        }
        Ok(min)
    }

    pub fn scaled(&self, c: f64) -> Dataset {
        let points: Vec<f64> = self.points.iter().map(|v| v * c).collect();
        Dataset {
            n: self.n,
            d: self.d,
            row_norms: points.chunks_exact(self.d).map(norm2).collect(),
            points,
            normalized: false,
        }
    }

    /// Stack `other` below `self`.
    pub fn concat(&self, other: &Dataset) -> Result<Dataset> {
        if other.d != self.d {
            return Err(Error::DimensionMismatch {
                context: "dataset concat",
                expected: self.d,
                found: other.d,
            });
        }
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        Dataset::new(self.n + other.n, self.d, points)
    }

    /// Keep the first `n` rows.
    pub fn head(&self, n: usize) -> Result<Dataset> {
        let n = n.min(self.n);
        Dataset::new(n, self.d, self.points[..n * self.d].to_vec())
    }

    /// Per-dimension mean.
    pub fn mean(&self) -> Vec<f64> {
        let mut mean = vec![0.0; self.d];
        for row in self.rows() {
            for (m, v) in mean.iter_mut().zip(row) {
                *m += v;
            }
        }
        mean.iter_mut().for_each(|m| *m /= self.n as f64);
        mean
    }

    /// Population covariance (divides by `n`).
    pub fn covariance(&self) -> DMatrix<f64> {
        let mean = self.mean();
        let mut cov = DMatrix::zeros(self.d, self.d);
        let mut centered = vec![0.0; self.d];
        for row in self.rows() {
            for (c, (v, m)) in centered.iter_mut().zip(row.iter().zip(&mean)) {
                *c = v - m;
            }
            for a in 0..self.d {
                for b in a..self.d {
                    cov[(a, b)] += centered[a] * centered[b];
                }
            }
        }
        for a in 0..self.d {
            for b in a..self.d {
                let v = cov[(a, b)] / self.n as f64;
                cov[(a, b)] = v;
                cov[(b, a)] = v;
            }
        }
        cov
    }

    /// Mean of the per-dimension population variances.
    pub fn mean_variance(&self) -> f64 {
        let cov = self.covariance();
        cov.diagonal().iter().sum::<f64>() / self.d as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_empty_and_non_finite() {
        assert!(Dataset::new(0, 2, vec![]).is_err());
        assert!(Dataset::new(1, 2, vec![1.0, f64::NAN]).is_err());
        assert!(Dataset::from_rows(&[vec![1.0, 2.0], vec![1.0]]).is_err());
    }

    #[test]
    fn eta_of_unit_rows_is_one() {
        let ds = Dataset::from_rows(&[vec![1.0, 0.0], vec![0.0, -1.0]]).unwrap();
        assert_eq!(ds.eta().unwrap(), 1.0);
    }

    #[test]
    fn eta_of_norms_one_and_two_is_four() {
        let ds = Dataset::from_rows(&[vec![3.0, 0.0], vec![0.0, 6.0]]).unwrap();
        assert!((ds.eta().unwrap() - 4.0).abs() < 1e-12);
        let norm = ds.normalize().unwrap();
        assert!(norm.is_normalized());
        let min = norm.row_norms().iter().copied().fold(f64::INFINITY, f64::min);
        assert!((min - 1.0).abs() < 1e-9);
        assert!((norm.eta().unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn zero_row_has_no_eta() {
        let ds = Dataset::from_rows(&[vec![1.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert_eq!(ds.eta(), Err(Error::ZeroNormSample(1)));
    }

    #[test]
    fn population_moments() {
        let ds = Dataset::from_rows(&[[0.0], [1.0], [2.0], [3.0]]).unwrap();
        assert_eq!(ds.mean(), vec![1.5]);
        assert!((ds.covariance()[(0, 0)] - 1.25).abs() < 1e-15);
    }
}

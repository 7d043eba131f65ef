//! File formats: sample CSV, model JSON and small helpers around them.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use qemlab::gmm::{Covariance, CovarianceKind, CovarianceShape, Dataset, GmmParams};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

pub const MODEL_SCHEMA: u32 = 1;

pub fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

pub fn write_text(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::config(e.to_string()))?;
    text.push('\n');
    write_text(path, &text)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

/// Samples with a header row, one sample per line.
pub fn read_dataset(path: &Path) -> CliResult<Dataset> {
    let file = fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(file);
    let bad = |line: u64, msg: String| CliError::config(format!("{}:{line}: {msg}", path.display()));
    let d = reader.headers().map_err(|e| bad(1, e.to_string()))?.len();
    let mut points = Vec::new();
    let mut n = 0;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            bad(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != d {
            return Err(bad(line, format!("expected {d} fields, found {}", record.len())));
        }
        for field in record.iter() {
            let v: f64 = field
                .parse()
                .map_err(|_| bad(line, format!("cannot parse '{field}' as a number")))?;
            points.push(v);
        }
        n += 1;
    }
    if n == 0 {
        return Err(bad(1, "no samples".into()));
    }
    Dataset::new(n, d, points).map_err(|e| CliError::config(format!("{}: {e}", path.display())))
}

/// Header `f0..f{d-1}`; every value with 17 significant digits so the file
/// parses back to the same bits.
pub fn write_dataset(path: &Path, data: &Dataset) -> CliResult<()> {
    let mut out = String::with_capacity(data.n() * data.d() * 24);
    let header: Vec<String> = (0..data.d()).map(|j| format!("f{j}")).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in data.rows() {
        let fields: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    write_text(path, &out)
}

/// Covariance storage: dense for full and tied, per-dimension variances for
/// diagonal, one variance for spherical and soft k-means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CovarianceJson {
    Scalar(f64),
    Vector(Vec<f64>),
    Dense(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelFile {
    pub schema: u32,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub k: usize,
    pub d: usize,
    pub theta: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub covariances: Vec<CovarianceJson>,
    pub log_dets: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub iterations: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub converged: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimator: Option<String>,
    /// Iterations whose log-likelihood fell, possible only under noise.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub non_monotone_iterations: Vec<usize>,
    /// Generating component of each sample, written by `synth`.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub labels: Vec<usize>,
}

pub fn parse_kind(name: &str, beta: Option<f64>) -> CliResult<CovarianceKind> {
    let kind = match name {
        "full" => CovarianceKind::Full,
        "diagonal" => CovarianceKind::Diagonal,
        "spherical" => CovarianceKind::Spherical,
        "tied" => CovarianceKind::Tied,
        "soft-kmeans" => CovarianceKind::SoftKMeans {
            beta: beta.ok_or_else(|| CliError::config("kind 'soft-kmeans' needs beta"))?,
        },
        other => {
            return Err(CliError::config(format!(
                "unknown covariance kind '{other}'; expected full, diagonal, spherical, tied or soft-kmeans"
            )))
        }
    };
    kind.validate()?;
    Ok(kind)
}

fn beta_of(kind: CovarianceKind) -> Option<f64> {
    match kind {
        CovarianceKind::SoftKMeans { beta } => Some(beta),
        _ => None,
    }
}

impl ModelFile {
    pub fn from_params(params: &GmmParams) -> Self {
        let covariances = params
            .covariances()
            .iter()
            .map(|c| match c.shape() {
                CovarianceShape::Dense => {
                    let m = c.to_dense();
                    CovarianceJson::Dense(m.row_iter().map(|r| r.iter().copied().collect()).collect())
                }
                CovarianceShape::Diagonal => CovarianceJson::Vector(c.variances().iter().copied().collect()),
                CovarianceShape::Spherical => CovarianceJson::Scalar(c.variances()[0]),
            })
            .collect();
        Self {
            schema: MODEL_SCHEMA,
            kind: params.kind().name().to_string(),
            beta: beta_of(params.kind()),
            k: params.k(),
            d: params.d(),
            theta: params.theta().to_vec(),
            means: params.means().iter().map(|m| m.iter().copied().collect()).collect(),
            covariances,
            log_dets: params.log_dets(),
            iterations: None,
            converged: None,
            estimator: None,
            non_monotone_iterations: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn to_params(&self) -> CliResult<GmmParams> {
        if self.schema != MODEL_SCHEMA {
            return Err(CliError::config(format!("unsupported model schema {}", self.schema)));
        }
        let kind = parse_kind(&self.kind, self.beta)?;
        let d = self.d;
        if self.means.len() != self.k || self.covariances.len() != self.k || self.means.iter().any(|m| m.len() != d) {
            return Err(CliError::config("model arrays do not match k and d"));
        }
        let covs = self
            .covariances
            .iter()
            .map(|c| -> CliResult<Covariance> {
                Ok(match (kind.shape(), c) {
                    (CovarianceShape::Dense, CovarianceJson::Dense(rows)) => {
                        if rows.len() != d || rows.iter().any(|r| r.len() != d) {
                            return Err(CliError::config("dense covariance is not d × d"));
                        }
                        Covariance::dense(DMatrix::from_fn(d, d, |i, j| rows[i][j]))?
                    }
                    (CovarianceShape::Diagonal, CovarianceJson::Vector(v)) if v.len() == d => {
                        Covariance::diagonal(DVector::from_column_slice(v))?
                    }
                    (CovarianceShape::Spherical, CovarianceJson::Scalar(s)) => Covariance::spherical(*s, d)?,
                    _ => {
                        return Err(CliError::config(format!(
                            "covariance layout does not match kind '{}'",
                            self.kind
                        )))
                    }
                })
            })
            .collect::<CliResult<Vec<_>>>()?;
        let means = self.means.iter().map(|m| DVector::from_column_slice(m)).collect();
        Ok(GmmParams::new(kind, self.theta.clone(), means, covs)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use qemlab::synth::{generate, SynthSpec};

    #[test]
    fn model_file_round_trips_every_kind() {
        let kinds = [
            CovarianceKind::Full,
            CovarianceKind::Diagonal,
            CovarianceKind::Spherical,
            CovarianceKind::SoftKMeans { beta: 0.5 },
        ];
        for kind in kinds {
            let mut spec = SynthSpec::new(3, 4, 10, 3.0);
            spec.kind = kind;
            let truth = generate(&spec).unwrap().truth;
            let file = ModelFile::from_params(&truth);
            let text = serde_json::to_string(&file).unwrap();
            let back: ModelFile = serde_json::from_str(&text).unwrap();
            assert_eq!(back, file);
            let params = back.to_params().unwrap();
            assert_eq!(params.kind(), kind);
            assert_eq!(params.means(), truth.means());
            for (a, b) in params.covariances().iter().zip(truth.covariances()) {
                assert_eq!(a.to_dense(), b.to_dense());
            }
        }
    }

    #[test]
    fn mismatched_layout_is_rejected() {
        let truth = generate(&SynthSpec::new(2, 3, 10, 3.0)).unwrap().truth;
        let mut file = ModelFile::from_params(&truth);
        file.kind = "spherical".into();
        assert!(file.to_params().is_err());
        file.kind = "mystery".into();
        assert!(file.to_params().is_err());
    }
}

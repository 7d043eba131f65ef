use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::gmm::Dataset;

/// Exponents `p` over which `μ` is minimized.
pub const MU_P_SET: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

/// Singular values in descending order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// `σ_max / σ_min` over singular values above `threshold`, or over the
/// numerically nonzero ones without a threshold.
pub fn condition_number(m: &DMatrix<f64>, threshold: Option<f64>) -> Result<f64> {
    if m.is_empty() || m.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroMatrix);
    }
    let s = singular_values(m);
    let numeric_zero = s[0] * m.nrows().max(m.ncols()) as f64 * f64::EPSILON;
    let cut = threshold.map_or(numeric_zero, |t| t.max(numeric_zero));
    let kept: Vec<f64> = s.into_iter().filter(|v| *v > cut).collect();
    match (kept.first(), kept.last()) {
        (Some(max), Some(min)) => Ok(max / min),
        _ => Err(Error::NoSingularValueAboveThreshold(threshold.unwrap_or(cut))),
    }
}

/// `Σ_j |x_j|^q`, with `q = 0` counting nonzeros.
fn pow_sum(xs: impl Iterator<Item = f64>, q: f64) -> f64 {
    if q == 0.0 {
        xs.filter(|x| *x != 0.0).count() as f64
    } else {
        xs.map(|x| x.abs().powf(q)).sum()
    }
}

/// Minimize over `P` given the unnormalized Frobenius norm, the spectral
/// norm and the row/column power sums `rows(q) = max_i ‖m_i‖_q^q`.
fn mu_from_parts(frob: f64, spectral: f64, rows: impl Fn(f64) -> f64, cols: impl Fn(f64) -> f64) -> f64 {
    // Dividing the matrix by s scales a q-power sum by s^{-q}; the two
    // exponents 2p and 2(1-p) always add up to 2.
    MU_P_SET
        .iter()
        .map(|&p| (rows(2.0 * p) * cols(2.0 * (1.0 - p))).sqrt() / spectral)
        .fold(frob / spectral, f64::min)
}

/// `μ(M) = min(‖M‖_F, min_{p∈P} √(s_{2p}(M) s_{2(1−p)}(Mᵀ)))` after scaling
/// `M` to unit spectral norm, where `s_q(M) = max_i ‖m_i‖_q^q`.
pub fn mu_param(m: &DMatrix<f64>) -> Result<f64> {
    if m.is_empty() || m.iter().all(|v| *v == 0.0) {
        return Err(Error::ZeroMatrix);
    }
    let spectral = singular_values(m)[0];
    let rows = |q: f64| {
        m.row_iter()
            .map(|r| pow_sum(r.iter().copied(), q))
            .fold(0.0, f64::max)
    };
    let cols = |q: f64| {
        m.column_iter()
            .map(|c| pow_sum(c.iter().copied(), q))
            .fold(0.0, f64::max)
    };
    Ok(mu_from_parts(m.norm(), spectral, rows, cols))
}

/// Same as [`mu_param`] for a dataset matrix.
pub fn mu_param_rows(data: &Dataset) -> Result<f64> {
    mu_param(&data.matrix())
}

/// The `n × d²` matrix whose `i`-th row is `vec(v_i v_iᵀ)`.
pub fn v_prime(data: &Dataset) -> DMatrix<f64> {
    let d = data.d();
    let mut m = DMatrix::zeros(data.n(), d * d);
    for (i, v) in data.rows().enumerate() {
        for a in 0..d {
            for b in 0..d {
                m[(i, a * d + b)] = v[a] * v[b];
            }
        }
    }
    m
}

/// `μ(V′)` without materializing `V′`.
///
/// Row power sums factor as `(Σ_a |v_a|^q)²`, column power sums as
/// `Σ_i |v_ia v_ib|^q`, and `‖V′‖₂` comes from power iteration on
/// `Y ↦ Σ_i (v_iᵀ Y v_i) v_i v_iᵀ`, which is `V′ᵀV′` acting on `vec(Y)`.
pub fn mu_v_prime(data: &Dataset) -> Result<f64> {
    let d = data.d();
    let frob = data.row_norms().iter().map(|r| r.powi(4)).sum::<f64>().sqrt();
    if frob == 0.0 {
        return Err(Error::ZeroMatrix);
    }
    let spectral = v_prime_spectral_norm(data);
    let rows = |q: f64| {
        data.rows()
            .map(|v| pow_sum(v.iter().copied(), q).powi(2))
            .fold(0.0, f64::max)
    };
    let cols = |q: f64| {
        let mut best: f64 = 0.0;
        for a in 0..d {
            for b in a..d {
                let s = pow_sum(data.rows().map(|v| v[a] * v[b]), q);
                best = best.max(s);
            }
        }
        best
    };
    Ok(mu_from_parts(frob, spectral, rows, cols))
}

fn v_prime_spectral_norm(data: &Dataset) -> f64 {
    let d = data.d();
    let apply = |y: &DMatrix<f64>| -> DMatrix<f64> {
        let mut out = DMatrix::zeros(d, d);
        for v in data.rows() {
            let mut quad = 0.0;
            for a in 0..d {
                let mut row = 0.0;
                for b in 0..d {
                    row += y[(a, b)] * v[b];
                }
                quad += v[a] * row;
            }
            for a in 0..d {
                for b in 0..d {
                    out[(a, b)] += quad * v[a] * v[b];
                }
            }
        }
        out
    };
    let mut y = DMatrix::<f64>::identity(d, d);
    y /= y.norm();
    let mut lambda = 0.0;
    for _ in 0..1000 {
        let next = apply(&y);
        let rq = y.dot(&next);
        let norm = next.norm();
        if norm == 0.0 {
            return 0.0;
        }
        y = next / norm;
        if (rq - lambda).abs() <= 1e-13 * rq.abs() {
            lambda = rq;
            break;
        }
        lambda = rq;
    }
    lambda.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DVector;

    #[test]
    fn condition_number_examples() {
        assert_eq!(condition_number(&DMatrix::identity(3, 3), None).unwrap(), 1.0);
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.5, 0.1]));
        assert!((condition_number(&m, None).unwrap() - 10.0).abs() < 1e-12);
        let m = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.5, 0.01]));
        assert!((condition_number(&m, Some(0.07)).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(condition_number(&DMatrix::zeros(2, 2), None), Err(Error::ZeroMatrix));
        assert!(condition_number(&m, Some(5.0)).is_err());
    }

    #[test]
    fn mu_examples() {
        assert!((mu_param(&DMatrix::identity(5, 5)).unwrap() - 1.0).abs() < 1e-12);
        let mut e = DMatrix::zeros(4, 4);
        e[(0, 0)] = 1.0;
        assert!((mu_param(&e).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn implicit_v_prime_matches_materialized() {
        let data = Dataset::from_rows(&[
            vec![1.0, 0.5, -0.2],
            vec![0.3, -1.0, 0.0],
            vec![2.0, 0.1, 0.7],
            vec![-0.4, 0.9, 1.1],
        ])
        .unwrap();
        let explicit = mu_param(&v_prime(&data)).unwrap();
        let implicit = mu_v_prime(&data).unwrap();
        assert!((explicit - implicit).abs() < 1e-8 * explicit, "{explicit} vs {implicit}");
    }
}

//! Reference computations written independently of the library: dense
//! Cholesky for densities, max-shifted softmax, brute-force permutations.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use qemlab::gmm::{Dataset, GmmParams};
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub fn oracle_log_pdf(x: &[f64], mu: &DVector<f64>, sigma: &DMatrix<f64>) -> f64 {
    let d = x.len();
    let chol = sigma.clone().cholesky().expect("SPD");
    let diff = DVector::from_column_slice(x) - mu;
    let z = chol.l().solve_lower_triangular(&diff).expect("nonsingular");
    let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    -0.5 * (d as f64 * (2.0 * std::f64::consts::PI).ln() + log_det + z.norm_squared())
}

/// `Σ_i log Σ_j θ_j N(x_i; μ_j, Σ_j)` with explicit max shifting.
pub fn oracle_log_likelihood(data: &Dataset, params: &GmmParams) -> f64 {
    let dense: Vec<DMatrix<f64>> = params.covariances().iter().map(|c| c.to_dense()).collect();
    data.rows()
        .map(|x| {
            let terms: Vec<f64> = (0..params.k())
                .map(|j| params.theta()[j].ln() + oracle_log_pdf(x, &params.means()[j], &dense[j]))
                .collect();
            let m = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
        })
        .sum()
}

pub fn oracle_softmax(x: &[f64]) -> Vec<f64> {
    let m = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = x.iter().map(|v| (v - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|v| v / s).collect()
}

pub fn l2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

pub fn gaussian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| Distribution::<f64>::sample(&StandardNormal, rng)).collect()
}

/// Orthogonal matrix from Gram-Schmidt on Gaussian columns.
pub fn oracle_orthogonal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<f64> {
    let mut q = DMatrix::<f64>::zeros(d, d);
    for j in 0..d {
        let mut v = DVector::from_vec(gaussian(d, rng));
        for _ in 0..2 {
            for i in 0..j {
                let c = q.column(i).dot(&v);
                v -= q.column(i) * c;
            }
        }
        let n = v.norm();
        q.set_column(j, &(v / n));
    }
    q
}

/// `Q diag(λ) Qᵀ` made exactly symmetric.
pub fn spd_from_spectrum<R: Rng + ?Sized>(lambda: &[f64], rng: &mut R) -> DMatrix<f64> {
    let d = lambda.len();
    let q = oracle_orthogonal(d, rng);
    let m = &q * DMatrix::from_diagonal(&DVector::from_column_slice(lambda)) * q.transpose();
    (&m + m.transpose()) * 0.5
}

/// Accuracy under the best label permutation, by exhaustive search.
pub fn brute_force_accuracy(truth: &[usize], pred: &[usize], k: usize) -> f64 {
    fn permutations(k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for p in permutations(k - 1) {
            for pos in 0..=p.len() {
                let mut q = p.clone();
                q.insert(pos, k - 1);
                out.push(q);
            }
        }
        out
    }
    permutations(k)
        .into_iter()
        .map(|perm| truth.iter().zip(pred).filter(|(t, p)| perm[**p] == **t).count())
        .max()
        .unwrap_or(0) as f64
        / truth.len() as f64
}

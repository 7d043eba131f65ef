mod common;

use std::time::Instant;

use approx::assert_abs_diff_eq;
use common::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use qemlab::gmm::{Covariance, CovarianceKind, Dataset, GmmParams};
use qemlab::profiler::{
    condition_number, eta, logdet_chebyshev, logdet_exact, mu_param, mu_v_prime, profile, v_prime, ProfileOptions,
};
use qemlab::synth::{generate, SynthSpec};
use qemlab::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn diag(v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(v))
}

/// The defining formula evaluated literally on `M / ‖M‖₂`, with `‖M‖₂`
/// taken from the eigenvalues of `MᵀM`.
fn oracle_mu(m: &DMatrix<f64>) -> f64 {
    let spectral = (m.transpose() * m).symmetric_eigen().eigenvalues.max().sqrt();
    let a = m / spectral;
    let s = |rows: Vec<Vec<f64>>, q: f64| -> f64 {
        rows.iter()
            .map(|r| r.iter().map(|x| if q == 0.0 { (*x != 0.0) as u8 as f64 } else { x.abs().powf(q) }).sum::<f64>())
            .fold(0.0, f64::max)
    };
    let rows: Vec<Vec<f64>> = (0..a.nrows()).map(|i| a.row(i).iter().copied().collect()).collect();
    let cols: Vec<Vec<f64>> = (0..a.ncols()).map(|j| a.column(j).iter().copied().collect()).collect();
    [0.0, 0.25, 0.5, 0.75, 1.0]
        .iter()
        .map(|p| (s(rows.clone(), 2.0 * p) * s(cols.clone(), 2.0 * (1.0 - p))).sqrt())
        .fold(a.norm(), f64::min)
}

#[test]
fn condition_number_examples() {
    assert_abs_diff_eq!(condition_number(&DMatrix::identity(4, 4), None).unwrap(), 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(condition_number(&diag(&[1.0, 0.5, 0.1]), None).unwrap(), 10.0, epsilon = 1e-12);
    assert_abs_diff_eq!(condition_number(&diag(&[1.0, 0.5, 0.01]), Some(0.07)).unwrap(), 2.0, epsilon = 1e-12);
    assert_eq!(condition_number(&DMatrix::zeros(2, 3), None), Err(Error::ZeroMatrix));
}

#[test]
fn mu_examples() {
    assert_abs_diff_eq!(mu_param(&DMatrix::identity(6, 6)).unwrap(), 1.0, epsilon = 1e-12);
    let mut e = DMatrix::zeros(4, 4);
    e[(0, 0)] = 1.0;
    assert_abs_diff_eq!(mu_param(&e).unwrap(), 1.0, epsilon = 1e-12);
    let mut r = rng(1);
    let g = DMatrix::from_vec(20, 20, gaussian(400, &mut r));
    let mu = mu_param(&g).unwrap();
    assert!((mu - oracle_mu(&g)).abs() <= 1e-9 * mu);
    let spectral = g.singular_values().max();
    assert!(mu <= g.norm() / spectral + 1e-12);
}

#[test]
fn implicit_v_prime_mu_matches_materialized() {
    let mut r = rng(2);
    for (n, d) in [(30usize, 3usize), (12, 5)] {
        let data = Dataset::new(n, d, gaussian(n * d, &mut r)).unwrap();
        let dense = v_prime(&data);
        let direct = oracle_mu(&dense);
        let got = mu_v_prime(&data).unwrap();
        assert!((got - direct).abs() <= 1e-6 * direct, "{got} vs {direct}");
        let rep = profile(&data, &GmmParams::new(
            CovarianceKind::Spherical,
            vec![1.0],
            vec![DVector::zeros(d)],
            vec![Covariance::identity(d)],
        )
        .unwrap(), &ProfileOptions { include_v_prime: true, ..Default::default() })
        .unwrap();
        assert!(rep.mu_v_prime_bound >= rep.mu_v_prime.unwrap() * (1.0 - 1e-9));
    }
}

#[test]
fn eta_examples() {
    let unit = Dataset::from_rows(&[[0.0, 1.0], [1.0, 0.0]]).unwrap();
    assert_abs_diff_eq!(eta(&unit).unwrap(), 1.0, epsilon = 1e-12);
    let mixed = Dataset::from_rows(&[[0.0, 1.0], [2.0, 0.0]]).unwrap();
    assert_abs_diff_eq!(eta(&mixed).unwrap(), 4.0, epsilon = 1e-12);
    assert!(eta(&Dataset::from_rows(&[[0.0, 0.0]]).unwrap()).is_err());
}

#[test]
fn exact_logdet_examples() {
    assert_abs_diff_eq!(logdet_exact(&DMatrix::identity(5, 5)).unwrap(), 0.0, epsilon = 1e-12);
    assert_abs_diff_eq!(logdet_exact(&diag(&[0.5, 0.5])).unwrap(), -1.386294, epsilon = 1e-6);
    let mut r = rng(3);
    for _ in 0..20 {
        let a = DMatrix::from_vec(8, 8, gaussian(64, &mut r));
        let m = &a * a.transpose() + DMatrix::identity(8, 8) * 0.05;
        let m = (&m + m.transpose()) * 0.5;
        let chol = m.clone().cholesky().unwrap();
        let oracle: f64 = chol.l().diagonal().iter().map(|v| (v * v).ln()).sum();
        assert!((logdet_exact(&m).unwrap() - oracle).abs() <= 1e-9 * oracle.abs().max(1.0));
    }
    assert!(logdet_exact(&diag(&[1.0, -1.0])).is_err());
}

#[test]
fn chebyshev_logdet_on_half_identity() {
    let m = DMatrix::identity(50, 50) * 0.5;
    let truth = 50.0 * 0.5f64.ln();
    assert_abs_diff_eq!(truth, -34.657, epsilon = 1e-3);
    let ok = (0..100)
        .filter(|s| (logdet_chebyshev(&m, 0.5, 0.1, &mut rng(*s)).unwrap() - truth).abs() <= 0.5)
        .count();
    assert!(ok >= 90, "{ok}");
}

#[test]
fn chebyshev_logdet_on_scaled_identity() {
    for c in [0.2, 1.0, 3.0] {
        let m = DMatrix::identity(20, 20) * c;
        let est = logdet_chebyshev(&m, 0.1, 0.1, &mut rng(4)).unwrap();
        assert!((est - 20.0 * f64::ln(c)).abs() <= 0.1, "c = {c}: {est}");
    }
}

#[test]
fn chebyshev_logdet_on_random_spectra() {
    let mut r = rng(5);
    let mut ok = 0;
    for t in 0..40 {
        let lambda: Vec<f64> = (0..30).map(|_| rand::Rng::random_range(&mut r, 0.1..2.0)).collect();
        let m = spd_from_spectrum(&lambda, &mut r);
        let truth: f64 = lambda.iter().map(|l| l.ln()).sum();
        let est = logdet_chebyshev(&m, 0.5, 0.1, &mut rng(100 + t)).unwrap();
        ok += ((est - truth).abs() <= 0.5) as usize;
    }
    assert!(ok >= 36, "{ok}");
}

#[test]
fn orthonormal_fixture_profile() {
    let data = Dataset::new(4, 4, DMatrix::<f64>::identity(4, 4).as_slice().to_vec()).unwrap();
    let params = GmmParams::new(
        CovarianceKind::Full,
        vec![0.5, 0.5],
        vec![DVector::zeros(4), DVector::from_element(4, 0.5)],
        vec![Covariance::dense(DMatrix::identity(4, 4)).unwrap(); 2],
    )
    .unwrap();
    let rep = profile(&data, &params, &ProfileOptions::default()).unwrap();
    assert_abs_diff_eq!(rep.kappa_v, 1.0, epsilon = 1e-12);
    assert_abs_diff_eq!(rep.eta, 1.0, epsilon = 1e-12);
    for j in 0..2 {
        assert_abs_diff_eq!(rep.mu_sigma[j], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.kappa_sigma[j].effective(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(rep.log_dets_exact[j], 0.0, epsilon = 1e-12);
        assert!(rep.log_abs_dets[j] <= 0.5);
        assert_abs_diff_eq!(rep.spectral_norms[j], 1.0, epsilon = 1e-12);
    }
    assert!(rep.table().contains("κ(V)") && rep.table().contains("k = 2"));
}

#[test]
fn profile_rejects_oversized_v_prime() {
    let s = generate(&SynthSpec::new(2, 10, 100, 4.0)).unwrap();
    let opts = ProfileOptions { include_v_prime: true, v_prime_budget: 1000, ..Default::default() };
    assert!(matches!(profile(&s.data, &s.truth, &opts), Err(Error::MemoryBudget { .. })));
}

#[test]
fn full_size_report_meets_time_budget() {
    let mut spec = SynthSpec::new(16, 40, 4000, 4.0);
    spec.seed = 6;
    let s = generate(&spec).unwrap();
    let start = Instant::now();
    let rep = profile(&s.data, &s.truth, &ProfileOptions::default()).unwrap();
    assert!(start.elapsed().as_secs_f64() < 60.0);
    assert_eq!((rep.n, rep.d, rep.k), (4000, 40, 16));
    assert!(rep.eta >= 1.0);
    let close = (0..16)
        .filter(|&j| (rep.log_abs_dets[j] - rep.log_dets_exact[j].abs()).abs() <= 0.5)
        .count();
    assert!(close >= 14, "{close} of 16 log-determinants within 0.5");
    assert!(rep.kappa_sigma.iter().all(|k| k.raw >= 1.0));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn mu_is_below_normalized_frobenius(n in 1usize..12, d in 1usize..12, seed in any::<u64>()) {
        let m = DMatrix::from_vec(n, d, gaussian(n * d, &mut rng(seed)));
        let mu = mu_param(&m).unwrap();
        let frob = m.norm() / m.singular_values().max();
        prop_assert!(mu <= frob * (1.0 + 1e-12));
        prop_assert!(frob <= (n.min(d) as f64).sqrt() * (1.0 + 1e-12));
        prop_assert!((mu - oracle_mu(&m)).abs() <= 1e-9 * mu.max(1.0));
    }

    #[test]
    fn thresholded_kappa_is_monotone(seed in any::<u64>(), t1 in 0.0f64..0.5, dt in 0.0f64..0.5) {
        let mut r = rng(seed);
        let lambda: Vec<f64> = (0..6).map(|_| rand::Rng::random_range(&mut r, 0.01..1.0)).collect();
        let m = spd_from_spectrum(&lambda, &mut r);
        let top = lambda.iter().copied().fold(0.0, f64::max);
        let (a, b) = (t1.min(top * 0.99), (t1 + dt).min(top * 0.99));
        let ka = condition_number(&m, Some(a)).unwrap();
        let kb = condition_number(&m, Some(b)).unwrap();
        prop_assert!(kb <= ka * (1.0 + 1e-12));
        prop_assert!(kb >= 1.0);
    }

    #[test]
    fn eta_is_at_least_one(n in 1usize..20, seed in any::<u64>()) {
        let data = Dataset::new(n, 3, gaussian(3 * n, &mut rng(seed))).unwrap();
        prop_assert!(eta(&data).unwrap() >= 1.0);
    }
}

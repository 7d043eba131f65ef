mod common;

use approx::assert_abs_diff_eq;
use common::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use qemlab::gmm::{Covariance, CovarianceKind, GmmParams};
use qemlab::noise::{
    apply, perturb_covariances, perturb_means, perturb_theta, threshold, verify_bounds, NoiseSpec,
};
use qemlab::validate::random_params;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn kappa(c: &Covariance) -> f64 {
    let e = c.to_dense().symmetric_eigen().eigenvalues;
    e.max() / e.min()
}

#[test]
fn zero_deltas_leave_weights_and_means_alone() {
    let theta = vec![0.1, 0.6, 0.3];
    let spec = NoiseSpec::new(0.0, 0.0);
    let (out, raw) = perturb_theta(&theta, &spec, &mut rng(1)).unwrap();
    assert_eq!(out, theta);
    assert_eq!(raw, theta);
    let means = vec![DVector::from_vec(vec![1.0, -2.0]), DVector::from_vec(vec![0.5, 0.0])];
    assert_eq!(perturb_means(&means, &spec, &mut rng(1)), means);
}

#[test]
fn single_weight_stays_one() {
    let spec = NoiseSpec::new(0.5, 0.0);
    for s in 0..50 {
        assert_eq!(perturb_theta(&[1.0], &spec, &mut rng(s)).unwrap().0, vec![1.0]);
    }
}

#[test]
fn weight_noise_respects_bound_at_working_setting() {
    let spec = NoiseSpec::new(0.038, 0.0);
    let mut r = rng(2);
    let theta = vec![1.0 / 16.0; 16];
    for _ in 0..10_000 {
        let (out, raw) = perturb_theta(&theta, &spec, &mut r).unwrap();
        assert!(l2(&raw, &theta) <= 0.038);
        assert_abs_diff_eq!(out.iter().sum::<f64>(), 1.0, epsilon = 1e-12);
        assert!(out.iter().all(|t| *t >= 0.0));
    }
}

#[test]
fn mean_noise_respects_bound_at_working_setting() {
    let spec = NoiseSpec::new(0.0, 0.5);
    let mut r = rng(3);
    let means = vec![DVector::from_vec(gaussian(40, &mut r))];
    for _ in 0..10_000 {
        let out = perturb_means(&means, &spec, &mut r);
        assert!((&out[0] - &means[0]).norm() <= 0.5);
    }
    let one = vec![DVector::from_element(1, 3.0)];
    for _ in 0..1000 {
        assert!((perturb_means(&one, &spec, &mut r)[0][0] - 3.0).abs() <= 0.5);
    }
}

#[test]
fn covariance_noise_respects_frobenius_bound() {
    let spec = NoiseSpec::new(0.0, 0.5);
    let mut r = rng(4);
    let covs = vec![Covariance::diagonal(DVector::from_fn(40, |i, _| 1.0 + 0.05 * i as f64)).unwrap()];
    let bound = 0.5 * 10f64.sqrt();
    assert_abs_diff_eq!(spec.covariance_bound(10.0), bound, epsilon = 1e-15);
    assert_abs_diff_eq!(bound, 1.581, epsilon = 1e-3);
    for _ in 0..10_000 {
        let (reference, noisy) = perturb_covariances(&covs, CovarianceKind::Diagonal, 10.0, &spec, &mut r).unwrap();
        assert!((reference[0].to_dense() - noisy[0].to_dense()).norm() <= bound);
    }
}

#[test]
fn thresholding_floors_small_variances() {
    let spec = NoiseSpec::new(0.0, 0.0);
    let c = Covariance::diagonal(DVector::from_vec(vec![1.0, 0.05])).unwrap();
    let t = threshold(&c, &spec).unwrap();
    assert_eq!(t.to_dense(), DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.07])));
    let (_, noisy) = perturb_covariances(&[c], CovarianceKind::Diagonal, 1.0, &spec, &mut rng(0)).unwrap();
    assert_eq!(noisy[0], t);
}

#[test]
fn identity_eigenvalues_stay_in_the_interval() {
    let spec = NoiseSpec::new(0.0, 0.2);
    let d = 16usize;
    let half = 0.2 * 4f64.sqrt() / (d as f64).sqrt();
    let mut r = rng(5);
    for kind in [CovarianceKind::Full, CovarianceKind::Diagonal] {
        let cov = match kind {
            CovarianceKind::Full => Covariance::dense(DMatrix::identity(d, d)).unwrap(),
            _ => Covariance::diagonal(DVector::from_element(d, 1.0)).unwrap(),
        };
        for _ in 0..200 {
            let (_, noisy) = perturb_covariances(&[cov.clone()], kind, 4.0, &spec, &mut r).unwrap();
            for e in noisy[0].to_dense().symmetric_eigen().eigenvalues.iter() {
                assert!((e - 1.0).abs() <= half + 1e-12, "{e}");
            }
        }
    }
}

#[test]
fn zero_spec_with_low_floor_is_identity() {
    let p = random_params(4, 3, CovarianceKind::Full, &mut rng(6)).unwrap();
    let mut spec = NoiseSpec::new(0.0, 0.0);
    spec.sigma_floor = 1e-6;
    let out = apply(&p, &spec, 2.0, &mut rng(7)).unwrap();
    assert_eq!(out.params, p);
}

#[test]
fn same_seed_same_perturbation() {
    let p = random_params(5, 4, CovarianceKind::Diagonal, &mut rng(8)).unwrap();
    let spec = NoiseSpec::new(0.05, 0.3);
    assert_eq!(apply(&p, &spec, 3.0, &mut rng(9)).unwrap(), apply(&p, &spec, 3.0, &mut rng(9)).unwrap());
    assert_ne!(apply(&p, &spec, 3.0, &mut rng(9)).unwrap(), apply(&p, &spec, 3.0, &mut rng(10)).unwrap());
}

#[test]
fn verify_bounds_examples() {
    let p = random_params(3, 2, CovarianceKind::Spherical, &mut rng(11)).unwrap();
    let spec = NoiseSpec::new(0.01, 0.1);
    let same = verify_bounds(&p, &p, None, &spec, 1.0).unwrap();
    assert!(same.pass);
    assert_eq!((same.theta_dist, same.mean_dist_max, same.cov_dist_max), (0.0, 0.0, 0.0));

    let (kind, theta, mut means, covs) = p.clone().into_parts();
    means[1][0] += 0.2;
    let shifted = GmmParams::new(kind, theta, means, covs).unwrap();
    let report = verify_bounds(&p, &shifted, None, &spec, 1.0).unwrap();
    assert!(!report.pass);
    assert_abs_diff_eq!(report.mean_dist_max, 0.2, epsilon = 1e-12);

    let other = random_params(4, 2, CovarianceKind::Spherical, &mut rng(12)).unwrap();
    assert!(verify_bounds(&p, &other, None, &spec, 1.0).is_err());
}

#[test]
fn apply_output_passes_bounds_over_many_trials() {
    let mut r = rng(13);
    let kinds = [CovarianceKind::Full, CovarianceKind::Diagonal, CovarianceKind::Spherical, CovarianceKind::Tied];
    for t in 0..1000 {
        let kind = kinds[t % 4];
        let p = random_params(4, 5, kind, &mut r).unwrap();
        let spec = NoiseSpec::new(0.05, 0.2);
        let out = apply(&p, &spec, 3.0, &mut r).unwrap();
        let report = verify_bounds(&out.reference, &out.params, Some(&out.raw_theta), &spec, 3.0).unwrap();
        assert!(report.pass, "trial {t}: {report:?}");
        assert_abs_diff_eq!(out.params.theta().iter().sum::<f64>(), 1.0, epsilon = 1e-12);
    }
}

#[test]
fn soft_kmeans_covariances_are_untouched() {
    let p = random_params(3, 2, CovarianceKind::SoftKMeans { beta: 2.0 }, &mut rng(14)).unwrap();
    let out = apply(&p, &NoiseSpec::new(0.0, 0.4), 2.0, &mut rng(15)).unwrap();
    assert_eq!(out.params.covariances(), p.covariances());
}

#[test]
fn invalid_specs_are_rejected() {
    let p = random_params(2, 2, CovarianceKind::Diagonal, &mut rng(16)).unwrap();
    let bad = [
        NoiseSpec::new(-0.1, 0.0),
        NoiseSpec { sigma_floor: 0.0, ..NoiseSpec::default() },
        NoiseSpec { kappa_cap: Some(1.0), ..NoiseSpec::default() },
        NoiseSpec { trunc_sigma: f64::NAN, ..NoiseSpec::default() },
    ];
    for spec in bad {
        assert!(apply(&p, &spec, 1.0, &mut rng(0)).is_err(), "{spec:?}");
    }
    assert!(apply(&p, &NoiseSpec::default(), 0.5, &mut rng(0)).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn kappa_cap_is_respected(seed in any::<u64>(), cap in 1.5f64..50.0, dmu in 0.0f64..0.5) {
        let mut r = rng(seed);
        let p = random_params(3, 4, CovarianceKind::Full, &mut r).unwrap();
        let spec = NoiseSpec { kappa_cap: Some(cap), ..NoiseSpec::new(0.02, dmu) };
        let out = apply(&p, &spec, 2.0, &mut r).unwrap();
        for c in out.params.covariances() {
            prop_assert!(kappa(c) <= cap * (1.0 + 1e-9));
        }
        let report = verify_bounds(&out.reference, &out.params, Some(&out.raw_theta), &spec, 2.0).unwrap();
        prop_assert!(report.pass);
    }

    #[test]
    fn kappa_is_nonincreasing_in_the_floor(seed in any::<u64>(), lo in 0.01f64..0.5, step in 0.0f64..1.0) {
        let p = random_params(2, 5, CovarianceKind::Full, &mut rng(seed)).unwrap();
        for c in p.covariances() {
            let a = threshold(c, &NoiseSpec { sigma_floor: lo, ..NoiseSpec::default() }).unwrap();
            let b = threshold(c, &NoiseSpec { sigma_floor: lo + step, ..NoiseSpec::default() }).unwrap();
            prop_assert!(kappa(&b) <= kappa(&a) * (1.0 + 1e-9));
        }
    }
}

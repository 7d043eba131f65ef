use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn qemlab(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qemlab"))
        .args(args)
        .current_dir(dir)
        .env("QEMLAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Fifty points spread over [-1, 1] and fifty over [9, 11].
fn two_blob_csv(dir: &Path) {
    let mut text = String::from("f0\n");
    for i in 0..50 {
        let t = -1.0 + 2.0 * f64::from(i) / 49.0;
        text.push_str(&format!("{t}\n{}\n", 10.0 + t));
    }
    fs::write(dir.join("blobs.csv"), text).unwrap();
}

/// Averaged parameters of a fitted 16-component, 40-dimensional model.
fn working_regime_profile(dir: &Path) {
    let k = 16;
    let profile = serde_json::json!({
        "n": 5000, "d": 40, "k": k,
        "kappa_V": 23.82, "kappa_threshold": 0.07,
        "kappa_sigma": vec![serde_json::json!({"raw": 40.0, "thresholded": 4.21}); k],
        "mu_V": 2.14, "mu_V_prime": 1.0, "mu_V_prime_bound": 30.0,
        "mu_sigma": vec![3.82; k], "eta": 10.0,
        "log_abs_dets": vec![58.6; k], "log_dets_exact": vec![-58.6; k],
        "spectral_norms": vec![1.0; k],
    });
    fs::write(dir.join("profile.json"), profile.to_string()).unwrap();
}

#[test]
fn fit_recovers_two_blobs() {
    let tmp = TempDir::new().unwrap();
    two_blob_csv(tmp.path());
    let out = qemlab(&["fit", "blobs.csv", "--k", "2", "--kind", "spherical", "--seed", "3"], tmp.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let model = json(&tmp.path().join("model.json"));
    assert_eq!(model["schema"], 1);
    assert_eq!(model["converged"], true);
    let mut means: Vec<f64> = model["means"].as_array().unwrap().iter().map(|m| m[0].as_f64().unwrap()).collect();
    means.sort_by(f64::total_cmp);
    assert!(means[0].abs() < 0.05 && (means[1] - 10.0).abs() < 0.05, "{means:?}");
    let trace = fs::read_to_string(tmp.path().join("trace.csv")).unwrap();
    assert!(trace.starts_with("iter,log_likelihood,mean_probability,wall_ms\n"));
    assert!(trace.lines().count() >= 2);
}

#[test]
fn fit_is_byte_deterministic() {
    let tmp = TempDir::new().unwrap();
    two_blob_csv(tmp.path());
    let args = |out: &'static str| ["fit", "blobs.csv", "--k", "2", "--seed", "11", "--out", out];
    assert_eq!(code(&qemlab(&args("a"), tmp.path())), 0);
    assert_eq!(code(&qemlab(&args("b"), tmp.path())), 0);
    let a = fs::read(tmp.path().join("a/model.json")).unwrap();
    let b = fs::read(tmp.path().join("b/model.json")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn noisy_map_fit_runs_from_config() {
    let tmp = TempDir::new().unwrap();
    two_blob_csv(tmp.path());
    fs::write(
        tmp.path().join("fit.toml"),
        "seed = 5\nk = 2\nkind = \"diagonal\"\nestimator = \"map\"\ndelta_theta = 0.01\ndelta_mu = 0.05\n",
    )
    .unwrap();
    let out = qemlab(&["fit", "blobs.csv", "--config", "fit.toml"], tmp.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let model = json(&tmp.path().join("model.json"));
    assert_eq!(model["estimator"], "map");
    let theta: f64 = model["theta"].as_array().unwrap().iter().map(|t| t.as_f64().unwrap()).sum();
    assert!((theta - 1.0).abs() < 1e-9);
}

#[test]
fn too_many_components_is_a_domain_error() {
    let tmp = TempDir::new().unwrap();
    two_blob_csv(tmp.path());
    let out = qemlab(&["fit", "blobs.csv", "--k", "101"], tmp.path());
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("k > n"), "{}", stderr(&out));
}

#[test]
fn config_and_input_errors_exit_one() {
    let tmp = TempDir::new().unwrap();
    two_blob_csv(tmp.path());
    fs::write(tmp.path().join("bad.toml"), "k = 2\nkk = 3\n").unwrap();
    let out = qemlab(&["fit", "blobs.csv", "--config", "bad.toml"], tmp.path());
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("kk"), "{}", stderr(&out));

    assert_eq!(code(&qemlab(&["fit", "blobs.csv"], tmp.path())), 1);

    fs::write(tmp.path().join("broken.csv"), "f0,f1\n1.0,2.0\n3.0,oops\n").unwrap();
    let out = qemlab(&["fit", "broken.csv", "--k", "1"], tmp.path());
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains(":3:"), "{}", stderr(&out));

    let out = qemlab(&["profile", "blobs.csv", "missing.json"], tmp.path());
    assert_eq!(code(&out), 1);
}

#[test]
fn synth_round_trips_bitwise_and_reproduces() {
    let tmp = TempDir::new().unwrap();
    let args = |out: &'static str| {
        ["synth", "--k", "3", "--d", "4", "--n", "300", "--separation", "5", "--seed", "8", "--out", out]
    };
    assert_eq!(code(&qemlab(&args("a"), tmp.path())), 0);
    assert_eq!(code(&qemlab(&args("b"), tmp.path())), 0);
    let a = fs::read_to_string(tmp.path().join("a/dataset.csv")).unwrap();
    assert_eq!(a, fs::read_to_string(tmp.path().join("b/dataset.csv")).unwrap());
    assert!(a.starts_with("f0,f1,f2,f3\n") && !a.contains('\r'));
    assert_eq!(a.lines().count(), 301);
    for line in a.lines().skip(1) {
        for field in line.split(',') {
            let v: f64 = field.parse().unwrap();
            assert_eq!(format!("{v:.16e}"), field);
        }
    }
    let truth = json(&tmp.path().join("a/truth.json"));
    assert_eq!(truth["labels"].as_array().unwrap().len(), 300);
    assert_eq!(truth["kind"], "diagonal");

    let out = qemlab(&["profile", "a/dataset.csv", "a/truth.json", "--out", "p"], tmp.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
}

#[test]
fn synth_rejects_empty_dataset() {
    let tmp = TempDir::new().unwrap();
    let out = qemlab(&["synth", "--k", "2", "--d", "2", "--n", "0", "--separation", "3"], tmp.path());
    assert_eq!(code(&out), 2);
}

#[test]
fn profile_of_identity_model() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("eye.csv"), "f0,f1,f2\n1,0,0\n0,1,0\n0,0,1\n").unwrap();
    let model = serde_json::json!({
        "schema": 1, "kind": "full", "k": 1, "d": 3, "theta": [1.0],
        "means": [[0.0, 0.0, 0.0]],
        "covariances": [[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]],
        "log_dets": [0.0],
    });
    fs::write(tmp.path().join("model.json"), model.to_string()).unwrap();
    let out = qemlab(&["profile", "eye.csv", "model.json"], tmp.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let p = json(&tmp.path().join("profile.json"));
    for key in ["kappa_V", "mu_V", "eta"] {
        assert!((p[key].as_f64().unwrap() - 1.0).abs() < 1e-12, "{key}");
    }
    assert!((p["mu_sigma"][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(p["log_dets_exact"][0].as_f64().unwrap().abs() < 1e-12);
    let table = fs::read_to_string(tmp.path().join("table.txt")).unwrap();
    for label in ["‖Σ‖₂", "|log det Σ|", "κ*(Σ)", "μ(Σ)", "μ(V)", "κ(V)"] {
        assert!(table.contains(label), "{label}");
    }

    let wrong_d = serde_json::json!({
        "schema": 1, "kind": "spherical", "k": 1, "d": 2, "theta": [1.0],
        "means": [[0.0, 0.0]], "covariances": [1.0], "log_dets": [0.0],
    });
    fs::write(tmp.path().join("wrong.json"), wrong_d.to_string()).unwrap();
    assert_eq!(code(&qemlab(&["profile", "eye.csv", "wrong.json"], tmp.path())), 2);
}

#[test]
fn cost_in_working_regime() {
    let tmp = TempDir::new().unwrap();
    working_regime_profile(tmp.path());
    let run = |dm: &str, out: &str| {
        let o = qemlab(
            &["cost", "profile.json", "--delta-theta", "0.038", "--delta-mu", dm, "--eps-tau", "0.007", "--n", "5000", "--out", out],
            tmp.path(),
        );
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        json(&tmp.path().join(out).join("cost.json"))
    };
    let full = run("0.5", "a");
    let half = run("0.25", "b");
    assert_eq!(full["dominant_term"], "t_sigma");
    let ratio = half["t_sigma"].as_f64().unwrap() / full["t_sigma"].as_f64().unwrap();
    assert!((ratio - 8.0).abs() < 1e-12, "{ratio}");
    assert_eq!(full["classical_cost"].as_f64(), Some(16.0 * 5000.0 * 1600.0));

    let curves = fs::read_to_string(tmp.path().join("a/curves.csv")).unwrap();
    let mut lines = curves.lines();
    assert_eq!(lines.next(), Some("n,classical,quantum_max_term"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert!(rows.len() > 2);
    assert!(rows.windows(2).all(|w| w[1][0] > w[0][0] && w[1][1] > w[0][1] && w[1][2] == w[0][2]));

    let missing = qemlab(&["cost", "profile.json", "--delta-theta", "0.038", "--eps-tau", "0.007"], tmp.path());
    assert_eq!(code(&missing), 1);
    assert!(stderr(&missing).contains("delta_mu"));
}

#[test]
fn validate_suites() {
    let tmp = TempDir::new().unwrap();
    fs::write(tmp.path().join("zero.toml"), "seed = 2\ntrials = 200\ndelta_theta = 0.0\ndelta_mu = 0.0\n").unwrap();
    let out = qemlab(&["validate", "noise-bounds", "--config", "zero.toml"], tmp.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&tmp.path().join("validation.json"));
    assert_eq!(report["pass"], true);
    assert_eq!(report["seed"], 2);
    assert!(report["cases"].as_array().unwrap().iter().all(|c| c["max_observed"] == 0.0));

    let out = qemlab(&["validate", "lipschitz", "--seed", "1", "--out", "lip"], tmp.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(&tmp.path().join("lip/validation.json"));
    assert_eq!(report["pass"], true);
    assert!(report["trials"].as_u64().unwrap() >= 10_000);
    for case in report["cases"].as_array().unwrap() {
        assert!(case["max_observed"].as_f64().unwrap() <= 2f64.sqrt() + 1e-12);
    }

    assert_eq!(code(&qemlab(&["validate", "bogus"], tmp.path())), 1);
    fs::write(tmp.path().join("typo.toml"), "trails = 5\n").unwrap();
    assert_eq!(code(&qemlab(&["validate", "lipschitz", "--config", "typo.toml"], tmp.path())), 1);
}

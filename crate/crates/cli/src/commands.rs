use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use qemlab::cost::{cost_curve, map_iteration_cost, qem_iteration_cost, CostOptions, KappaVPower, Reduction};
use qemlab::em::{fit, Estimator, FitConfig, InitStrategy, MapPrior, StoppingRule};
use qemlab::noise::NoiseSpec;
use qemlab::profiler::{profile, ProfileOptions, ProfileReport};
use qemlab::synth::{generate, SynthSpec};
use qemlab::validate::{SuiteConfig, SUITE_NAMES};

use crate::config::{self, pick, require, Common, CostFile, FitFile, ProfileFile, SynthFile};
use crate::error::{CliError, CliResult};
use crate::io::{parse_kind, read_dataset, read_json, read_text, write_dataset, write_json, write_text, ModelFile};

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML file with command settings.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory, created if missing.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

struct Resolved {
    seed: u64,
    out: PathBuf,
}

fn resolve(args: &CommonArgs, file: &Common) -> CliResult<Resolved> {
    let out = pick(args.out.clone(), file.output_dir.clone()).unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
    Ok(Resolved {
        seed: pick(args.seed, file.seed).unwrap_or(0),
        out,
    })
}

#[derive(Debug, Clone, Args)]
pub struct FitArgs {
    /// Samples as CSV with a header row.
    pub data: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub k: Option<usize>,
    /// full, diagonal, spherical, tied or soft-kmeans.
    #[arg(long)]
    pub kind: Option<String>,
    /// Stiffness for soft-kmeans.
    #[arg(long)]
    pub beta: Option<f64>,
    #[arg(long)]
    pub eps_tau: Option<f64>,
    #[arg(long)]
    pub max_iters: Option<usize>,
    /// kmeans++, random, small-em or cem.
    #[arg(long)]
    pub init: Option<String>,
    /// ml or map.
    #[arg(long)]
    pub estimator: Option<String>,
    /// auto, avg-log-likelihood or mean-probability.
    #[arg(long)]
    pub stopping: Option<String>,
    #[arg(long)]
    pub delta_theta: Option<f64>,
    #[arg(long)]
    pub delta_mu: Option<f64>,
}

fn parse_init(name: &str, file: &FitFile) -> CliResult<InitStrategy> {
    Ok(match name {
        "kmeans++" => InitStrategy::KMeansPP {
            rounds: file.init_rounds.unwrap_or(10),
        },
        "random" => InitStrategy::RandomEm,
        "small-em" => InitStrategy::SmallEm {
            restarts: file.init_restarts.unwrap_or(5),
            burn_iters: file.init_burn_iters.unwrap_or(5),
        },
        "cem" => InitStrategy::Cem,
        other => {
            return Err(CliError::config(format!(
                "unknown init '{other}'; expected kmeans++, random, small-em or cem"
            )))
        }
    })
}

fn parse_stopping(name: &str) -> CliResult<StoppingRule> {
    Ok(match name {
        "auto" => StoppingRule::Auto,
        "avg-log-likelihood" => StoppingRule::AvgLogLikelihood,
        "mean-probability" => StoppingRule::MeanProbability,
        other => {
            return Err(CliError::config(format!(
                "unknown stopping rule '{other}'; expected auto, avg-log-likelihood or mean-probability"
            )))
        }
    })
}

pub fn cmd_fit(args: &FitArgs) -> CliResult<()> {
    let file: FitFile = config::load(args.common.config.as_deref())?;
    let run = resolve(&args.common, &file.common)?;
    let data = read_dataset(&args.data)?;

    let k = require(pick(args.k, file.k), "k")?;
    let kind_name = pick(args.kind.clone(), file.kind.clone()).unwrap_or_else(|| "full".into());
    let kind = parse_kind(&kind_name, pick(args.beta, file.beta))?;
    let mut cfg = FitConfig::new(k, kind);
    cfg.seed = run.seed;
    if let Some(v) = pick(args.eps_tau, file.eps_tau) {
        cfg.eps_tau = v;
    }
    if let Some(v) = pick(args.max_iters, file.max_iters) {
        cfg.max_iters = v;
    }
    cfg.reg_floor = file.reg_floor;
    if let Some(name) = pick(args.init.clone(), file.init.clone()) {
        cfg.init = parse_init(&name, &file)?;
    }
    if let Some(name) = pick(args.stopping.clone(), file.stopping.clone()) {
        cfg.stopping = parse_stopping(&name)?;
    }
    let estimator_name = pick(args.estimator.clone(), file.estimator.clone()).unwrap_or_else(|| "ml".into());
    cfg.estimator = match estimator_name.as_str() {
        "ml" => Estimator::Ml,
        "map" => {
            let mut prior = MapPrior::pooled(&data, k, cfg.resolve_floor(&data))?;
            if let Some(a) = file.map_alpha {
                prior.alpha = vec![a; k];
            }
            if let Some(v) = file.map_iota0 {
                prior.iota0 = v;
            }
            if let Some(v) = file.map_nu0 {
                prior.nu0 = v;
            }
            Estimator::Map(prior)
        }
        other => return Err(CliError::config(format!("unknown estimator '{other}'; expected ml or map"))),
    };

    let delta_theta = pick(args.delta_theta, file.delta_theta);
    let delta_mu = pick(args.delta_mu, file.delta_mu);
    let noise = (delta_theta.is_some() || delta_mu.is_some()).then(|| {
        let mut spec = NoiseSpec::new(delta_theta.unwrap_or(0.0), delta_mu.unwrap_or(0.0));
        if let Some(v) = file.sigma_floor {
            spec.sigma_floor = v;
        }
        spec.kappa_cap = file.kappa_cap;
        if let Some(v) = file.trunc_sigma {
            spec.trunc_sigma = v;
        }
        spec.seed = file.noise_seed;
        spec
    });

    let result = fit(&data, &cfg, noise.as_ref())?;
    let mut model = ModelFile::from_params(&result.params);
    model.iterations = Some(result.iterations);
    model.converged = Some(result.converged);
    model.estimator = Some(estimator_name);
    model.non_monotone_iterations = result.trace.iter().filter(|t| t.non_monotone).map(|t| t.iteration).collect();
    write_json(&run.out.join("model.json"), &model)?;

    let mut trace = String::from("iter,log_likelihood,mean_probability,wall_ms\n");
    for t in &result.trace {
        let _ = writeln!(trace, "{},{:e},{:e},{:.3}", t.iteration, t.log_likelihood, t.mean_probability, t.wall_ms);
    }
    write_text(&run.out.join("trace.csv"), &trace)?;
    eprintln!(
        "fit: k = {k}, {} iterations, converged = {}",
        result.iterations, result.converged
    );
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct ProfileArgs {
    pub data: PathBuf,
    /// Model JSON written by `fit` or `synth`.
    pub model: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
    /// Compute the exact μ(V′), which materializes an n × d² matrix.
    #[arg(long)]
    pub include_v_prime: bool,
}

pub fn cmd_profile(args: &ProfileArgs) -> CliResult<()> {
    let file: ProfileFile = config::load(args.common.config.as_deref())?;
    let run = resolve(&args.common, &file.common)?;
    let model: ModelFile = read_json(&args.model)?;
    let params = model.to_params()?;
    let data = read_dataset(&args.data)?;
    let defaults = ProfileOptions::default();
    let opts = ProfileOptions {
        include_v_prime: args.include_v_prime || file.include_v_prime.unwrap_or(false),
        v_prime_budget: file.v_prime_budget.unwrap_or(defaults.v_prime_budget),
        kappa_threshold: file.kappa_threshold.unwrap_or(defaults.kappa_threshold),
        logdet_eps: file.logdet_eps.unwrap_or(defaults.logdet_eps),
        logdet_delta: file.logdet_delta.unwrap_or(defaults.logdet_delta),
        seed: run.seed,
        ..defaults
    };
    let report = profile(&data, &params, &opts)?;
    write_json(&run.out.join("profile.json"), &report)?;
    let table = report.table();
    write_text(&run.out.join("table.txt"), &table)?;
    print!("{table}");
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct CostArgs {
    /// Profile JSON written by `profile`.
    pub profile: PathBuf,
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub delta_theta: Option<f64>,
    #[arg(long)]
    pub delta_mu: Option<f64>,
    #[arg(long)]
    pub eps_tau: Option<f64>,
    /// Sample count for the classical `k n d²` figure.
    #[arg(long)]
    pub n: Option<usize>,
}

fn default_curve(n: usize) -> Vec<f64> {
    let top = (n.max(10) as f64).log10().ceil() as i32 + 3;
    (0..=top * 4).map(|i| 10f64.powf(f64::from(i) / 4.0)).collect()
}

pub fn cmd_cost(args: &CostArgs) -> CliResult<()> {
    let file: CostFile = config::load(args.common.config.as_deref())?;
    let run = resolve(&args.common, &file.common)?;
    let report: ProfileReport = read_json(&args.profile)?;
    let delta_theta = require(pick(args.delta_theta, file.delta_theta), "delta_theta")?;
    let delta_mu = require(pick(args.delta_mu, file.delta_mu), "delta_mu")?;
    let eps_tau = require(pick(args.eps_tau, file.eps_tau), "eps_tau")?;
    let n = pick(args.n, file.n);
    let opts = CostOptions {
        reduction: match file.reduction.as_deref() {
            None | Some("max") => Reduction::Max,
            Some("mean") => Reduction::Mean,
            Some(other) => return Err(CliError::config(format!("unknown reduction '{other}'; expected max or mean"))),
        },
        kappa_v_power: match file.kappa_v_power.as_deref() {
            None | Some("squared") => KappaVPower::Squared,
            Some("linear") => KappaVPower::Linear,
            Some(other) => {
                return Err(CliError::config(format!(
                    "unknown kappa_v_power '{other}'; expected squared or linear"
                )))
            }
        },
    };
    let cost = match file.estimator.as_deref() {
        None | Some("ml") => qem_iteration_cost(&report, delta_theta, delta_mu, eps_tau, opts, n)?,
        Some("map") => map_iteration_cost(&report, delta_theta, delta_mu, eps_tau, opts, n)?,
        Some(other) => return Err(CliError::config(format!("unknown estimator '{other}'; expected ml or map"))),
    };
    write_json(&run.out.join("cost.json"), &cost)?;

    let ns = file.curve_points.clone().unwrap_or_else(|| default_curve(n.unwrap_or(report.n)));
    let mut csv = String::from("n,classical,quantum_max_term\n");
    for (n, classical, quantum) in cost_curve(&cost, &ns) {
        let _ = writeln!(csv, "{n:e},{classical:e},{quantum:e}");
    }
    write_text(&run.out.join("curves.csv"), &csv)?;
    println!(
        "dominant term {}; crossover n = {}",
        cost.dominant_term,
        cost.crossover_n.map_or("none".into(), |v| format!("{v:.4e}"))
    );
    Ok(())
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    /// One of lipschitz, responsibility-error, tomography, amplitude,
    /// quadratic-form, noise-bounds, logdet.
    pub suite: String,
    #[command(flatten)]
    pub common: CommonArgs,
}

fn suite_from_table(name: &str, table: toml::Table) -> Result<SuiteConfig, toml::de::Error> {
    let value = toml::Value::Table(table);
    Ok(match name {
        "lipschitz" => SuiteConfig::Lipschitz(value.try_into()?),
        "responsibility-error" => SuiteConfig::ResponsibilityError(value.try_into()?),
        "tomography" => SuiteConfig::Tomography(value.try_into()?),
        "amplitude" => SuiteConfig::Amplitude(value.try_into()?),
        "quadratic-form" => SuiteConfig::QuadraticForm(value.try_into()?),
        "noise-bounds" => SuiteConfig::NoiseBounds(value.try_into()?),
        _ => SuiteConfig::LogDet(value.try_into()?),
    })
}

pub fn cmd_validate(args: &ValidateArgs) -> CliResult<()> {
    if !SUITE_NAMES.contains(&args.suite.as_str()) {
        return Err(CliError::config(format!(
            "unknown suite '{}'; expected one of {}",
            args.suite,
            SUITE_NAMES.join(", ")
        )));
    }
    let (common, table) = match &args.common.config {
        None => (Common::default(), toml::Table::new()),
        Some(p) => config::split_suite_config(p, &read_text(p)?)?,
    };
    let path = args.common.config.as_deref().unwrap_or(Path::new("<defaults>"));
    let suite = suite_from_table(&args.suite, table).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let run = resolve(&args.common, &common)?;
    let report = suite.run(run.seed)?;
    write_json(&run.out.join("validation.json"), &report)?;
    for c in &report.cases {
        println!(
            "{} {}: max {:.6e} vs bound {:.6e}, {:.4} of {} trials within (need {:.4})",
            if c.pass { "PASS" } else { "FAIL" },
            c.label,
            c.max_observed,
            c.bound,
            c.pass_fraction,
            c.trials,
            c.required_fraction
        );
    }
    if report.pass {
        Ok(())
    } else {
        Err(CliError::ValidationFailed(report.suite))
    }
}

#[derive(Debug, Clone, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub d: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Minimum distance between means in units of sigma.
    #[arg(long)]
    pub separation: Option<f64>,
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long)]
    pub kind: Option<String>,
    #[arg(long)]
    pub beta: Option<f64>,
}

pub fn cmd_synth(args: &SynthArgs) -> CliResult<()> {
    let file: SynthFile = config::load(args.common.config.as_deref())?;
    let run = resolve(&args.common, &file.common)?;
    let mut spec = SynthSpec::new(
        require(pick(args.k, file.k), "k")?,
        require(pick(args.d, file.d), "d")?,
        require(pick(args.n, file.n), "n")?,
        require(pick(args.separation, file.separation), "separation")?,
    );
    if let Some(s) = pick(args.sigma, file.sigma) {
        spec.sigma = s;
    }
    if let Some(name) = pick(args.kind.clone(), file.kind.clone()) {
        spec.kind = parse_kind(&name, pick(args.beta, file.beta))?;
    }
    spec.seed = run.seed;
    let s = generate(&spec)?;
    write_dataset(&run.out.join("dataset.csv"), &s.data)?;
    let mut truth = ModelFile::from_params(&s.truth);
    truth.labels = s.labels;
    write_json(&run.out.join("truth.json"), &truth)?;
    eprintln!("synth: n = {}, d = {}, k = {}", spec.n, spec.d, spec.k);
    Ok(())
}

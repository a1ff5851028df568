use std::path::PathBuf;

use manifold_vb::harness::{estimate_rate, QuadraticProblem, RateEstimate, RateProblem, ScheduleFamily, SgdSchedule, SpdLogProblem};
use manifold_vb::manifold::SpdPoint;
use manifold_vb::models::{
    generate_synthetic, Dataset, GarchModel, GarchParams, GarchPrior, GaussianCovModel, LogisticModel,
};
use manifold_vb::natural_gradient::{GaussianVariationalParams, WishartVariationalParams};
use manifold_vb::vb::{run_manifold_gvb, run_manifold_wvb, trace_header, VbOutcome};
use manifold_vb::{GaussianParams64, WishartParams64};
use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::config::{Command, DataSource, ExperimentConfig, ModelSpec, RateProblemSpec, RateSpec};
use crate::data::{load_csv_dataset, write_csv_dataset};
use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, write_json, write_table};

/// In-memory result of one command, before anything is written.
#[derive(Debug, Clone)]
pub enum Outcome {
    Gvb {
        model: ModelSpec,
        outcome: VbOutcome<GaussianParams64, f64>,
    },
    Wvb {
        outcome: VbOutcome<WishartParams64, f64>,
        exact: WishartParams64,
        log_marginal_likelihood: f64,
    },
    Rate(RateEstimate),
    Data(Dataset),
}

pub fn load_data(config: &ExperimentConfig) -> CliResult<Dataset> {
    let required: Vec<String> = match &config.model {
        ModelSpec::Logistic { response, .. } if config.command == Command::RunGvb => vec![response.clone()],
        ModelSpec::Garch { column, .. } if config.command == Command::RunGvb => vec![column.clone()],
        _ => vec![],
    };
    match &config.data {
        DataSource::Csv(path) => load_csv_dataset(path, &required),
        DataSource::Synthetic { spec, n, seed } => {
            let ds = generate_synthetic(spec, *n, *seed)?;
            for r in &required {
                ds.column_index(r)
                    .map_err(|_| CliError::Usage(format!("synthetic data has no column {r:?}")))?;
            }
            Ok(ds)
        }
    }
}

fn gvb_init(config: &ExperimentConfig, dim: usize, default_mean: DVector<f64>) -> CliResult<GaussianParams64> {
    let mu = match &config.init.mean {
        Some(m) if m.len() != dim => {
            return Err(CliError::Usage(format!("init.mean has {} entries, the model has {dim} parameters", m.len())))
        }
        Some(m) => DVector::from_column_slice(m),
        None => default_mean,
    };
    Ok(GaussianVariationalParams::new(mu, SpdPoint::scaled_identity(dim, config.init.sigma_scale)?)?)
}

/// Runs the configured command without writing any files.
pub fn execute(config: &ExperimentConfig) -> CliResult<Outcome> {
    match config.command {
        Command::GenerateData => Ok(Outcome::Data(load_data(config)?)),
        Command::RateCheck => Ok(Outcome::Rate(run_rate(&config.rate, config.seed)?)),
        Command::RunWvb => {
            let ModelSpec::GaussianCov { prior_nu, prior_scale } = config.model else {
                return Err(CliError::Usage("run-wvb needs the gaussian_cov model".into()));
            };
            let ds = load_data(config)?;
            let d = ds.observations.ncols();
            let n = ds.n_rows();
            let s0 = SpdPoint::scaled_identity(d, prior_scale)?;
            let model = GaussianCovModel::new(&ds.observations, prior_nu.unwrap_or(d as f64), s0.clone())?;
            let exact = model.posterior()?;
            let nu = config.init.nu.unwrap_or((n as f64).max(d as f64 + 4.0));
            let sigma_q = match config.init.scale {
                Some(s) => SpdPoint::scaled_identity(d, s)?,
                None => SpdPoint::from_symmetrized(s0.matrix() + model.scatter())?,
            };
            let init = WishartVariationalParams::new(nu, sigma_q)?;
            let outcome = run_manifold_wvb(&model, init, &config.optimizer)?;
            let log_marginal_likelihood = model.log_marginal_likelihood()?;
            Ok(Outcome::Wvb { outcome, exact, log_marginal_likelihood })
        }
        Command::RunGvb => {
            let ds = load_data(config)?;
            let outcome = match &config.model {
                ModelSpec::Logistic { response, intercept, prior_variance } => {
                    let (x, y) = ds.split_response(response)?;
                    let x = if *intercept { LogisticModel::add_intercept(&x) } else { x };
                    let dim = x.ncols();
                    let model = LogisticModel::with_prior_variance(x, DVector::from_vec(y), *prior_variance)?;
                    let init = gvb_init(config, dim, DVector::zeros(dim))?;
                    run_manifold_gvb(&model, init, &config.optimizer)?
                }
                ModelSpec::Garch { column, prior_shape, prior_scale } => {
                    let idx = ds.column_index(column)?;
                    let y: Vec<f64> = ds.observations.column(idx).iter().copied().collect();
                    let model = GarchModel::new(y)?.with_prior(GarchPrior::new(*prior_shape, *prior_scale)?);
                    let start = GarchParams { w: 0.1, psi1: 0.5, psi2: 0.5 }.to_unconstrained();
                    let init = gvb_init(config, 3, start)?;
                    run_manifold_gvb(&model, init, &config.optimizer)?
                }
                ModelSpec::GaussianCov { .. } => {
                    return Err(CliError::Usage("run-gvb needs the logistic or garch model".into()))
                }
            };
            Ok(Outcome::Gvb { model: config.model.clone(), outcome })
        }
    }
}

pub fn run_rate(spec: &RateSpec, seed: u64) -> CliResult<RateEstimate> {
    let problem: Box<dyn RateProblem> = match spec.problem {
        RateProblemSpec::SpdLog { dim } => Box::new(SpdLogProblem::default_problem(dim)),
        RateProblemSpec::Quadratic { dim } => Box::new(QuadraticProblem::new(vec![0.0; dim], vec![1.0; dim])),
    };
    let template = SgdSchedule {
        zeta: spec.zeta,
        gamma: 1.0,
        horizon: 1,
        noise_bound: spec.noise_bound,
        epsilon_exponent: 0.5,
    };
    Ok(estimate_rate(problem.as_ref(), spec.family, &template, &spec.horizons, spec.replications, seed)?)
}

/// `E[α + β]` under the variational marginal of `logit(α + β)`, by
/// trapezoidal quadrature over ±8 standard deviations.
pub fn garch_persistence_mean(params: &GaussianParams64) -> f64 {
    let m = params.mu[1];
    let s = params.sigma.matrix()[(1, 1)].sqrt();
    let k = 800;
    let h = 16.0 / k as f64;
    let (mut acc, mut norm) = (0.0, 0.0);
    for i in 0..=k {
        let z = -8.0 + h * i as f64;
        let w = (-0.5 * z * z).exp() * if i == 0 || i == k { 0.5 } else { 1.0 };
        acc += w / (1.0 + (-(m + s * z)).exp());
        norm += w;
    }
    acc / norm
}

fn upper_names(prefix: &str, d: usize) -> Vec<String> {
    (1..=d)
        .flat_map(|i| (i..=d).map(move |j| format!("{prefix}_{i}_{j}")))
        .collect()
}

pub fn gvb_parameter_names(d: usize) -> Vec<String> {
    let mut names: Vec<String> = (1..=d).map(|i| format!("mu_{i}")).collect();
    names.extend(upper_names("sigma", d));
    names
}

pub fn wvb_parameter_names(d: usize) -> Vec<String> {
    let mut names = vec!["nu".to_string()];
    names.extend(upper_names("sigma_q", d));
    names
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

#[derive(Serialize)]
struct GarchSummary {
    w_mean: f64,
    alpha_plus_beta_mean: f64,
    alpha_at_mean: f64,
    beta_at_mean: f64,
}

#[derive(Serialize)]
struct GvbSummary {
    command: &'static str,
    model: &'static str,
    iterations: usize,
    stopped_early: bool,
    final_lower_bound: f64,
    final_smoothed_lower_bound: f64,
    mu: Vec<f64>,
    sigma: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    garch: Option<GarchSummary>,
}

#[derive(Serialize)]
struct WvbSummary {
    command: &'static str,
    model: &'static str,
    iterations: usize,
    stopped_early: bool,
    final_lower_bound: f64,
    final_smoothed_lower_bound: f64,
    log_marginal_likelihood: f64,
    nu: f64,
    sigma_q: Vec<Vec<f64>>,
    exact_nu: f64,
    max_abs_mean_error: f64,
    max_rel_variance_error: f64,
}

#[derive(Serialize)]
struct RateSummary {
    family: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    epsilon: Option<f64>,
    zeta: f64,
    noise_bound: f64,
    replications: usize,
    horizons: Vec<usize>,
    statistics: Vec<f64>,
    slope: f64,
    stderr: f64,
    max_momentum_bound_ratio: f64,
}

/// One row per upper-triangle entry: `(i, j, exact mean, VB mean, exact variance, VB variance)`.
pub fn comparison_rows(vb: &WishartParams64, exact: &WishartParams64) -> CliResult<Vec<Vec<f64>>> {
    let (vm, em) = (vb.mean()?, exact.mean()?);
    let (vv, ev) = (vb.variance()?, exact.variance()?);
    let d = vb.dim();
    let mut out = vec![];
    for i in 0..d {
        for j in i..d {
            out.push(vec![(i + 1) as f64, (j + 1) as f64, em[(i, j)], vm[(i, j)], ev[(i, j)], vv[(i, j)]]);
        }
    }
    Ok(out)
}

fn last_bounds<P>(o: &VbOutcome<P, f64>) -> (usize, f64, f64) {
    o.trace
        .last()
        .map_or((0, f64::NAN, f64::NAN), |r| (r.iteration, r.lower_bound, r.smoothed_lower_bound))
}

fn write_trace<P>(path: &std::path::Path, o: &VbOutcome<P, f64>, names: &[String]) -> CliResult<()> {
    let rows = o.trace.iter().map(|r| {
        let mut row = vec![r.iteration as f64, r.lower_bound, r.smoothed_lower_bound, r.gradient_norm];
        row.extend(&r.parameters);
        row
    });
    write_table(path, &trace_header(names), rows)
}

/// Writes the outputs of `outcome` into the configured directory and
/// returns the files written.
pub fn write_outputs(config: &ExperimentConfig, outcome: &Outcome) -> CliResult<Vec<PathBuf>> {
    let dir = &config.output;
    ensure_dir(dir)?;
    let mut files = vec![];
    match outcome {
        Outcome::Data(ds) => {
            let p = dir.join("data.csv");
            write_csv_dataset(&p, ds)?;
            files.push(p);
        }
        Outcome::Gvb { model, outcome } => {
            let d = outcome.params.dim();
            let p = dir.join("trace.csv");
            write_trace(&p, outcome, &gvb_parameter_names(d))?;
            files.push(p);
            let (iterations, lb, smoothed) = last_bounds(outcome);
            let garch = matches!(model, ModelSpec::Garch { .. }).then(|| {
                let at_mean = GarchParams::from_unconstrained(&outcome.params.mu).expect("three parameters");
                let s = outcome.params.sigma.matrix();
                GarchSummary {
                    w_mean: (outcome.params.mu[0] + 0.5 * s[(0, 0)]).exp(),
                    alpha_plus_beta_mean: garch_persistence_mean(&outcome.params),
                    alpha_at_mean: at_mean.alpha(),
                    beta_at_mean: at_mean.beta(),
                }
            });
            let summary = GvbSummary {
                command: Command::RunGvb.name(),
                model: model.name(),
                iterations,
                stopped_early: outcome.stopped,
                final_lower_bound: lb,
                final_smoothed_lower_bound: smoothed,
                mu: outcome.params.mu.iter().copied().collect(),
                sigma: rows(outcome.params.sigma.matrix()),
                garch,
            };
            let p = dir.join("summary.json");
            write_json(&p, &summary)?;
            files.push(p);
        }
        Outcome::Wvb { outcome, exact, log_marginal_likelihood } => {
            let d = outcome.params.dim();
            let p = dir.join("trace.csv");
            write_trace(&p, outcome, &wvb_parameter_names(d))?;
            files.push(p);
            let table = comparison_rows(&outcome.params, exact)?;
            let header: Vec<String> = ["i", "j", "exact_mean", "vb_mean", "exact_variance", "vb_variance"]
                .iter()
                .map(|s| s.to_string())
                .collect();
            let (max_mean, max_var) = table.iter().fold((0.0f64, 0.0f64), |(a, b), r| {
                (a.max((r[3] - r[2]).abs()), b.max(((r[5] - r[4]) / r[4]).abs()))
            });
            let p = dir.join("comparison.csv");
            write_table(&p, &header, table)?;
            files.push(p);
            let (iterations, lb, smoothed) = last_bounds(outcome);
            let summary = WvbSummary {
                command: Command::RunWvb.name(),
                model: "gaussian_cov",
                iterations,
                stopped_early: outcome.stopped,
                final_lower_bound: lb,
                final_smoothed_lower_bound: smoothed,
                log_marginal_likelihood: *log_marginal_likelihood,
                nu: outcome.params.nu,
                sigma_q: rows(outcome.params.sigma_q.matrix()),
                exact_nu: exact.nu,
                max_abs_mean_error: max_mean,
                max_rel_variance_error: max_var,
            };
            let p = dir.join("summary.json");
            write_json(&p, &summary)?;
            files.push(p);
        }
        Outcome::Rate(est) => {
            let header: Vec<String> = ["horizon", "replication", "statistic"].iter().map(|s| s.to_string()).collect();
            let mut table = vec![];
            for (h, reps) in est.horizons.iter().zip(&est.per_replication) {
                for (r, v) in reps.iter().enumerate() {
                    table.push(vec![*h as f64, r as f64, *v]);
                }
            }
            let p = dir.join("rate.csv");
            write_table(&p, &header, table)?;
            files.push(p);
            let (family, epsilon) = match config.rate.family {
                ScheduleFamily::Nonconvex => ("nonconvex", None),
                ScheduleFamily::StronglyConvex { epsilon } => ("strongly_convex", Some(epsilon)),
            };
            let summary = RateSummary {
                family,
                epsilon,
                zeta: config.rate.zeta,
                noise_bound: config.rate.noise_bound,
                replications: config.rate.replications,
                horizons: est.horizons.clone(),
                statistics: est.statistics.clone(),
                slope: est.fitted_slope,
                stderr: est.slope_stderr,
                max_momentum_bound_ratio: est.max_momentum_bound_ratio,
            };
            let p = dir.join("rate.json");
            write_json(&p, &summary)?;
            files.push(p);
        }
    }
    Ok(files)
}

pub fn run_experiment(config: &ExperimentConfig) -> CliResult<Vec<PathBuf>> {
    let outcome = execute(config)?;
    write_outputs(config, &outcome)
}

//! Experiment configuration: a TOML file plus command-line overrides.
//!
//! ```toml
//! seed = 7
//! output = "runs/wvb"
//!
//! [data]                        # either `path` or a [data.synthetic] table
//! path = "returns.csv"
//!
//! [data.synthetic]
//! kind = "gaussian_cov"         # gaussian_cov | logistic | garch
//! n = 50
//! d = 5
//!
//! [model]
//! name = "gaussian_cov"         # gaussian_cov | logistic | garch
//!
//! [optimizer]
//! learning_rate = 0.01
//! samples = 1000
//!
//! [init]
//! sigma_scale = 0.01
//!
//! [rate]
//! family = "nonconvex"
//! horizons = [100, 1000, 10000]
//! ```
//!
//! All tables reject unknown keys.

use std::path::{Path, PathBuf};

use manifold_vb::estimation::MonteCarloConfig;
use manifold_vb::harness::ScheduleFamily;
use manifold_vb::models::SyntheticSpec;
use manifold_vb::vb::{NuUpdate, OptimizerConfig};
use manifold_vb::OptimizerConfig64;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    RunGvb,
    RunWvb,
    RateCheck,
    GenerateData,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::RunGvb => "run-gvb",
            Command::RunWvb => "run-wvb",
            Command::RateCheck => "rate-check",
            Command::GenerateData => "generate-data",
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub seed: Option<u64>,
    pub output: Option<PathBuf>,
    pub data: Option<DataSection>,
    pub model: Option<ModelSection>,
    pub optimizer: Option<OptimizerSection>,
    pub init: Option<InitSection>,
    pub rate: Option<RateSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DataSection {
    pub path: Option<PathBuf>,
    pub synthetic: Option<SyntheticSection>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SyntheticSection {
    pub kind: Option<String>,
    pub n: Option<usize>,
    pub d: Option<usize>,
    pub seed: Option<u64>,
    pub w: Option<f64>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub intercept: Option<bool>,
    pub coefficients: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSection {
    pub name: Option<String>,
    /// Inverse-Wishart prior degrees of freedom; defaults to `d`.
    pub prior_nu: Option<f64>,
    /// Prior scale matrix `prior_scale · I` (Gaussian covariance model), or
    /// the inverse-gamma scale of `w` (GARCH).
    pub prior_scale: Option<f64>,
    pub prior_shape: Option<f64>,
    pub prior_variance: Option<f64>,
    pub response: Option<String>,
    pub column: Option<String>,
    pub intercept: Option<bool>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OptimizerSection {
    pub learning_rate: Option<f64>,
    pub momentum_weight: Option<f64>,
    pub samples: Option<usize>,
    pub max_iterations: Option<usize>,
    pub patience: Option<usize>,
    pub smoothing_window: Option<usize>,
    pub nu_update: Option<String>,
    pub nu_rate: Option<f64>,
    pub nu_decay: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitSection {
    pub mean: Option<Vec<f64>>,
    pub sigma_scale: Option<f64>,
    pub nu: Option<f64>,
    /// `Σ_q = scale · I`; without it `Σ_q` starts at the prior scale plus the scatter matrix.
    pub scale: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RateSection {
    pub problem: Option<String>,
    pub dim: Option<usize>,
    pub family: Option<String>,
    pub epsilon: Option<f64>,
    pub zeta: Option<f64>,
    pub noise_bound: Option<f64>,
    pub horizons: Option<Vec<usize>>,
    pub replications: Option<usize>,
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub learning_rate: Option<f64>,
    pub momentum_weight: Option<f64>,
    pub max_iterations: Option<usize>,
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum DataSource {
    Csv(PathBuf),
    Synthetic { spec: SyntheticSpec, n: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    GaussianCov { prior_nu: Option<f64>, prior_scale: f64 },
    Logistic { response: String, intercept: bool, prior_variance: f64 },
    Garch { column: String, prior_shape: f64, prior_scale: f64 },
}

impl ModelSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::GaussianCov { .. } => "gaussian_cov",
            ModelSpec::Logistic { .. } => "logistic",
            ModelSpec::Garch { .. } => "garch",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitSpec {
    pub mean: Option<Vec<f64>>,
    pub sigma_scale: f64,
    pub nu: Option<f64>,
    pub scale: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RateProblemSpec {
    SpdLog { dim: usize },
    Quadratic { dim: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateSpec {
    pub problem: RateProblemSpec,
    pub family: ScheduleFamily,
    pub zeta: f64,
    pub noise_bound: f64,
    pub horizons: Vec<usize>,
    pub replications: usize,
}

/// A fully validated configuration with every default filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub seed: u64,
    pub output: PathBuf,
    pub data: DataSource,
    pub model: ModelSpec,
    pub optimizer: OptimizerConfig64,
    pub init: InitSpec,
    pub rate: RateSpec,
}

pub fn parse_config_str(text: &str) -> CliResult<ConfigFile> {
    toml::from_str(text).map_err(|e| CliError::Usage(format!("invalid config: {e}")))
}

/// Reads `path` (if given), applies `overrides` and validates the result.
pub fn parse_config(command: Command, path: Option<&Path>, overrides: &Overrides) -> CliResult<ExperimentConfig> {
    let file = match path {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            parse_config_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", p.display())))?
        }
        None => ConfigFile::default(),
    };
    let base = path.and_then(Path::parent).unwrap_or(Path::new(""));
    resolve(command, file, overrides, base)
}

fn range(key: &str, value: impl std::fmt::Display, bound: &str) -> CliError {
    CliError::Usage(format!("{key} = {value} is out of range: must be {bound}"))
}

fn choice(key: &str, value: &str, valid: &[&str]) -> CliError {
    CliError::Usage(format!("unknown {key} {value:?}; valid values: {}", valid.join(", ")))
}

/// Fills defaults and validates. Relative data paths are taken relative to `base`.
pub fn resolve(command: Command, file: ConfigFile, o: &Overrides, base: &Path) -> CliResult<ExperimentConfig> {
    let seed = o.seed.or(file.seed).unwrap_or(0);
    let output = o.output.clone().or(file.output).unwrap_or_else(|| PathBuf::from("out"));

    let m = file.model.unwrap_or_default();
    let model_name = m.name.clone().unwrap_or_else(|| {
        match command {
            Command::RunGvb => "logistic",
            _ => "gaussian_cov",
        }
        .to_string()
    });
    let model = match model_name.as_str() {
        "gaussian_cov" => {
            if let Some(nu) = m.prior_nu {
                if !(nu.is_finite() && nu > 0.0) {
                    return Err(range("model.prior_nu", nu, "> d - 1"));
                }
            }
            let prior_scale = m.prior_scale.unwrap_or(0.01);
            if !(prior_scale.is_finite() && prior_scale > 0.0) {
                return Err(range("model.prior_scale", prior_scale, "> 0"));
            }
            ModelSpec::GaussianCov { prior_nu: m.prior_nu, prior_scale }
        }
        "logistic" => {
            let prior_variance = m.prior_variance.unwrap_or(manifold_vb::models::DEFAULT_PRIOR_VARIANCE);
            if !(prior_variance.is_finite() && prior_variance > 0.0) {
                return Err(range("model.prior_variance", prior_variance, "> 0"));
            }
            ModelSpec::Logistic {
                response: m.response.clone().unwrap_or_else(|| "y".into()),
                intercept: m.intercept.unwrap_or(false),
                prior_variance,
            }
        }
        "garch" => {
            let prior_shape = m.prior_shape.unwrap_or(1.0);
            let prior_scale = m.prior_scale.unwrap_or(1.0);
            if !(prior_shape.is_finite() && prior_shape > 0.0) {
                return Err(range("model.prior_shape", prior_shape, "> 0"));
            }
            if !(prior_scale.is_finite() && prior_scale > 0.0) {
                return Err(range("model.prior_scale", prior_scale, "> 0"));
            }
            ModelSpec::Garch {
                column: m.column.clone().unwrap_or_else(|| "y".into()),
                prior_shape,
                prior_scale,
            }
        }
        other => return Err(choice("model.name", other, &["gaussian_cov", "logistic", "garch"])),
    };
    match (command, &model) {
        (Command::RunWvb, ModelSpec::GaussianCov { .. }) => {}
        (Command::RunWvb, _) => return Err(CliError::Usage("run-wvb needs model.name = \"gaussian_cov\"".into())),
        (Command::RunGvb, ModelSpec::GaussianCov { .. }) => {
            return Err(CliError::Usage("run-gvb needs model.name = \"logistic\" or \"garch\"".into()))
        }
        _ => {}
    }

    let data = resolve_data(file.data.unwrap_or_default(), &model, seed, base)?;
    let optimizer = resolve_optimizer(file.optimizer.unwrap_or_default(), o, seed)?;
    let init = resolve_init(file.init.unwrap_or_default())?;
    let rate = resolve_rate(file.rate.unwrap_or_default())?;
    Ok(ExperimentConfig { command, seed, output, data, model, optimizer, init, rate })
}

fn resolve_data(d: DataSection, model: &ModelSpec, seed: u64, base: &Path) -> CliResult<DataSource> {
    match (d.path, d.synthetic) {
        (Some(_), Some(_)) => Err(CliError::Usage("give either data.path or [data.synthetic], not both".into())),
        (Some(p), None) => {
            let p = if p.is_relative() { base.join(p) } else { p };
            if !p.is_file() {
                return Err(CliError::Usage(format!("data.path {} does not exist", p.display())));
            }
            Ok(DataSource::Csv(p))
        }
        (None, s) => {
            let s = s.unwrap_or_default();
            let kind = s.kind.clone().unwrap_or_else(|| model.name().to_string());
            let (spec, default_n) = match kind.as_str() {
                "gaussian_cov" => (SyntheticSpec::GaussianCov { d: s.d.unwrap_or(5) }, 50),
                "logistic" => (
                    SyntheticSpec::Logistic {
                        d: s.d.unwrap_or(25),
                        intercept: s.intercept.unwrap_or(false),
                        beta: s.coefficients.clone(),
                    },
                    1000,
                ),
                "garch" => (
                    SyntheticSpec::Garch {
                        w: s.w.unwrap_or(0.05),
                        alpha: s.alpha.unwrap_or(0.85),
                        beta: s.beta.unwrap_or(0.1),
                    },
                    1000,
                ),
                other => return Err(choice("data.synthetic.kind", other, &["gaussian_cov", "logistic", "garch"])),
            };
            if s.d == Some(0) {
                return Err(range("data.synthetic.d", 0, ">= 1"));
            }
            let n = s.n.unwrap_or(default_n);
            if n < 2 {
                return Err(range("data.synthetic.n", n, ">= 2"));
            }
            Ok(DataSource::Synthetic { spec, n, seed: s.seed.unwrap_or(seed) })
        }
    }
}

fn resolve_optimizer(s: OptimizerSection, o: &Overrides, seed: u64) -> CliResult<OptimizerConfig64> {
    let defaults = OptimizerConfig::<f64>::default();
    let learning_rate = o.learning_rate.or(s.learning_rate).unwrap_or(defaults.learning_rate);
    let momentum_weight = o.momentum_weight.or(s.momentum_weight).unwrap_or(defaults.momentum_weight);
    let samples = o.samples.or(s.samples).unwrap_or(defaults.mc.sample_count);
    let max_iterations = o.max_iterations.or(s.max_iterations).unwrap_or(defaults.max_iterations);
    let patience = s.patience.unwrap_or(defaults.patience);
    let smoothing_window = s.smoothing_window.unwrap_or(defaults.smoothing_window);

    if !(learning_rate.is_finite() && learning_rate > 0.0) {
        return Err(range("learning_rate", learning_rate, "> 0"));
    }
    if !(0.0..1.0).contains(&momentum_weight) {
        return Err(range("momentum_weight", momentum_weight, "in [0, 1)"));
    }
    if samples < 2 {
        return Err(range("samples", samples, ">= 2"));
    }
    if max_iterations == 0 {
        return Err(range("max_iterations", 0, ">= 1"));
    }
    if patience == 0 {
        return Err(range("patience", 0, ">= 1"));
    }
    if smoothing_window == 0 {
        return Err(range("smoothing_window", 0, ">= 1"));
    }
    let nu_update = match s.nu_update.as_deref().unwrap_or("scaled") {
        "scaled" => {
            if s.nu_rate.is_some() || s.nu_decay.is_some() {
                return Err(CliError::Usage("nu_rate and nu_decay need nu_update = \"adaptive\"".into()));
            }
            NuUpdate::Scaled
        }
        "adaptive" => {
            let rate = s.nu_rate.unwrap_or(0.1);
            let decay = s.nu_decay.unwrap_or(0.9);
            if !(rate.is_finite() && rate > 0.0) {
                return Err(range("nu_rate", rate, "> 0"));
            }
            if !(decay > 0.0 && decay < 1.0) {
                return Err(range("nu_decay", decay, "in (0, 1)"));
            }
            NuUpdate::Adaptive { rate, decay }
        }
        other => return Err(choice("nu_update", other, &["scaled", "adaptive"])),
    };
    let cfg = OptimizerConfig {
        learning_rate,
        momentum_weight,
        mc: MonteCarloConfig::new(samples, seed),
        max_iterations,
        patience,
        smoothing_window,
        nu_update,
    };
    cfg.validate()?;
    Ok(cfg)
}

fn resolve_init(s: InitSection) -> CliResult<InitSpec> {
    let sigma_scale = s.sigma_scale.unwrap_or(0.01);
    if !(sigma_scale.is_finite() && sigma_scale > 0.0) {
        return Err(range("init.sigma_scale", sigma_scale, "> 0"));
    }
    if let Some(scale) = s.scale {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(range("init.scale", scale, "> 0"));
        }
    }
    if let Some(m) = &s.mean {
        if m.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Usage("init.mean must be finite".into()));
        }
    }
    Ok(InitSpec { mean: s.mean, sigma_scale, nu: s.nu, scale: s.scale })
}

fn resolve_rate(s: RateSection) -> CliResult<RateSpec> {
    let dim = s.dim.unwrap_or(3);
    if dim == 0 {
        return Err(range("rate.dim", 0, ">= 1"));
    }
    let problem = match s.problem.as_deref().unwrap_or("spd_log") {
        "spd_log" => RateProblemSpec::SpdLog { dim },
        "quadratic" => RateProblemSpec::Quadratic { dim },
        other => return Err(choice("rate.problem", other, &["spd_log", "quadratic"])),
    };
    let family = match s.family.as_deref().unwrap_or("nonconvex") {
        "nonconvex" => {
            if s.epsilon.is_some() {
                return Err(CliError::Usage("rate.epsilon needs family = \"strongly_convex\"".into()));
            }
            ScheduleFamily::Nonconvex
        }
        "strongly_convex" => {
            let epsilon = s.epsilon.unwrap_or(0.5);
            if !(epsilon > 0.0 && epsilon < 1.0) {
                return Err(range("rate.epsilon", epsilon, "in (0, 1)"));
            }
            ScheduleFamily::StronglyConvex { epsilon }
        }
        other => return Err(choice("rate.family", other, &["nonconvex", "strongly_convex"])),
    };
    let zeta = s.zeta.unwrap_or(0.5);
    if !(0.0..1.0).contains(&zeta) {
        return Err(range("rate.zeta", zeta, "in [0, 1)"));
    }
    let noise_bound = s.noise_bound.unwrap_or(1.0);
    if !(noise_bound.is_finite() && noise_bound >= 0.0) {
        return Err(range("rate.noise_bound", noise_bound, ">= 0"));
    }
    let horizons = s.horizons.unwrap_or_else(|| vec![100, 1_000, 10_000, 100_000]);
    if horizons.len() < 2 || horizons.windows(2).any(|w| w[0] >= w[1]) || horizons[0] < 2 {
        return Err(CliError::Usage(
            "rate.horizons must hold at least two strictly increasing values >= 2".into(),
        ));
    }
    let replications = s.replications.unwrap_or(50);
    if replications == 0 {
        return Err(range("rate.replications", 0, ">= 1"));
    }
    Ok(RateSpec { problem, family, zeta, noise_bound, horizons, replications })
}

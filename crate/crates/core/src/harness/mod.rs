//! Empirical convergence-rate checks for the analysis form of momentum
//! Riemannian SGD, written for minimisation:
//!
//! ```text
//! λ_{t+1} = R_{λ_t}(−Y_t)
//! Y_{t+1} = ζ Γ_{λ_t→λ_{t+1}}(Y_t) + γ (∇ℒ(λ_{t+1}) + ΔM_{t+1})
//! ```
//!
//! with `Y_0 = γ(∇ℒ(λ_0) + ΔM_0)` and bounded mean-zero noise `ΔM`.

mod problems;

use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::rng::{derive_seed, substream};
use crate::{Error, Result};

pub use problems::{QuadraticProblem, SpdLogProblem};

/// A test problem with an exact gradient and known minimiser.
pub trait RateProblem: Sync {
    fn initial(&self) -> DMatrix<f64>;

    /// Riemannian gradient of the cost at `x`.
    fn gradient(&self, x: &DMatrix<f64>) -> Result<DMatrix<f64>>;

    /// Projection of an ambient matrix onto the tangent space at `x`.
    fn project(&self, x: &DMatrix<f64>, v: DMatrix<f64>) -> DMatrix<f64>;

    fn retract(&self, x: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<DMatrix<f64>>;

    fn transport(&self, from: &DMatrix<f64>, to: &DMatrix<f64>, v: &DMatrix<f64>) -> Result<DMatrix<f64>>;

    /// Squared norm of a tangent vector at `x` under the problem's metric.
    fn norm_sq(&self, x: &DMatrix<f64>, v: &DMatrix<f64>) -> f64;

    /// Squared distance from `x` to the minimiser.
    fn distance_sq(&self, x: &DMatrix<f64>) -> f64;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgdSchedule {
    pub zeta: f64,
    pub gamma: f64,
    pub horizon: usize,
    /// Per-coordinate truncation of the standard normal noise; 0 disables noise.
    pub noise_bound: f64,
    /// Exponent of the strongly convex schedule `γ = T^{−ε}`.
    pub epsilon_exponent: f64,
}

impl SgdSchedule {
    pub fn validate(&self) -> Result<()> {
        if !(self.zeta >= 0.0 && self.zeta < 1.0) {
            return Err(Error::range("zeta", self.zeta, "in [0, 1)"));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(Error::range("gamma", self.gamma, "in (0, 1)"));
        }
        if self.horizon == 0 {
            return Err(Error::range("horizon", 0.0, ">= 1"));
        }
        if !(self.noise_bound >= 0.0) {
            return Err(Error::range("noise_bound", self.noise_bound, ">= 0"));
        }
        if !(self.epsilon_exponent > 0.0 && self.epsilon_exponent < 1.0) {
            return Err(Error::range("epsilon_exponent", self.epsilon_exponent, "in (0, 1)"));
        }
        Ok(())
    }
}

/// Standard normal truncated to `[−bound, bound]` by rejection.
pub fn truncated_normal(bound: f64, rng: &mut ChaCha8Rng) -> f64 {
    if bound <= 0.0 {
        return 0.0;
    }
    loop {
        let z: f64 = rng.sample(StandardNormal);
        if z.abs() <= bound {
            return z;
        }
    }
}

fn noise<P: RateProblem + ?Sized>(p: &P, x: &DMatrix<f64>, bound: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    if bound <= 0.0 {
        return DMatrix::zeros(x.nrows(), x.ncols());
    }
    let raw = DMatrix::from_fn(x.nrows(), x.ncols(), |_, _| truncated_normal(bound, rng));
    p.project(x, raw)
}

/// Per-iteration records of one run. Index `k` holds the values at `λ_{k+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct SgdRun {
    pub gradient_norm_sq: Vec<f64>,
    pub distance_sq: Vec<f64>,
    /// `max_t |Y_t|`.
    pub max_momentum_norm: f64,
    /// `max_t |∇ℒ(λ_t)| + |ΔM_t|`, the empirical `b_ℒ`.
    pub gradient_bound: f64,
}

impl SgdRun {
    /// `max_t |Y_t| / (2γ b_ℒ / (1 − ζ))`; at most 1 when the bound holds.
    pub fn momentum_bound_ratio(&self, schedule: &SgdSchedule) -> f64 {
        let bound = 2.0 * schedule.gamma * self.gradient_bound / (1.0 - schedule.zeta);
        if bound > 0.0 {
            self.max_momentum_norm / bound
        } else {
            0.0
        }
    }
}

pub fn run_sgd_scheme<P: RateProblem + ?Sized>(problem: &P, schedule: &SgdSchedule, seed: u64) -> Result<SgdRun> {
    schedule.validate()?;
    let mut rng = substream(seed, 0, 0);
    let (zeta, gamma) = (schedule.zeta, schedule.gamma);
    let mut x = problem.initial();
    let g = problem.gradient(&x)?;
    let m = noise(problem, &x, schedule.noise_bound, &mut rng);
    let mut b = problem.norm_sq(&x, &g).sqrt() + problem.norm_sq(&x, &m).sqrt();
    let mut y = (g + m) * gamma;
    let mut max_y = problem.norm_sq(&x, &y).sqrt();

    let mut run = SgdRun {
        gradient_norm_sq: Vec::with_capacity(schedule.horizon),
        distance_sq: Vec::with_capacity(schedule.horizon),
        max_momentum_norm: 0.0,
        gradient_bound: 0.0,
    };
    for _ in 0..schedule.horizon {
        let next = problem.retract(&x, &(-&y))?;
        let g = problem.gradient(&next)?;
        let m = noise(problem, &next, schedule.noise_bound, &mut rng);
        let g_sq = problem.norm_sq(&next, &g);
        b = b.max(g_sq.sqrt() + problem.norm_sq(&next, &m).sqrt());
        let transported = problem.transport(&x, &next, &y)?;
        y = transported * zeta + (g + m) * gamma;
        max_y = max_y.max(problem.norm_sq(&next, &y).sqrt());
        run.gradient_norm_sq.push(g_sq);
        run.distance_sq.push(problem.distance_sq(&next));
        x = next;
        if !x.iter().all(|v| v.is_finite()) {
            return Err(Error::Numerical("iterate became non-finite".into()));
        }
    }
    run.max_momentum_norm = max_y;
    run.gradient_bound = b;
    Ok(run)
}

/// Step-size schedule as a function of the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScheduleFamily {
    /// `γ = 1/√T`; statistic `min_t E|∇ℒ(λ_t)|²`.
    Nonconvex,
    /// `γ = T^{−ε}`; statistic `E|λ_T − λ*|²`.
    StronglyConvex { epsilon: f64 },
}

impl ScheduleFamily {
    pub fn gamma(&self, horizon: usize) -> f64 {
        let t = horizon as f64;
        match self {
            ScheduleFamily::Nonconvex => 1.0 / t.sqrt(),
            ScheduleFamily::StronglyConvex { epsilon } => t.powf(-epsilon),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateEstimate {
    pub horizons: Vec<usize>,
    pub statistics: Vec<f64>,
    /// `per_replication[i][r]`: replication `r`'s contribution at horizon `i`.
    pub per_replication: Vec<Vec<f64>>,
    pub fitted_slope: f64,
    pub slope_stderr: f64,
    /// Largest momentum-bound ratio seen in any run.
    pub max_momentum_bound_ratio: f64,
}

/// Least-squares slope of `ln y` on `ln x`, with its standard error.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::Config("need at least two matching points to fit a slope".into()));
    }
    if let Some(v) = x.iter().chain(y).find(|v| !(**v > 0.0)) {
        return Err(Error::Numerical(format!("cannot take the log of {v}")));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let stderr = if lx.len() > 2 {
        let ssr: f64 = lx.iter().zip(&ly).map(|(a, b)| (b - my - slope * (a - mx)).powi(2)).sum();
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok((slope, stderr))
}

/// Runs `replications` seeded runs per horizon and fits the decay order.
///
/// `template` supplies `ζ` and the noise bound; `γ` and `T` come from the
/// family and the horizon.
pub fn estimate_rate<P: RateProblem + ?Sized>(
    problem: &P,
    family: ScheduleFamily,
    template: &SgdSchedule,
    horizons: &[usize],
    replications: usize,
    seed: u64,
) -> Result<RateEstimate> {
    if horizons.windows(2).any(|w| w[0] >= w[1]) || horizons.is_empty() {
        return Err(Error::Config("horizons must be non-empty and strictly increasing".into()));
    }
    if replications == 0 {
        return Err(Error::range("replications", 0.0, ">= 1"));
    }
    let mut statistics = vec![];
    let mut per_replication = vec![];
    let mut max_ratio: f64 = 0.0;
    for &horizon in horizons {
        let schedule = SgdSchedule {
            gamma: family.gamma(horizon),
            horizon,
            epsilon_exponent: match family {
                ScheduleFamily::StronglyConvex { epsilon } => epsilon,
                ScheduleFamily::Nonconvex => template.epsilon_exponent,
            },
            ..*template
        };
        let runs: Vec<SgdRun> = (0..replications)
            .into_par_iter()
            .map(|r| run_sgd_scheme(problem, &schedule, derive_seed(derive_seed(seed, horizon as u64), r as u64)))
            .collect::<Result<_>>()?;
        for run in &runs {
            max_ratio = max_ratio.max(run.momentum_bound_ratio(&schedule));
        }
        let reps = runs.len() as f64;
        let values: Vec<f64> = match family {
            ScheduleFamily::Nonconvex => {
                let mut mean = vec![0.0; horizon];
                for run in &runs {
                    for (m, v) in mean.iter_mut().zip(&run.gradient_norm_sq) {
                        *m += v / reps;
                    }
                }
                let best = (0..horizon).min_by(|&a, &b| mean[a].total_cmp(&mean[b])).unwrap_or(0);
                runs.iter().map(|r| r.gradient_norm_sq[best]).collect()
            }
            ScheduleFamily::StronglyConvex { .. } => runs.iter().map(|r| r.distance_sq[horizon - 1]).collect(),
        };
        statistics.push(values.iter().sum::<f64>() / reps);
        per_replication.push(values);
    }
    let xs: Vec<f64> = horizons.iter().map(|&t| t as f64).collect();
    let (fitted_slope, slope_stderr) = if horizons.len() >= 2 {
        log_log_slope(&xs, &statistics)?
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(RateEstimate {
        horizons: horizons.to_vec(),
        statistics,
        per_replication,
        fitted_slope,
        slope_stderr,
        max_momentum_bound_ratio: max_ratio,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn schedule(zeta: f64, gamma: f64, horizon: usize, noise_bound: f64) -> SgdSchedule {
        SgdSchedule {
            zeta,
            gamma,
            horizon,
            noise_bound,
            epsilon_exponent: 0.5,
        }
    }

    #[test]
    fn noiseless_quadratic_is_gradient_descent() {
        let p = QuadraticProblem::new(vec![1.0, -2.0, 0.5], vec![3.0, 1.0, -1.0]);
        let gamma = 0.2;
        let run = run_sgd_scheme(&p, &schedule(0.0, gamma, 50, 0.0), 1).unwrap();
        let d0 = p.distance_sq(&p.initial());
        for (t, d) in run.distance_sq.iter().enumerate() {
            let expected = d0 * (1.0 - gamma).powi(2 * (t as i32 + 1));
            assert_relative_eq!(*d, expected, epsilon = 1e-12, max_relative = 1e-12);
        }
    }

    #[test]
    fn noiseless_spd_is_riemannian_gradient_descent() {
        let p = SpdLogProblem::default_problem(3);
        let gamma = 0.3;
        let run = run_sgd_scheme(&p, &schedule(0.0, gamma, 20, 0.0), 1).unwrap();
        let mut x = p.initial();
        for t in 0..20 {
            let g = p.gradient(&x).unwrap();
            x = p.retract(&x, &(g * -gamma)).unwrap();
            assert_relative_eq!(run.distance_sq[t], p.distance_sq(&x), epsilon = 1e-12);
        }
        assert!(run.distance_sq[19] < 1e-3 * p.distance_sq(&p.initial()));
    }

    #[test]
    fn momentum_norm_respects_bound() {
        let p = SpdLogProblem::default_problem(3);
        for zeta in [0.0, 0.5, 0.9] {
            let s = schedule(zeta, 0.05, 2000, 1.0);
            let run = run_sgd_scheme(&p, &s, 3).unwrap();
            assert!(run.momentum_bound_ratio(&s) <= 1.0, "zeta {zeta}: {}", run.momentum_bound_ratio(&s));
        }
    }

    #[test]
    fn reproducible() {
        let p = SpdLogProblem::default_problem(2);
        let s = schedule(0.5, 0.05, 300, 1.0);
        assert_eq!(run_sgd_scheme(&p, &s, 8).unwrap(), run_sgd_scheme(&p, &s, 8).unwrap());
        assert_ne!(run_sgd_scheme(&p, &s, 8).unwrap(), run_sgd_scheme(&p, &s, 9).unwrap());
    }

    #[test]
    fn truncation_is_respected() {
        let mut rng = substream(1, 0, 0);
        let draws: Vec<f64> = (0..10_000).map(|_| truncated_normal(0.5, &mut rng)).collect();
        assert!(draws.iter().all(|v| v.abs() <= 0.5));
        assert!((draws.iter().sum::<f64>() / 10_000.0).abs() < 0.01);
        assert_eq!(truncated_normal(0.0, &mut rng), 0.0);
    }

    #[test]
    fn slope_fit() {
        let x = [10.0, 100.0, 1000.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-0.7)).collect();
        let (s, se) = log_log_slope(&x, &y).unwrap();
        assert_relative_eq!(s, -0.7, epsilon = 1e-12);
        assert!(se < 1e-10);
        assert!(log_log_slope(&[1.0, 2.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn noiseless_strongly_convex_statistic_decreases() {
        let p = QuadraticProblem::new(vec![0.0; 4], vec![1.0; 4]);
        let est = estimate_rate(
            &p,
            ScheduleFamily::StronglyConvex { epsilon: 0.5 },
            &schedule(0.5, 0.5, 1, 0.0),
            &[10, 30, 100, 300],
            2,
            4,
        )
        .unwrap();
        assert!(est.statistics.windows(2).all(|w| w[1] < w[0]), "{:?}", est.statistics);
    }

    #[test]
    fn rejects_bad_horizons() {
        let p = QuadraticProblem::new(vec![0.0], vec![1.0]);
        let s = schedule(0.5, 0.5, 1, 1.0);
        assert!(estimate_rate(&p, ScheduleFamily::Nonconvex, &s, &[100, 10], 2, 0).is_err());
        assert!(run_sgd_scheme(&p, &SgdSchedule { zeta: 1.0, ..s }, 0).is_err());
    }
}

//! Monte-Carlo regret estimation with a deterministic parallel reduction.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::episode::run_episode_with;
use crate::dp::dp_solve;
use crate::error::{invalid, Error, Result};
use crate::instance::ProblemInstance;
use crate::lp::lp_benchmark;
use crate::policy::PolicyKind;
use crate::rng::RunStreams;

/// What regret is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Benchmark {
    /// `T * v(B / T)`, the LP upper bound on any policy.
    #[default]
    Lp,
    /// The exact optimal value from the dynamic program (small unit-cost instances).
    Dp,
}

/// How an episode's reward is scored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RewardAccounting {
    /// Sum of the expected rewards of the taken pairs. Same expectation as the
    /// realized total, without the reward noise.
    #[default]
    Expected,
    /// Sum of the realized rewards.
    Realized,
}

/// Fewest runs for which a confidence interval is reported.
pub const MIN_RUNS_FOR_CI: u64 = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloConfig {
    pub runs: u64,
    pub master_seed: u64,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
    pub benchmark: Benchmark,
    pub accounting: RewardAccounting,
}

impl MonteCarloConfig {
    pub fn new(runs: u64, master_seed: u64) -> Self {
        Self {
            runs,
            master_seed,
            threads: None,
            benchmark: Benchmark::Lp,
            accounting: RewardAccounting::Expected,
        }
    }
}

/// Regret estimate at one horizon.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretPoint {
    pub horizon: u64,
    pub budget: u64,
    pub runs: u64,
    pub mean_reward: f64,
    /// Standard deviation of the per-run totals.
    pub reward_sd: f64,
    pub benchmark: f64,
    pub regret_mean: f64,
    /// Half-width of the normal 95% interval; absent below [`MIN_RUNS_FOR_CI`] runs.
    pub regret_ci95: Option<f64>,
}

impl RegretPoint {
    pub fn std_error(&self) -> f64 {
        self.reward_sd / (self.runs as f64).sqrt()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretReport {
    pub policy: String,
    pub rho: f64,
    pub seed: u64,
    /// The requested horizon.
    pub main: RegretPoint,
    /// Separate episodes at each checkpoint horizon, budget scaled to keep `rho`.
    pub checkpoints: Vec<RegretPoint>,
    pub notes: Vec<String>,
}

/// Runs `f(run)` for every run index on a pool of the requested size and
/// returns the results in run order.
pub fn parallel_runs<T, F>(runs: u64, threads: Option<usize>, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u64) -> Result<T> + Sync + Send,
{
    let work = || (0..runs).into_par_iter().map(&f).collect::<Result<Vec<T>>>();
    match threads {
        None => work(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| Error::Internal(format!("thread pool: {e}")))?
            .install(work),
    }
}

/// Budget of a checkpoint horizon at the same ratio, `floor(B * T' / T)`.
pub fn scaled_budget(horizon: u64, budget: u64, checkpoint: u64) -> u64 {
    if horizon == 0 {
        return 0;
    }
    ((budget as u128 * checkpoint as u128) / horizon as u128) as u64
}

/// Benchmark value for `(T, B)`.
pub fn benchmark_value(instance: &ProblemInstance, horizon: u64, budget: u64, benchmark: Benchmark) -> Result<f64> {
    match benchmark {
        Benchmark::Lp => lp_benchmark(instance, horizon, budget),
        Benchmark::Dp => Ok(dp_solve(instance, horizon, budget)?.value(horizon, budget)),
    }
}

/// Per-run totals of `kind` at `(T, B)`, in run order.
pub fn run_totals(instance: &ProblemInstance, kind: &PolicyKind, horizon: u64, budget: u64, cfg: &MonteCarloConfig) -> Result<(Vec<f64>, Vec<String>)> {
    let prepared = kind.prepare(instance, horizon, budget)?;
    let accounting = cfg.accounting;
    let totals = parallel_runs(cfg.runs, cfg.threads, |run| {
        let mut policy = prepared.instantiate()?;
        let mut streams = RunStreams::new(cfg.master_seed, run);
        let s = run_episode_with(instance, policy.as_mut(), horizon, budget, &mut streams, |_| {})?;
        Ok(match accounting {
            RewardAccounting::Expected => s.total_expected_reward,
            RewardAccounting::Realized => s.total_reward,
        })
    })?;
    Ok((totals, prepared.notes().to_vec()))
}

/// Mean and sample standard deviation, summed in slice order.
pub fn mean_sd(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = values.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Estimates regret at one horizon.
pub fn estimate_point(instance: &ProblemInstance, kind: &PolicyKind, horizon: u64, budget: u64, cfg: &MonteCarloConfig) -> Result<(RegretPoint, Vec<String>)> {
    if cfg.runs < 2 {
        return Err(invalid("regret estimation needs at least 2 runs"));
    }
    let benchmark = benchmark_value(instance, horizon, budget, cfg.benchmark)?;
    let (totals, notes) = run_totals(instance, kind, horizon, budget, cfg)?;
    let (mean, sd) = mean_sd(&totals);
    let ci = (cfg.runs >= MIN_RUNS_FOR_CI).then(|| 1.96 * sd / (cfg.runs as f64).sqrt());
    Ok((
        RegretPoint {
            horizon,
            budget,
            runs: cfg.runs,
            mean_reward: mean,
            reward_sd: sd,
            benchmark,
            regret_mean: benchmark - mean,
            regret_ci95: ci,
        },
        notes,
    ))
}

/// Regret of `kind` at `(T, B)` plus a curve of separate episodes at each
/// checkpoint horizon.
pub fn estimate_regret(
    instance: &ProblemInstance,
    kind: &PolicyKind,
    horizon: u64,
    budget: u64,
    checkpoints: &[u64],
    cfg: &MonteCarloConfig,
) -> Result<RegretReport> {
    let (main, mut notes) = estimate_point(instance, kind, horizon, budget, cfg)?;
    let mut curve = Vec::with_capacity(checkpoints.len());
    for &tp in checkpoints {
        let (point, extra) = estimate_point(instance, kind, tp, scaled_budget(horizon, budget, tp), cfg)?;
        for n in extra {
            if !notes.contains(&n) {
                notes.push(n);
            }
        }
        curve.push(point);
    }
    Ok(RegretReport {
        policy: kind.label(),
        rho: if horizon == 0 { 0.0 } else { budget as f64 / horizon as f64 },
        seed: cfg.master_seed,
        main,
        checkpoints: curve,
        notes,
    })
}

/// Geometric checkpoint grid `T0 * 2^i` up to and including `max`.
pub fn geometric_grid(start: u64, max: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut t = start.max(1);
    while t <= max {
        out.push(t);
        t *= 2;
    }
    out
}

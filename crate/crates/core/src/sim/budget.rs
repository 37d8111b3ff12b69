//! Statistics of the remaining budget `b_tau` across runs.

use serde::{Deserialize, Serialize};

use super::episode::run_episode_with;
use super::regret::{mean_sd, parallel_runs};
use crate::clock::EpisodeTrace;
use crate::error::{invalid, Result};
use crate::instance::ProblemInstance;
use crate::policy::PolicyKind;
use crate::rng::RunStreams;

/// Mean of `b_tau` when the budget evolves as sampling without replacement.
pub fn hypergeometric_mean(horizon: u64, budget: u64, tau: u64) -> f64 {
    if horizon == 0 {
        return 0.0;
    }
    budget as f64 * tau as f64 / horizon as f64
}

/// Variance `((T - tau) / (T - 1)) * tau * rho * (1 - rho)`.
pub fn hypergeometric_variance(horizon: u64, budget: u64, tau: u64) -> f64 {
    if horizon <= 1 || tau >= horizon {
        return 0.0;
    }
    let rho = budget as f64 / horizon as f64;
    (horizon - tau) as f64 / (horizon - 1) as f64 * tau as f64 * rho * (1.0 - rho)
}

/// Empirical two-sided tail frequencies at one deviation level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailCheck {
    pub delta: f64,
    /// Fraction of runs with `b_tau < (rho - delta) tau`.
    pub lower: f64,
    /// Fraction of runs with `b_tau > (rho + delta) tau`.
    pub upper: f64,
    /// `exp(-2 delta^2 tau)`.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetStats {
    pub tau: u64,
    pub samples: usize,
    pub mean: f64,
    /// Unbiased sample variance.
    pub variance: f64,
    pub theory_mean: f64,
    pub theory_variance: f64,
    pub tails: Vec<TailCheck>,
}

impl BudgetStats {
    /// Standard error of the empirical mean under the theoretical variance.
    pub fn mean_std_error(&self) -> f64 {
        (self.theory_variance / self.samples as f64).sqrt()
    }

    /// Distance of the empirical mean from `rho * tau` in standard errors.
    pub fn mean_z(&self) -> f64 {
        let se = self.mean_std_error();
        if se == 0.0 {
            return if self.mean == self.theory_mean { 0.0 } else { f64::INFINITY };
        }
        (self.mean - self.theory_mean) / se
    }

    /// `|empirical / theoretical - 1|`; zero when both vanish.
    pub fn variance_rel_error(&self) -> f64 {
        if self.theory_variance == 0.0 {
            return if self.variance == 0.0 { 0.0 } else { f64::INFINITY };
        }
        (self.variance / self.theory_variance - 1.0).abs()
    }
}

/// Summarizes samples of `b_tau` from an episode of horizon `T` and budget `B`.
pub fn budget_stats(samples: &[u64], horizon: u64, budget: u64, tau: u64, deltas: &[f64]) -> Result<BudgetStats> {
    if samples.is_empty() {
        return Err(invalid("budget statistics need at least one sample"));
    }
    if tau == 0 || tau > horizon {
        return Err(invalid(format!("tau = {tau} outside 1..={horizon}")));
    }
    let values: Vec<f64> = samples.iter().map(|&b| b as f64).collect();
    let (mean, sd) = mean_sd(&values);
    let rho = budget as f64 / horizon as f64;
    let t = tau as f64;
    let n = samples.len() as f64;
    let tails = deltas
        .iter()
        .map(|&delta| TailCheck {
            delta,
            lower: values.iter().filter(|&&b| b < (rho - delta) * t).count() as f64 / n,
            upper: values.iter().filter(|&&b| b > (rho + delta) * t).count() as f64 / n,
            bound: (-2.0 * delta * delta * t).exp(),
        })
        .collect();
    Ok(BudgetStats {
        tau,
        samples: samples.len(),
        mean,
        variance: sd * sd,
        theory_mean: hypergeometric_mean(horizon, budget, tau),
        theory_variance: hypergeometric_variance(horizon, budget, tau),
        tails,
    })
}

/// Budget statistics over a set of recorded traces sharing `(T, B)`.
pub fn budget_stats_from_traces(traces: &[EpisodeTrace], tau: u64, deltas: &[f64]) -> Result<BudgetStats> {
    let first = traces.first().ok_or_else(|| invalid("no traces"))?;
    let samples = traces
        .iter()
        .map(|tr| {
            if (tr.horizon, tr.budget) != (first.horizon, first.budget) {
                return Err(invalid("traces differ in horizon or budget"));
            }
            tr.remaining_budget_at(tau).ok_or_else(|| invalid(format!("tau = {tau} outside trace")))
        })
        .collect::<Result<Vec<_>>>()?;
    budget_stats(&samples, first.horizon, first.budget, tau, deltas)
}

/// Runs `runs` episodes and returns, for each requested `tau`, the remaining
/// budget at the start of the round with `tau` rounds left (one sample per run,
/// in run order).
#[allow(clippy::too_many_arguments)]
pub fn sample_remaining_budget(
    instance: &ProblemInstance,
    kind: &PolicyKind,
    horizon: u64,
    budget: u64,
    taus: &[u64],
    runs: u64,
    master_seed: u64,
    threads: Option<usize>,
) -> Result<Vec<Vec<u64>>> {
    if let Some(&bad) = taus.iter().find(|&&tau| tau == 0 || tau > horizon) {
        return Err(invalid(format!("tau = {bad} outside 1..={horizon}")));
    }
    let prepared = kind.prepare(instance, horizon, budget)?;
    let per_run = parallel_runs(runs, threads, |run| {
        let mut policy = prepared.instantiate()?;
        let mut streams = RunStreams::new(master_seed, run);
        let mut out: Vec<u64> = taus.iter().map(|_| budget).collect();
        run_episode_with(instance, policy.as_mut(), horizon, budget, &mut streams, |r| {
            // After round t the clock holds b for the round with T - t left.
            let tau_next = horizon - r.t;
            for (slot, &tau) in out.iter_mut().zip(taus) {
                if tau == tau_next {
                    *slot = r.remaining_budget;
                }
            }
        })?;
        Ok(out)
    })?;
    Ok((0..taus.len()).map(|i| per_run.iter().map(|row| row[i]).collect()).collect())
}

//! Explore-then-exploit for heterogeneous costs: round-robin exploration per
//! context, then the adaptive LP on frozen empirical means.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::context_model::ceil_tolerant;
use super::lp_policy::LpPolicy;
use super::ucb::{IndexSource, UcbEstimator};
use super::{Decision, Policy, RoundView};
use crate::error::{invalid, Result};
use crate::instance::{Action, ProblemInstance};
use crate::lp::{Rate, RateComparison, VirtualActionTable};
use crate::rng::PolicyRng;

/// `ceil(K / ((1 - delta) pi_min) + ln T * max{1 / delta^2, 16 K / ((1 - delta) pi_min D^2)})`
/// with `D = Delta*`, given `ln T` directly.
pub fn eps_length(ln_t: f64, num_actions: usize, delta: f64, pi_min: f64, delta_star: f64) -> Result<u64> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(invalid("exploration slack must lie in (0, 1)"));
    }
    if pi_min <= 0.0 {
        return Err(invalid("smallest context probability must be positive"));
    }
    if delta_star <= 0.0 {
        return Err(invalid("rate separation is zero; use the confidence-level test instead"));
    }
    let k = num_actions as f64;
    let scale = (1.0 - delta) * pi_min;
    let raw = k / scale + ln_t.max(0.0) * (1.0 / (delta * delta)).max(16.0 * k / (scale * delta_star * delta_star));
    Ok(ceil_tolerant(raw))
}

/// Smallest positive cost gap within a context, the dummy action included.
pub fn min_cost_gap(instance: &ProblemInstance) -> u64 {
    let mut best = u64::MAX;
    for j in 0..instance.num_contexts() {
        let mut costs: Vec<u64> = instance.cost_row(j).to_vec();
        costs.push(0);
        costs.sort_unstable();
        costs.dedup();
        for w in costs.windows(2) {
            best = best.min(w[1] - w[0]);
        }
    }
    best
}

/// Smallest gap between any two distinct rates `(u_k1 - u_k2) / (c_k1 - c_k2)`
/// over all contexts, pairs with equal cost excluded.
pub fn min_rate_gap(instance: &ProblemInstance) -> f64 {
    let mut rates = Vec::new();
    for j in 0..instance.num_contexts() {
        let (u, c) = (instance.reward_row(j), instance.cost_row(j));
        for k1 in 0..u.len() {
            rates.push(u[k1] / c[k1] as f64);
            for k2 in 0..k1 {
                if c[k1] != c[k2] {
                    rates.push((u[k1] - u[k2]) / (c[k1] as f64 - c[k2] as f64));
                }
            }
        }
    }
    rates.sort_by(|a, b| a.partial_cmp(b).unwrap());
    rates.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

/// Confidence-level test for one rate comparison.
/// Passes iff `exp(-2 D'^2 min(C11, C12)) <= T^-2` and likewise for the second
/// pair, with `D' = cost_gap * (xi1 - xi2) / 2`.
pub fn clt_test(horizon: u64, xi1: f64, xi2: f64, cost_gap: f64, counts1: (u64, u64), counts2: (u64, u64)) -> bool {
    let d = cost_gap * (xi1 - xi2) / 2.0;
    if d == 0.0 {
        return false;
    }
    let bound = 1.0 / (horizon as f64 * horizon as f64);
    let ok = |(a, b): (u64, u64)| (-2.0 * d * d * a.min(b) as f64).exp() <= bound;
    ok(counts1) && ok(counts2)
}

/// How long exploration lasts.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Exploration {
    /// A fixed number of rounds.
    Rounds(u64),
    /// Until every rate comparison behind the LP passes the confidence test.
    ConfidenceTest,
}

pub struct EpsFirstPolicy {
    name: String,
    instance: ProblemInstance,
    horizon: u64,
    exploration: Exploration,
    exploring: bool,
    stats: UcbEstimator,
    exploit: LpPolicy<UcbEstimator>,
    cost_gap: f64,
    diagnostics: Vec<String>,
}

impl EpsFirstPolicy {
    /// `exploit` must plan with the same estimator the policy updates; the
    /// policy hands it a frozen copy when exploration ends.
    pub fn new(
        name: impl Into<String>,
        instance: &ProblemInstance,
        horizon: u64,
        exploration: Exploration,
        stats: UcbEstimator,
        exploit: LpPolicy<UcbEstimator>,
    ) -> Self {
        let exploring = !matches!(exploration, Exploration::Rounds(0));
        let mut policy = Self {
            name: name.into(),
            instance: instance.clone(),
            horizon,
            exploration,
            exploring,
            stats,
            exploit,
            cost_gap: min_cost_gap(instance) as f64,
            diagnostics: Vec::new(),
        };
        if !exploring {
            // No exploration: plan with the given statistics from the start.
            policy.stats.freeze();
            policy.exploit.replace_source(policy.stats.clone());
        }
        policy
    }

    pub fn is_exploring(&self) -> bool {
        self.exploring
    }

    fn rate(&self, r: Rate) -> (f64, (u64, u64)) {
        let c = self.instance.cost_row(r.context);
        let mean = |k| self.stats.mean(r.context, k);
        let count = |k| self.stats.count(r.context, k);
        match r.lo {
            None => (mean(r.hi) / c[r.hi] as f64, (count(r.hi), u64::MAX)),
            Some(lo) => (
                (mean(r.hi) - mean(lo)) / (c[r.hi] as f64 - c[lo] as f64),
                (count(r.hi), count(lo)),
            ),
        }
    }

    /// Whether every comparison made while solving the LP on current means passes.
    fn comparisons_pass(&self) -> Result<bool> {
        let nj = self.instance.num_contexts();
        let nk = self.instance.num_actions();
        if (0..nj).any(|j| self.stats.counts_row(j).contains(&0)) {
            return Ok(false);
        }
        let means: Vec<f64> = (0..nj).flat_map(|j| (0..nk).map(move |k| (j, k))).map(|(j, k)| self.stats.mean(j, k)).collect();
        let all: Vec<usize> = (0..nk).collect();
        let mut log: Vec<RateComparison> = Vec::new();
        VirtualActionTable::from_rows(
            nj,
            nk,
            |j| (self.instance.cost_row(j), &means[j * nk..(j + 1) * nk]),
            |_| &all[..],
            Some(&mut log),
        )?;
        Ok(log.iter().all(|cmp| {
            let (x1, n1) = self.rate(cmp.larger);
            let (x2, n2) = self.rate(cmp.smaller);
            clt_test(self.horizon, x1, x2, self.cost_gap, n1, n2)
        }))
    }

    fn end_exploration(&mut self, t: u64) {
        self.exploring = false;
        self.stats.freeze();
        self.diagnostics.push(format!("exploration ended before round {t}"));
    }
}

impl Policy for EpsFirstPolicy {
    fn name(&self) -> &str {
        &self.name
    }

    fn decide(&mut self, view: &RoundView<'_>, rng: &mut PolicyRng) -> Result<Decision> {
        if self.exploring {
            let done = match self.exploration {
                Exploration::Rounds(n) => view.t > n,
                Exploration::ConfidenceTest => self.comparisons_pass()?,
            };
            if done {
                self.end_exploration(view.t);
                self.exploit.replace_source(self.stats.clone());
            }
        }
        if !self.exploring {
            return self.exploit.decide(view, rng);
        }
        let counts = self.stats.counts_row(view.context);
        let least = *counts.iter().min().expect("at least one action");
        let ties: Vec<usize> = (0..counts.len()).filter(|&k| counts[k] == least).collect();
        let k = if ties.len() == 1 { ties[0] } else { ties[rng.random_range(0..ties.len())] };
        let action = if self.instance.cost(view.context, k) <= view.remaining_budget {
            Action::Arm(k)
        } else {
            Action::Skip
        };
        Ok(Decision {
            action,
            take_prob: None,
            threshold: None,
        })
    }

    fn observe(&mut self, context: usize, action: Action, reward: f64) {
        if let Action::Arm(k) = action {
            self.stats.observe(context, k, reward);
        }
    }

    fn diagnostics(&self) -> Vec<String> {
        let mut out = self.diagnostics.clone();
        out.extend(self.exploit.diagnostics());
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eps_length_examples() {
        assert_eq!(eps_length(10.0, 5, 0.5, 0.1, 0.2).unwrap(), 400_100);
        assert_eq!(eps_length(0.0, 1, 0.5, 1.0, 1.0).unwrap(), 2);
        // Small slack: 1 / delta^2 dominates.
        let v = eps_length(1.0, 1, 0.01, 1.0, 1.0).unwrap();
        assert_eq!(v, (1.0f64 / 0.99 + 10_000.0).ceil() as u64);
        assert!(eps_length(1.0, 1, 0.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn clt_examples() {
        assert!(!clt_test(100, 0.4, 0.0, 1.0, (60, 80), (70, 90)));
        assert!(clt_test(100, 0.4, 0.0, 1.0, (120, 130), (125, 140)));
        assert!(!clt_test(100, 0.3, 0.3, 1.0, (u64::MAX, u64::MAX), (u64::MAX, u64::MAX)));
    }
}

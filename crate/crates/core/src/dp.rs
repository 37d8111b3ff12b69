//! Exact finite-horizon dynamic program for unit-cost instances.
//!
//! `V[tau][b]` is the optimal expected reward-to-go with `tau` rounds and `b`
//! budget units left. Each round the agent sees the context and either takes
//! that context's best action or skips.

use std::sync::Arc;

use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::instance::{Action, ProblemInstance};
use crate::policy::{Decision, Policy, RoundView};
use crate::rng::PolicyRng;

/// Largest `T * B` the tabulation accepts.
pub const DP_SIZE_LIMIT: u64 = 1_000_000;

/// Fails with [`Error::TooLarge`] when the table for `(T, B)` would exceed the limit.
pub fn check_dp_size(horizon: u64, budget: u64) -> Result<()> {
    if horizon.saturating_mul(budget.min(horizon)) > DP_SIZE_LIMIT {
        return Err(Error::TooLarge(format!(
            "dynamic program with T = {horizon} and B = {budget} exceeds T * B <= {DP_SIZE_LIMIT}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueTable<V> {
    horizon: u64,
    /// Budget columns actually stored; extra budget beyond `T` is never usable.
    width: u64,
    values: Vec<V>,
    probs: Vec<V>,
    best: Vec<V>,
    best_actions: Vec<usize>,
}

impl<V: Num + Clone + PartialOrd> ValueTable<V> {
    /// Tabulates the recursion for context probabilities `probs` and best
    /// rewards `best`.
    pub fn solve(probs: Vec<V>, best: Vec<V>, best_actions: Vec<usize>, horizon: u64, budget: u64) -> Result<Self> {
        check_dp_size(horizon, budget)?;
        let width = budget.min(horizon);
        let cols = (width + 1) as usize;
        let mut values = vec![V::zero(); (horizon as usize + 1) * cols];
        for tau in 1..=horizon as usize {
            for b in 0..cols {
                let skip = values[(tau - 1) * cols + b].clone();
                let mut acc = V::zero();
                for (p, u) in probs.iter().zip(&best) {
                    let branch = if b == 0 {
                        skip.clone()
                    } else {
                        let take = u.clone() + values[(tau - 1) * cols + b - 1].clone();
                        if take >= skip {
                            take
                        } else {
                            skip.clone()
                        }
                    };
                    acc = acc + p.clone() * branch;
                }
                values[tau * cols + b] = acc;
            }
        }
        Ok(Self {
            horizon,
            width,
            values,
            probs,
            best,
            best_actions,
        })
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    /// `V[tau][b]`; budgets above the table width behave like the width.
    pub fn value(&self, tau: u64, b: u64) -> V {
        let cols = self.width + 1;
        self.values[(tau * cols + b.min(self.width)) as usize].clone()
    }

    /// Take (true) or skip in state `(tau, b)` under context `j`; ties take.
    pub fn act(&self, tau: u64, b: u64, j: usize) -> bool {
        if b == 0 || tau == 0 {
            return false;
        }
        let take = self.best[j].clone() + self.value(tau - 1, b - 1);
        take >= self.value(tau - 1, b)
    }

    pub fn best_action(&self, j: usize) -> usize {
        self.best_actions[j]
    }

    pub fn num_contexts(&self) -> usize {
        self.probs.len()
    }
}

/// Value table of a unit-cost instance in floating point.
pub fn dp_solve(instance: &ProblemInstance, horizon: u64, budget: u64) -> Result<ValueTable<f64>> {
    if !instance.is_unit_cost() {
        return Err(invalid("the dynamic-programming oracle needs unit costs"));
    }
    let nj = instance.num_contexts();
    ValueTable::solve(
        instance.contexts().probs(),
        instance.best_rewards(),
        (0..nj).map(|j| instance.best_action(j)).collect(),
        horizon,
        budget,
    )
}

/// Follows the value table's take/skip rule.
pub struct DpPolicy {
    table: Arc<ValueTable<f64>>,
}

impl DpPolicy {
    pub fn new(table: Arc<ValueTable<f64>>) -> Self {
        Self { table }
    }
}

impl Policy for DpPolicy {
    fn name(&self) -> &str {
        "dp-oracle"
    }

    fn decide(&mut self, view: &RoundView<'_>, _rng: &mut PolicyRng) -> Result<Decision> {
        if view.remaining_time > self.table.horizon() {
            return Err(Error::Config("episode is longer than the tabulated horizon".into()));
        }
        let take = self.table.act(view.remaining_time, view.remaining_budget, view.context);
        Ok(Decision {
            action: if take { Action::Arm(self.table.best_action(view.context)) } else { Action::Skip },
            take_prob: Some(if take { 1.0 } else { 0.0 }),
            threshold: None,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{ContextDist, RewardFamily};

    fn inst(probs: &[f64], best: &[f64]) -> ProblemInstance {
        ProblemInstance::unit_cost(
            ContextDist::from_probs(probs).unwrap(),
            best.iter().map(|&u| vec![u]).collect(),
            RewardFamily::Deterministic,
        )
        .unwrap()
    }

    #[test]
    fn hand_example() {
        let t = dp_solve(&inst(&[0.5, 0.5], &[1.0, 0.0]), 2, 1).unwrap();
        assert_eq!(t.value(2, 1), 0.75);
        assert_eq!(t.value(1, 1), 0.5);
    }

    #[test]
    fn budget_covering_horizon_takes_everything() {
        let i = inst(&[0.4, 0.6], &[0.8, 0.4]);
        let t = dp_solve(&i, 7, 9).unwrap();
        assert!((t.value(7, 9) - 7.0 * 0.56).abs() < 1e-12);
        for tau in 1..=7 {
            for j in 0..2 {
                assert!(t.act(tau, tau, j));
            }
        }
        assert_eq!(dp_solve(&i, 7, 0).unwrap().value(7, 0), 0.0);
        assert!(!t.act(3, 0, 0));
    }

    #[test]
    fn two_context_matches_procrastination() {
        let t = dp_solve(&inst(&[0.4, 0.6], &[0.8, 0.4]), 12, 6).unwrap();
        for tau in 1..=12 {
            for b in 1..=6 {
                assert!(t.act(tau, b, 0));
                assert_eq!(t.act(tau, b, 1), b >= tau, "tau {tau} b {b}");
            }
        }
    }

    #[test]
    fn table_is_monotone_and_concave_in_budget() {
        let t = dp_solve(&inst(&[0.2, 0.3, 0.5], &[0.9, 0.5, 0.2]), 30, 20).unwrap();
        for tau in 0..=30 {
            for b in 0..20 {
                assert!(t.value(tau, b + 1) >= t.value(tau, b) - 1e-12);
                if tau > 0 {
                    assert!(t.value(tau, b) >= t.value(tau - 1, b) - 1e-12);
                }
                if b >= 1 {
                    let second = t.value(tau, b + 1) - 2.0 * t.value(tau, b) + t.value(tau, b - 1);
                    assert!(second <= 1e-12);
                }
            }
        }
    }

    #[test]
    fn size_guard() {
        let i = inst(&[1.0], &[0.5]);
        assert!(matches!(dp_solve(&i, 2000, 1000), Err(Error::TooLarge(_))));
        assert!(dp_solve(&i, 1000, 1000).is_ok());
    }
}

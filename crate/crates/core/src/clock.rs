//! Budget and time bookkeeping for a single episode.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{Action, ProblemInstance};

/// Remaining time `tau` and remaining budget `b`, updated after each round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetClock {
    horizon: u64,
    budget: u64,
    remaining_time: u64,
    remaining_budget: u64,
}

impl BudgetClock {
    pub fn new(horizon: u64, budget: u64) -> Self {
        Self {
            horizon,
            budget,
            remaining_time: horizon,
            remaining_budget: budget,
        }
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn remaining_time(&self) -> u64 {
        self.remaining_time
    }

    pub fn remaining_budget(&self) -> u64 {
        self.remaining_budget
    }

    /// One-based index of the current round.
    pub fn round(&self) -> u64 {
        self.horizon - self.remaining_time + 1
    }

    pub fn is_finished(&self) -> bool {
        self.remaining_time == 0
    }

    /// Consumes one round. Taking an action whose cost exceeds the remaining
    /// budget is a contract violation and leaves the clock untouched.
    pub fn apply(&mut self, cost: u64) -> Result<()> {
        if self.remaining_time == 0 {
            return Err(Error::ContractViolation("episode already finished".into()));
        }
        if cost > self.remaining_budget {
            return Err(Error::ContractViolation(format!(
                "action cost {cost} exceeds remaining budget {} at round {}",
                self.remaining_budget,
                self.round()
            )));
        }
        self.remaining_budget -= cost;
        self.remaining_time -= 1;
        Ok(())
    }

    /// Applies `action` under context `j` of `instance`.
    pub fn apply_action(&mut self, instance: &ProblemInstance, j: usize, action: Action) -> Result<u64> {
        let cost = match action {
            Action::Skip => 0,
            Action::Arm(k) => {
                instance.check_pair(j, k)?;
                instance.cost(j, k)
            }
        };
        self.apply(cost)?;
        Ok(cost)
    }
}

/// What happened in one round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub t: u64,
    pub context: usize,
    pub action: Action,
    pub reward: f64,
    pub expected_reward: f64,
    pub cost: u64,
    /// Budget left after this round.
    pub remaining_budget: u64,
}

/// Full record of one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub horizon: u64,
    pub budget: u64,
    pub rounds: Vec<RoundRecord>,
}

impl EpisodeTrace {
    pub fn total_reward(&self) -> f64 {
        self.rounds.iter().map(|r| r.reward).sum()
    }

    pub fn total_expected_reward(&self) -> f64 {
        self.rounds.iter().map(|r| r.expected_reward).sum()
    }

    pub fn total_cost(&self) -> u64 {
        self.rounds.iter().map(|r| r.cost).sum()
    }

    /// Remaining budget `b_tau` at the start of the round with `tau` rounds left.
    pub fn remaining_budget_at(&self, tau: u64) -> Option<u64> {
        if tau == 0 || tau > self.horizon {
            return None;
        }
        let idx = (self.horizon - tau) as usize;
        Some(if idx == 0 { self.budget } else { self.rounds.get(idx - 1)?.remaining_budget })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clock_counts_down() {
        let mut c = BudgetClock::new(3, 2);
        assert_eq!(c.round(), 1);
        c.apply(1).unwrap();
        c.apply(0).unwrap();
        assert_eq!((c.remaining_time(), c.remaining_budget(), c.round()), (1, 1, 3));
        assert!(c.apply(2).is_err());
        assert_eq!(c.remaining_time(), 1);
        c.apply(1).unwrap();
        assert!(c.is_finished());
        assert!(c.apply(0).is_err());
    }

    #[test]
    fn zero_budget_only_allows_skip() {
        let mut c = BudgetClock::new(2, 0);
        assert!(matches!(c.apply(1), Err(Error::ContractViolation(_))));
        c.apply(0).unwrap();
    }

    #[test]
    fn zero_horizon_is_already_finished() {
        let mut c = BudgetClock::new(0, 5);
        assert!(c.is_finished());
        assert!(c.apply(0).is_err());
    }
}

//! Context ranking by best expected reward, cumulative masses `q_j`, reward
//! gaps and the boundary margins of a budget ratio.

use serde::{Deserialize, Serialize};

use crate::instance::{argmax_first, ProblemInstance};
use crate::lp::{unit_threshold, BudgetRatio, Ratio};

/// Orders contexts by `values` descending; ties go to the lower index.
pub fn rank_by_desc(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b)));
    order
}

/// How a budget ratio sits relative to the cumulative masses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Placement {
    /// Strictly between two cumulative masses, with margin `delta`.
    Interior { delta: f64 },
    /// Exactly on `q_j` for some `1 <= j < J`, with wider margin `delta_prime`.
    Boundary { delta_prime: f64 },
    /// At or above full coverage (`rho >= 1`): every context can always be served.
    Saturated,
    /// No budget at all.
    Empty,
}

/// Margins of `rho` against the cumulative masses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Margins {
    /// Threshold rank `j~(rho)`.
    pub threshold: usize,
    pub placement: Placement,
}

impl Margins {
    pub fn is_boundary(&self) -> bool {
        matches!(self.placement, Placement::Boundary { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapTable {
    ranking: Vec<usize>,
    rank_of: Vec<usize>,
    best_action: Vec<usize>,
    best_reward: Vec<f64>,
    rewards: Vec<Vec<f64>>,
    ranked_weights: Vec<u64>,
    /// `W_0 = 0, W_1, ..., W_J` over the ranking.
    cumulative: Vec<u128>,
    total: u64,
}

impl GapTable {
    pub fn build(instance: &ProblemInstance) -> Self {
        let rewards: Vec<Vec<f64>> = (0..instance.num_contexts()).map(|j| instance.reward_row(j).to_vec()).collect();
        Self::from_parts(instance.contexts().weights(), instance.contexts().total(), rewards)
    }

    /// Builds a table from integer context weights and a reward matrix.
    pub fn from_parts(weights: &[u64], total: u64, rewards: Vec<Vec<f64>>) -> Self {
        let best_action: Vec<usize> = rewards.iter().map(|row| argmax_first(row)).collect();
        let best_reward: Vec<f64> = rewards.iter().zip(&best_action).map(|(row, &k)| row[k]).collect();
        let ranking = rank_by_desc(&best_reward);
        let mut rank_of = vec![0; ranking.len()];
        for (r, &j) in ranking.iter().enumerate() {
            rank_of[j] = r;
        }
        let ranked_weights: Vec<u64> = ranking.iter().map(|&j| weights[j]).collect();
        let mut cumulative = Vec::with_capacity(ranking.len() + 1);
        cumulative.push(0u128);
        for &w in &ranked_weights {
            cumulative.push(cumulative.last().unwrap() + w as u128);
        }
        Self {
            ranking,
            rank_of,
            best_action,
            best_reward,
            rewards,
            ranked_weights,
            cumulative,
            total,
        }
    }

    pub fn num_contexts(&self) -> usize {
        self.ranking.len()
    }

    /// `ranking()[r]` is the context at rank `r` (zero-based, best first).
    pub fn ranking(&self) -> &[usize] {
        &self.ranking
    }

    pub fn rank_of(&self, j: usize) -> usize {
        self.rank_of[j]
    }

    pub fn best_action(&self, j: usize) -> usize {
        self.best_action[j]
    }

    pub fn best_reward(&self, j: usize) -> f64 {
        self.best_reward[j]
    }

    pub fn ranked_weights(&self) -> &[u64] {
        &self.ranked_weights
    }

    pub fn total_weight(&self) -> u64 {
        self.total
    }

    pub fn ranked_probs(&self) -> Vec<f64> {
        self.ranked_weights.iter().map(|&w| w as f64 / self.total as f64).collect()
    }

    pub fn ranked_best_rewards(&self) -> Vec<f64> {
        self.ranking.iter().map(|&j| self.best_reward[j]).collect()
    }

    /// Exact cumulative mass `q_r` for `r` in `0..=J`.
    pub fn q_exact(&self, r: usize) -> Ratio {
        Ratio::new(self.cumulative[r], self.total as u128).expect("positive total")
    }

    pub fn q(&self, r: usize) -> f64 {
        self.cumulative[r] as f64 / self.total as f64
    }

    /// `q_1, ..., q_J`.
    pub fn q_vector(&self) -> Vec<f64> {
        (1..=self.num_contexts()).map(|r| self.q(r)).collect()
    }

    /// `Delta_{j,k}^{(j')} = u_{j'}^* - u_{j,k}`.
    pub fn action_gap(&self, j: usize, k: usize, j_ref: usize) -> f64 {
        self.best_reward[j_ref] - self.rewards[j][k]
    }

    /// Threshold rank and margins of `rho`.
    pub fn margins(&self, rho: BudgetRatio) -> Margins {
        let threshold = unit_threshold(&self.cumulative, self.total, rho);
        let big_j = self.num_contexts();
        // (rho - q_r) or (q_r - rho) as f64 from the exact difference.
        let diff = |r: usize| -> f64 {
            let lhs = rho.num * self.total as u128;
            let rhs = self.cumulative[r] * rho.den;
            let den = (self.total as u128 * rho.den) as f64;
            if lhs >= rhs {
                (lhs - rhs) as f64 / den
            } else {
                -((rhs - lhs) as f64 / den)
            }
        };
        let placement = if rho.is_zero() {
            Placement::Empty
        } else if threshold == big_j {
            Placement::Saturated
        } else if threshold >= 1 && Ratio::new(self.cumulative[threshold], self.total as u128).unwrap() == rho {
            Placement::Boundary {
                delta_prime: diff(threshold - 1).min(-diff(threshold + 1)),
            }
        } else {
            Placement::Interior {
                delta: diff(threshold).min(-diff(threshold + 1)),
            }
        };
        Margins { threshold, placement }
    }
}

//! Per-pair reward indices: upper confidence bounds, plain empirical means,
//! or the true expected rewards.

use serde::{Deserialize, Serialize};

/// `u_bar + sqrt(ln t / (2 C))`, or one for an unplayed pair.
pub fn ucb_value(mean: f64, count: u64, t: u64) -> f64 {
    ucb_value_ln(mean, count, (t.max(1) as f64).ln())
}

/// [`ucb_value`] with `ln t` supplied directly.
pub fn ucb_value_ln(mean: f64, count: u64, ln_t: f64) -> f64 {
    if count == 0 {
        return 1.0;
    }
    mean + (ln_t / (2.0 * count as f64)).sqrt()
}

/// Something that scores every `(context, action)` pair at round `t`.
pub trait IndexSource: Send {
    fn index(&self, j: usize, k: usize, t: u64) -> f64;

    /// Records a realized reward for a taken action.
    fn observe(&mut self, _j: usize, _k: usize, _reward: f64) {}

    /// Stops further updates.
    fn freeze(&mut self) {}
}

/// Which statistic an estimator exposes as its index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum IndexMode {
    Ucb,
    Mean,
}

/// Running sums and counts for every pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UcbEstimator {
    num_actions: usize,
    sums: Vec<f64>,
    counts: Vec<u64>,
    mode: IndexMode,
    frozen: bool,
}

impl UcbEstimator {
    pub fn new(num_contexts: usize, num_actions: usize, mode: IndexMode) -> Self {
        Self {
            num_actions,
            sums: vec![0.0; num_contexts * num_actions],
            counts: vec![0; num_contexts * num_actions],
            mode,
            frozen: false,
        }
    }

    /// Estimator that already holds one observation equal to each given mean.
    pub fn from_means(num_actions: usize, means: &[f64], mode: IndexMode) -> Self {
        Self {
            num_actions,
            sums: means.to_vec(),
            counts: vec![1; means.len()],
            mode,
            frozen: false,
        }
    }

    pub fn update(&mut self, j: usize, k: usize, reward: f64) {
        let i = j * self.num_actions + k;
        self.sums[i] += reward;
        self.counts[i] += 1;
    }

    pub fn count(&self, j: usize, k: usize) -> u64 {
        self.counts[j * self.num_actions + k]
    }

    pub fn counts_row(&self, j: usize) -> &[u64] {
        &self.counts[j * self.num_actions..(j + 1) * self.num_actions]
    }

    /// Empirical mean; zero for an unplayed pair.
    pub fn mean(&self, j: usize, k: usize) -> f64 {
        let i = j * self.num_actions + k;
        if self.counts[i] == 0 {
            0.0
        } else {
            self.sums[i] / self.counts[i] as f64
        }
    }

    pub fn ucb(&self, j: usize, k: usize, t: u64) -> f64 {
        ucb_value(self.mean(j, k), self.count(j, k), t)
    }
}

impl IndexSource for UcbEstimator {
    fn index(&self, j: usize, k: usize, t: u64) -> f64 {
        match self.mode {
            IndexMode::Ucb => self.ucb(j, k, t),
            IndexMode::Mean => self.mean(j, k),
        }
    }

    fn observe(&mut self, j: usize, k: usize, reward: f64) {
        if !self.frozen {
            self.update(j, k, reward);
        }
    }

    fn freeze(&mut self) {
        self.frozen = true;
    }
}

/// The true expected rewards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleIndex {
    num_actions: usize,
    rewards: Vec<f64>,
}

impl OracleIndex {
    pub fn new(num_actions: usize, rewards: Vec<f64>) -> Self {
        Self { num_actions, rewards }
    }
}

impl IndexSource for OracleIndex {
    fn index(&self, j: usize, k: usize, _t: u64) -> f64 {
        self.rewards[j * self.num_actions + k]
    }
}

//! Problem instances: context distribution, expected rewards, fixed costs.
//!
//! Context probabilities are stored as integer weights over a common
//! denominator so that every budget threshold comparison downstream is exact.
//! Costs are positive integers in a common cost unit; rational costs are
//! scaled to integers by the caller (see [`scale_rational_costs`]).

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Probability distribution over contexts, `pi_j = weights[j] / total`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContextDist {
    weights: Vec<u64>,
    total: u64,
}

impl ContextDist {
    pub fn from_weights(weights: Vec<u64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(invalid("context distribution needs at least one context"));
        }
        let total = weights
            .iter()
            .try_fold(0u64, |acc, &w| acc.checked_add(w))
            .ok_or_else(|| invalid("context weights overflow u64"))?;
        if total == 0 {
            return Err(invalid("context weights sum to zero"));
        }
        Ok(Self { weights, total })
    }

    /// Builds an exact distribution from floating-point probabilities.
    ///
    /// Probabilities written with at most 12 decimal digits are converted
    /// exactly (so `0.4 + 0.6` is exactly one). Anything else is rounded to a
    /// 2^-40 grid with the rounding residue absorbed by the largest entry.
    pub fn from_probs(probs: &[f64]) -> Result<Self> {
        if probs.is_empty() {
            return Err(invalid("context distribution needs at least one context"));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0 || *p > 1.0) {
            return Err(invalid("context probabilities must lie in [0, 1]"));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("context probabilities sum to {sum}, not 1")));
        }
        for digits in 0..=12u32 {
            let scale = 10u64.pow(digits);
            let weights: Vec<u64> = probs.iter().map(|p| (p * scale as f64).round() as u64).collect();
            let exact = probs
                .iter()
                .zip(&weights)
                .all(|(p, w)| (p - *w as f64 / scale as f64).abs() <= 1e-15);
            if exact && weights.iter().sum::<u64>() == scale {
                return Self::from_weights(weights);
            }
        }
        let scale = 1u64 << 40;
        let mut weights: Vec<u64> = probs.iter().map(|p| (p * scale as f64).round() as u64).collect();
        let total: u64 = weights.iter().sum();
        let (argmax, _) = weights
            .iter()
            .enumerate()
            .max_by_key(|(i, w)| (**w, std::cmp::Reverse(*i)))
            .expect("non-empty");
        if total > scale {
            weights[argmax] -= total - scale;
        } else {
            weights[argmax] += scale - total;
        }
        Self::from_weights(weights)
    }

    pub fn uniform(num_contexts: usize) -> Result<Self> {
        Self::from_weights(vec![1; num_contexts])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[u64] {
        &self.weights
    }

    pub fn weight(&self, j: usize) -> u64 {
        self.weights[j]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn prob(&self, j: usize) -> f64 {
        self.weights[j] as f64 / self.total as f64
    }

    pub fn probs(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.prob(j)).collect()
    }

    /// Smallest context probability.
    pub fn min_prob(&self) -> f64 {
        (0..self.len()).map(|j| self.prob(j)).fold(f64::INFINITY, f64::min)
    }

    /// Draws a context index; consumes exactly one integer draw from `rng`.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        let mut x = rng.random_range(0..self.total);
        for (j, &w) in self.weights.iter().enumerate() {
            if x < w {
                return j;
            }
            x -= w;
        }
        unreachable!("draw below total weight always lands in a bucket")
    }
}

/// How realized rewards are generated around the expected reward.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RewardFamily {
    /// `Y ~ Bernoulli(u)`.
    #[default]
    Bernoulli,
    /// `Y = u` with certainty.
    Deterministic,
}

/// The agent's choice in one round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    /// The dummy action: no reward, no cost.
    Skip,
    /// A real arm, zero-based.
    Arm(usize),
}

impl Action {
    pub fn arm(self) -> Option<usize> {
        match self {
            Action::Skip => None,
            Action::Arm(k) => Some(k),
        }
    }

    /// One-based label with 0 for the dummy action.
    pub fn label(self) -> usize {
        match self {
            Action::Skip => 0,
            Action::Arm(k) => k + 1,
        }
    }
}

/// A constrained contextual bandit instance with fixed, known costs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    contexts: ContextDist,
    num_actions: usize,
    /// Row-major `J x K` expected rewards.
    rewards: Vec<f64>,
    /// Row-major `J x K` integer costs.
    costs: Vec<u64>,
    family: RewardFamily,
}

impl ProblemInstance {
    pub fn new(contexts: ContextDist, rewards: Vec<Vec<f64>>, costs: Vec<Vec<u64>>, family: RewardFamily) -> Result<Self> {
        let num_contexts = contexts.len();
        if rewards.len() != num_contexts || costs.len() != num_contexts {
            return Err(invalid(format!(
                "expected {num_contexts} reward and cost rows, got {} and {}",
                rewards.len(),
                costs.len()
            )));
        }
        let num_actions = rewards[0].len();
        if num_actions == 0 {
            return Err(invalid("instance needs at least one action"));
        }
        for (j, (ur, cr)) in rewards.iter().zip(&costs).enumerate() {
            if ur.len() != num_actions || cr.len() != num_actions {
                return Err(invalid(format!("row {} must have {num_actions} entries", j + 1)));
            }
            if let Some(u) = ur.iter().find(|u| !(0.0..=1.0).contains(*u)) {
                return Err(invalid(format!("expected reward {u} in context {} outside [0, 1]", j + 1)));
            }
            if cr.contains(&0) {
                return Err(invalid(format!("context {} has a non-positive cost", j + 1)));
            }
        }
        Ok(Self {
            contexts,
            num_actions,
            rewards: rewards.into_iter().flatten().collect(),
            costs: costs.into_iter().flatten().collect(),
            family,
        })
    }

    /// Instance with every cost equal to one.
    pub fn unit_cost(contexts: ContextDist, rewards: Vec<Vec<f64>>, family: RewardFamily) -> Result<Self> {
        let costs = rewards.iter().map(|r| vec![1; r.len()]).collect();
        Self::new(contexts, rewards, costs, family)
    }

    pub fn contexts(&self) -> &ContextDist {
        &self.contexts
    }

    pub fn num_contexts(&self) -> usize {
        self.contexts.len()
    }

    pub fn num_actions(&self) -> usize {
        self.num_actions
    }

    pub fn family(&self) -> RewardFamily {
        self.family
    }

    pub fn reward(&self, j: usize, k: usize) -> f64 {
        self.rewards[j * self.num_actions + k]
    }

    pub fn cost(&self, j: usize, k: usize) -> u64 {
        self.costs[j * self.num_actions + k]
    }

    pub fn reward_row(&self, j: usize) -> &[f64] {
        &self.rewards[j * self.num_actions..(j + 1) * self.num_actions]
    }

    pub fn cost_row(&self, j: usize) -> &[u64] {
        &self.costs[j * self.num_actions..(j + 1) * self.num_actions]
    }

    pub fn rewards(&self) -> &[f64] {
        &self.rewards
    }

    pub fn costs(&self) -> &[u64] {
        &self.costs
    }

    pub fn is_unit_cost(&self) -> bool {
        self.costs.iter().all(|&c| c == 1)
    }

    /// True when all actions of a context share one cost.
    pub fn has_uniform_cost_per_context(&self) -> bool {
        (0..self.num_contexts()).all(|j| {
            let row = self.cost_row(j);
            row.iter().all(|&c| c == row[0])
        })
    }

    pub fn max_cost(&self) -> u64 {
        self.costs.iter().copied().max().unwrap_or(1)
    }

    /// Best action under context `j`; ties go to the lowest index.
    pub fn best_action(&self, j: usize) -> usize {
        argmax_first(self.reward_row(j))
    }

    pub fn best_reward(&self, j: usize) -> f64 {
        self.reward(j, self.best_action(j))
    }

    pub fn best_rewards(&self) -> Vec<f64> {
        (0..self.num_contexts()).map(|j| self.best_reward(j)).collect()
    }

    /// Expected reward without any budget constraint, `sum_j pi_j u_j^*`.
    pub fn unconstrained_reward(&self) -> f64 {
        (0..self.num_contexts()).map(|j| self.contexts.prob(j) * self.best_reward(j)).sum()
    }

    pub fn check_pair(&self, j: usize, k: usize) -> Result<()> {
        if j >= self.num_contexts() {
            return Err(invalid(format!("context index {j} out of range (J = {})", self.num_contexts())));
        }
        if k >= self.num_actions {
            return Err(invalid(format!("action index {k} out of range (K = {})", self.num_actions)));
        }
        Ok(())
    }

    pub fn sample_context<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.contexts.sample(rng)
    }

    /// Maps one uniform draw in `[0, 1)` to a realized reward.
    pub fn reward_from_uniform(&self, j: usize, k: usize, uniform: f64) -> f64 {
        let mean = self.reward(j, k);
        match self.family {
            RewardFamily::Deterministic => mean,
            RewardFamily::Bernoulli => {
                if uniform < mean {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Samples a reward for `(j, k)`; always consumes one `f64` draw.
    pub fn sample_reward<R: Rng + ?Sized>(&self, j: usize, k: usize, rng: &mut R) -> Result<f64> {
        self.check_pair(j, k)?;
        let uniform: f64 = rng.random();
        Ok(self.reward_from_uniform(j, k, uniform))
    }
}

/// Index of the maximum, lowest index on ties.
pub(crate) fn argmax_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

/// Scales a matrix of positive rational costs `(num, den)` to integers over
/// their least common denominator. Returns the integer costs and the scale.
pub fn scale_rational_costs(costs: &[Vec<(u64, u64)>]) -> Result<(Vec<Vec<u64>>, u64)> {
    fn gcd(a: u64, b: u64) -> u64 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let mut lcm = 1u64;
    for &(num, den) in costs.iter().flatten() {
        if num == 0 || den == 0 {
            return Err(invalid("costs must be strictly positive rationals"));
        }
        let den = den / gcd(num, den);
        lcm = lcm
            .checked_mul(den / gcd(lcm, den))
            .ok_or_else(|| invalid("cost denominators overflow"))?;
    }
    let scaled = costs
        .iter()
        .map(|row| {
            row.iter()
                .map(|&(num, den)| {
                    num.checked_mul(lcm / den * gcd(num, den))
                        .map(|x| x / gcd(num, den))
                        .ok_or_else(|| invalid("scaled cost overflows"))
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((scaled, lcm))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn two_context() -> ProblemInstance {
        let u1 = [1.0 / 3.0, 2.0 / 3.0, 1.0].map(|x| 0.8 * x).to_vec();
        let u2 = [1.0 / 3.0, 2.0 / 3.0, 1.0].map(|x| 0.4 * x).to_vec();
        ProblemInstance::unit_cost(ContextDist::from_probs(&[0.4, 0.6]).unwrap(), vec![u1, u2], RewardFamily::Bernoulli).unwrap()
    }

    #[test]
    fn decimal_probabilities_are_exact() {
        let d = ContextDist::from_probs(&[0.025, 0.05, 0.075, 0.15, 0.2, 0.2, 0.15, 0.075, 0.05, 0.025]).unwrap();
        assert_eq!(d.total(), 1000);
        assert_eq!(d.weights()[..5].iter().sum::<u64>(), 500);
        let d = ContextDist::from_probs(&[0.4, 0.6]).unwrap();
        assert_eq!((d.weights(), d.total()), (&[4u64, 6][..], 10));
    }

    #[test]
    fn non_decimal_probabilities_still_sum_exactly() {
        let d = ContextDist::from_probs(&[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]).unwrap();
        assert_eq!(d.weights().iter().sum::<u64>(), d.total());
        assert!((d.prob(0) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_distributions() {
        assert!(ContextDist::from_probs(&[0.5, 0.6]).is_err());
        assert!(ContextDist::from_probs(&[-0.1, 1.1]).is_err());
        assert!(ContextDist::from_weights(vec![0, 0]).is_err());
    }

    #[test]
    fn degenerate_distribution_always_picks_first() {
        let d = ContextDist::from_probs(&[1.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!((0..1000).all(|_| d.sample(&mut rng) == 0));
    }

    #[test]
    fn context_frequency_within_binomial_band() {
        // 3 sigma of a Binomial(1e6, 0.4) frequency is 3 * sqrt(0.24 / 1e6) = 0.00147.
        let d = ContextDist::from_probs(&[0.4, 0.6]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1_000_000;
        let hits = (0..n).filter(|_| d.sample(&mut rng) == 0).count();
        assert!((hits as f64 / n as f64 - 0.4).abs() <= 0.002);
    }

    #[test]
    fn reward_sampling() {
        let inst = two_context();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 1_000_000;
        // u_{2,3} = 0.4; 3 sigma = 3 * sqrt(0.24 / 1e6) = 0.00147.
        let mean = (0..n).map(|_| inst.sample_reward(1, 2, &mut rng).unwrap()).sum::<f64>() / n as f64;
        assert!((mean - 0.4).abs() <= 0.0015);
        assert!(inst.sample_reward(2, 0, &mut rng).is_err());
        assert!(inst.sample_reward(0, 3, &mut rng).is_err());

        let zero = ProblemInstance::unit_cost(ContextDist::uniform(1).unwrap(), vec![vec![0.0]], RewardFamily::Bernoulli).unwrap();
        assert!((0..1000).all(|_| zero.sample_reward(0, 0, &mut rng).unwrap() == 0.0));

        let det = ProblemInstance::unit_cost(ContextDist::uniform(1).unwrap(), vec![vec![0.8]], RewardFamily::Deterministic).unwrap();
        assert!((0..100).all(|_| det.sample_reward(0, 0, &mut rng).unwrap() == 0.8));
    }

    #[test]
    fn validation() {
        let d = ContextDist::uniform(2).unwrap();
        assert!(ProblemInstance::unit_cost(d.clone(), vec![vec![0.5]], RewardFamily::Bernoulli).is_err());
        assert!(ProblemInstance::unit_cost(d.clone(), vec![vec![0.5], vec![1.5]], RewardFamily::Bernoulli).is_err());
        assert!(ProblemInstance::new(d, vec![vec![0.5], vec![0.5]], vec![vec![1], vec![0]], RewardFamily::Bernoulli).is_err());
    }

    #[test]
    fn rational_costs_scale_to_integers() {
        let (scaled, scale) = scale_rational_costs(&[vec![(1, 2), (3, 4)], vec![(2, 1), (5, 6)]]).unwrap();
        assert_eq!(scale, 12);
        assert_eq!(scaled, vec![vec![6, 9], vec![24, 10]]);
    }
}

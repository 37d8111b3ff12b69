//! Unit-cost LP: serve the best contexts fully, one context fractionally.

use num_traits::{FromPrimitive, Num};
use serde::{Deserialize, Serialize};

use super::{budget_ratio, BudgetRatio, Ratio};
use crate::error::{invalid, Result};
use crate::gaps::GapTable;
use crate::instance::ProblemInstance;

/// `max { r : W_r <= rho * W }` over cumulative weights `W_0 = 0, ..., W_J`.
/// Ratios above one saturate at `J`.
pub fn unit_threshold(cumulative: &[u128], total: u64, rho: BudgetRatio) -> usize {
    let limit = rho.num * total as u128;
    cumulative
        .iter()
        .rposition(|&w| w * rho.den <= limit)
        .expect("W_0 = 0 never exceeds the budget")
}

/// Floating-point threshold over `q_1, ..., q_J` with tolerance `1e-12`.
pub fn unit_threshold_f64(q: &[f64], rho: f64) -> usize {
    q.iter().take_while(|&&qj| qj <= rho + 1e-12).count()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitLpSolution {
    /// Number of ranks served with probability one.
    pub threshold: usize,
    /// Exact probability of the rank just past the threshold, if any.
    pub partial: Option<Ratio>,
    /// Serving probability per rank.
    pub probs: Vec<f64>,
}

impl UnitLpSolution {
    pub fn prob_at_rank(&self, r: usize) -> f64 {
        self.probs[r]
    }

    /// Exact serving probability at rank `r`.
    pub fn exact_prob_at_rank(&self, r: usize) -> Ratio {
        match r.cmp(&self.threshold) {
            std::cmp::Ordering::Less => Ratio::one(),
            std::cmp::Ordering::Equal => self.partial.unwrap_or_else(Ratio::zero),
            std::cmp::Ordering::Greater => Ratio::zero(),
        }
    }
}

/// Solves the unit-cost LP for context weights listed in rank order.
/// Ratios above one are treated as one.
pub fn unit_lp_solve(ranked_weights: &[u64], total: u64, rho: BudgetRatio) -> UnitLpSolution {
    let mut cumulative = Vec::with_capacity(ranked_weights.len() + 1);
    cumulative.push(0u128);
    for &w in ranked_weights {
        cumulative.push(cumulative.last().unwrap() + w as u128);
    }
    let threshold = unit_threshold(&cumulative, total, rho);
    let mut probs = vec![0.0; ranked_weights.len()];
    probs[..threshold].fill(1.0);
    let partial = (threshold < ranked_weights.len()).then(|| {
        // (rho - q_r) / pi_{r+1} = (num * W - W_r * den) / (w_{r+1} * den)
        let num = rho.num * total as u128 - cumulative[threshold] * rho.den;
        let den = ranked_weights[threshold] as u128 * rho.den;
        Ratio::new(num, den).expect("next rank has positive weight")
    });
    if let Some(p) = partial {
        probs[threshold] = p.to_f64();
    }
    UnitLpSolution {
        threshold,
        partial,
        probs,
    }
}

/// `v(rho) = sum_{r < threshold} pi_r u_r + p pi_threshold u_threshold`, all in
/// rank order. Generic so that tests can evaluate it in exact arithmetic.
pub fn single_round_value<V>(ranked_pi: &[V], ranked_u: &[V], solution: &UnitLpSolution) -> V
where
    V: Num + Clone + FromPrimitive,
{
    let mut value = V::zero();
    for r in 0..solution.threshold {
        value = value + ranked_pi[r].clone() * ranked_u[r].clone();
    }
    if let Some(p) = solution.partial {
        let r = solution.threshold;
        let p = V::from_u128(p.num).expect("representable numerator") / V::from_u128(p.den).expect("representable denominator");
        value = value + p * ranked_pi[r].clone() * ranked_u[r].clone();
    }
    value
}

/// `T * v(B / T)` for a unit-cost instance.
pub fn upper_bound(instance: &ProblemInstance, horizon: u64, budget: u64) -> Result<f64> {
    if !instance.is_unit_cost() {
        return Err(invalid("upper_bound needs unit costs; use the heterogeneous LP value"));
    }
    if horizon == 0 {
        return Ok(0.0);
    }
    let gaps = GapTable::build(instance);
    let sol = unit_lp_solve(gaps.ranked_weights(), gaps.total_weight(), budget_ratio(budget, horizon)?);
    Ok(horizon as f64 * single_round_value(&gaps.ranked_probs(), &gaps.ranked_best_rewards(), &sol))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{ContextDist, RewardFamily};

    fn r(num: u128, den: u128) -> Ratio {
        Ratio::new(num, den).unwrap()
    }

    #[test]
    fn threshold_examples() {
        let cum = [0u128, 4, 10];
        assert_eq!(unit_threshold(&cum, 10, r(39, 100)), 0);
        assert_eq!(unit_threshold(&cum, 10, r(41, 100)), 1);
        assert_eq!(unit_threshold(&cum, 10, r(1, 1)), 2);
        assert_eq!(unit_threshold(&cum, 10, r(2, 5)), 1);
        assert_eq!(unit_threshold(&cum, 10, r(7, 2)), 2);
        assert_eq!(unit_threshold_f64(&[0.4, 1.0], 0.39), 0);
        assert_eq!(unit_threshold_f64(&[0.4, 1.0], 0.41), 1);
        assert_eq!(unit_threshold_f64(&[0.4, 1.0], 1.0), 2);
    }

    #[test]
    fn solve_examples() {
        let s = unit_lp_solve(&[4, 6], 10, r(39, 100));
        assert_eq!(s.threshold, 0);
        assert_eq!(s.partial, Some(r(39, 40)));
        assert_eq!(s.probs, vec![0.975, 0.0]);

        let s = unit_lp_solve(&[4, 6], 10, r(41, 100));
        assert_eq!(s.partial, Some(r(1, 60)));
        assert_eq!(s.probs[0], 1.0);

        let s = unit_lp_solve(&[4, 6], 10, r(1, 1));
        assert_eq!((s.threshold, s.partial, s.probs), (2, None, vec![1.0, 1.0]));
    }

    #[test]
    fn value_examples() {
        let pi = [0.4, 0.6];
        let u = [0.8, 0.4];
        let v = |num, den| -> f64 { single_round_value(&pi, &u, &unit_lp_solve(&[4, 6], 10, r(num, den))) };
        assert!((v(39, 100) - 0.312).abs() < 1e-15);
        assert!((v(41, 100) - 0.324).abs() < 1e-15);
        assert!((v(1, 1) - 0.56).abs() < 1e-15);
    }

    #[test]
    fn upper_bound_examples() {
        let inst = ProblemInstance::unit_cost(ContextDist::uniform(2).unwrap(), vec![vec![1.0], vec![0.0]], RewardFamily::Deterministic).unwrap();
        assert_eq!(upper_bound(&inst, 2, 1).unwrap(), 1.0);
        assert_eq!(upper_bound(&inst, 2, 0).unwrap(), 0.0);

        let probs = [0.025, 0.05, 0.075, 0.15, 0.2, 0.2, 0.15, 0.075, 0.05, 0.025];
        let rewards = (1..=10).map(|j| (1..=5).map(|k| (j * k) as f64 / 50.0).collect()).collect();
        let multi = ProblemInstance::unit_cost(ContextDist::from_probs(&probs).unwrap(), rewards, RewardFamily::Bernoulli).unwrap();
        let v = upper_bound(&multi, 1000, 500).unwrap() / 1000.0;
        assert!((v - 0.355).abs() < 1e-12);

        let het = ProblemInstance::new(ContextDist::uniform(1).unwrap(), vec![vec![0.5]], vec![vec![2]], RewardFamily::Bernoulli).unwrap();
        assert!(upper_bound(&het, 10, 5).is_err());
    }
}

//! Closed-form regret bounds for ALP and the log-coefficients for UCB-ALP.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::gaps::{GapTable, Placement};
use crate::instance::ProblemInstance;
use crate::lp::{round_value, BudgetRatio};

/// Where `rho` sits among the cumulative context probabilities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    /// Strictly between two cumulative probabilities.
    Interior,
    /// On a cumulative probability `q_j` with `1 <= j < J`.
    Boundary,
    /// `rho >= 1`: every arrival can be served.
    Saturated,
    /// `rho = 0`: nothing can be served.
    Empty,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub rho: f64,
    pub classification: Classification,
    /// Number of fully served contexts.
    pub threshold: usize,
    /// Margin to the nearest cumulative probability; interior only.
    pub delta: Option<f64>,
    /// Margin skipping the cumulative probability `rho` sits on; boundary only.
    pub delta_prime: Option<f64>,
    /// `u*_1 - u*_J` over the ranked best rewards.
    pub reward_range: f64,
    /// `2 (u*_1 - u*_J) sqrt(rho (1 - rho))`.
    pub theta_o: f64,
    /// Horizon-free part of the ALP bound.
    pub constant: f64,
    /// Per-context action-ranking coefficient.
    pub theta_a: Option<f64>,
    /// Context-ranking coefficient; defined only for interior `rho`.
    pub theta_c_nb: Option<f64>,
}

impl BoundReport {
    /// ALP regret bound at horizon `T`.
    pub fn alp_bound_at(&self, horizon: u64) -> f64 {
        match self.classification {
            Classification::Boundary => self.theta_o * (horizon as f64).sqrt() + self.constant,
            _ => self.constant,
        }
    }

    /// `Theta^(a) + Theta^(c)_nb`, the coefficient of `log T` for UCB-ALP.
    pub fn log_coefficient(&self) -> Option<f64> {
        Some(self.theta_a? + self.theta_c_nb?)
    }
}

fn exp_tail_constant(range: f64, margin: f64) -> f64 {
    if range == 0.0 {
        return 0.0;
    }
    range / (1.0 - (-2.0 * margin * margin).exp())
}

fn require_unit_cost(instance: &ProblemInstance) -> Result<()> {
    if !instance.is_unit_cost() {
        return Err(invalid("bounds are defined for unit-cost instances only"));
    }
    Ok(())
}

/// The ALP bound: constant for interior `rho`, `Theta^(o) sqrt(T) + constant`
/// on a boundary. The UCB fields are left empty.
pub fn bound_alp(instance: &ProblemInstance, rho: BudgetRatio) -> Result<BoundReport> {
    require_unit_cost(instance)?;
    let gaps = GapTable::build(instance);
    let best = gaps.ranked_best_rewards();
    let range = best[0] - best[best.len() - 1];
    let r = rho.to_f64();
    let margins = gaps.margins(rho);
    let (classification, delta, delta_prime, constant) = match margins.placement {
        Placement::Interior { delta } => (Classification::Interior, Some(delta), None, exp_tail_constant(range, delta)),
        Placement::Boundary { delta_prime } => (
            Classification::Boundary,
            None,
            Some(delta_prime),
            exp_tail_constant(range, delta_prime),
        ),
        Placement::Saturated => (Classification::Saturated, None, None, 0.0),
        Placement::Empty => (Classification::Empty, None, None, 0.0),
    };
    let theta_o = if classification == Classification::Boundary {
        2.0 * range * (r * (1.0 - r)).sqrt()
    } else {
        0.0
    };
    Ok(BoundReport {
        rho: r,
        classification,
        threshold: margins.threshold,
        delta,
        delta_prime,
        reward_range: range,
        theta_o,
        constant,
        theta_a: None,
        theta_c_nb: None,
    })
}

/// `sum_j sum_{k != k*_j} (2 / gap + 2 gap)` with `gap = u*_j - u_{j,k}`.
/// Infinite when a suboptimal action ties the best one.
pub fn theta_a(instance: &ProblemInstance) -> f64 {
    let mut sum = 0.0;
    for j in 0..instance.num_contexts() {
        let best = instance.best_action(j);
        for k in (0..instance.num_actions()).filter(|&k| k != best) {
            let gap = instance.best_reward(j) - instance.reward(j, k);
            sum += if gap > 0.0 { 2.0 / gap + 2.0 * gap } else { f64::INFINITY };
        }
    }
    sum
}

fn theta_c_nb(instance: &ProblemInstance, gaps: &GapTable, rho: BudgetRatio, threshold: usize, delta_half: (f64, f64)) -> Result<f64> {
    let probs = gaps.ranked_probs();
    let best = gaps.ranked_best_rewards();
    let ctx = gaps.ranking();
    let nk = instance.num_actions();
    let big_j = probs.len();
    let g = |r: usize| probs[r].min(delta_half.0).min(delta_half.1);
    let term = |gr: f64, gap: f64| if gap > 0.0 { 27.0 / (2.0 * gr * gap * gap) } else { f64::INFINITY };
    // `threshold` is the zero-based rank of the partially served context.
    let pivot = threshold;
    let mut sum = 0.0;
    for r in 0..pivot {
        for k in 0..nk {
            sum += term(g(pivot), best[r] - instance.reward(ctx[pivot], k));
        }
    }
    for r in pivot + 1..big_j {
        for k in 0..nk {
            sum += term(g(r), best[pivot] - instance.reward(ctx[r], k));
        }
    }
    sum += 2.0 * (nk * big_j) as f64;
    let scale = instance.unconstrained_reward() + round_value(instance, rho)?;
    Ok(scale * sum)
}

/// ALP bound plus the UCB-ALP log-coefficients. `Theta^(c)_nb` is absent
/// unless `rho` is interior.
pub fn bound_ucb_alp(instance: &ProblemInstance, rho: BudgetRatio) -> Result<BoundReport> {
    let mut report = bound_alp(instance, rho)?;
    report.theta_a = Some(theta_a(instance));
    if let Some(_delta) = report.delta {
        let gaps = GapTable::build(instance);
        let r = report.rho;
        let t = report.threshold;
        let half = (0.5 * (r - gaps.q(t)), 0.5 * (gaps.q(t + 1) - r));
        report.theta_c_nb = Some(theta_c_nb(instance, &gaps, rho, t, half)?);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{ContextDist, RewardFamily};
    use crate::lp::Ratio;

    fn two_context() -> ProblemInstance {
        let third = |s: f64| vec![s / 3.0, 2.0 * s / 3.0, s];
        ProblemInstance::unit_cost(
            ContextDist::from_weights(vec![4, 6]).unwrap(),
            vec![third(0.8), third(0.4)],
            RewardFamily::Bernoulli,
        )
        .unwrap()
    }

    #[test]
    fn interior_constant() {
        let b = bound_alp(&two_context(), Ratio::new(39, 100).unwrap()).unwrap();
        assert_eq!(b.classification, Classification::Interior);
        assert!((b.delta.unwrap() - 0.01).abs() < 1e-12);
        let expect = 0.4 / (1.0 - (-2.0f64 * 0.0001).exp());
        assert!((b.constant - expect).abs() < 1e-9);
        assert!((b.constant - 2000.2).abs() < 0.1);
        assert_eq!(b.alp_bound_at(1_000_000), b.constant);
    }

    #[test]
    fn boundary_terms() {
        let b = bound_alp(&two_context(), Ratio::new(2, 5).unwrap()).unwrap();
        assert_eq!(b.classification, Classification::Boundary);
        assert!(b.delta.is_none());
        assert!((b.delta_prime.unwrap() - 0.4).abs() < 1e-12);
        assert!((b.theta_o - 2.0 * 0.4 * 0.24f64.sqrt()).abs() < 1e-12);
        assert!((b.theta_o - 0.39192).abs() < 1e-5);
        assert!((b.constant - 1.4604).abs() < 1e-3);
    }

    #[test]
    fn equal_best_rewards_give_zero() {
        let inst = ProblemInstance::unit_cost(
            ContextDist::from_weights(vec![1, 1]).unwrap(),
            vec![vec![0.5, 0.2], vec![0.1, 0.5]],
            RewardFamily::Bernoulli,
        )
        .unwrap();
        for rho in [Ratio::new(1, 2).unwrap(), Ratio::new(1, 3).unwrap()] {
            let b = bound_alp(&inst, rho).unwrap();
            assert_eq!((b.constant, b.theta_o), (0.0, 0.0));
        }
    }

    #[test]
    fn theta_a_two_context() {
        let b = bound_ucb_alp(&two_context(), Ratio::new(39, 100).unwrap()).unwrap();
        assert!((b.theta_a.unwrap() - 36.15).abs() < 1e-9);
    }

    #[test]
    fn theta_c_uses_half_margins() {
        let inst = two_context();
        let b = bound_ucb_alp(&inst, Ratio::new(39, 100).unwrap()).unwrap();
        // Threshold 0: only the second sum, over the context ranked second,
        // with g = min(0.6, 0.195, 0.005) and gaps measured from u*_1 = 0.8.
        let g = 0.005;
        let mut s: f64 = [0.4 / 3.0, 0.8 / 3.0, 0.4].iter().map(|u| 27.0 / (2.0 * g * (0.8 - u) * (0.8 - u))).sum();
        s += 2.0 * 3.0 * 2.0;
        let ubar = 0.4 * 0.8 + 0.6 * 0.4;
        let v = 0.39 * 0.8;
        assert!((b.theta_c_nb.unwrap() - (ubar + v) * s).abs() < 1e-6 * s);
        let on_boundary = bound_ucb_alp(&inst, Ratio::new(2, 5).unwrap()).unwrap();
        assert!(on_boundary.theta_c_nb.is_none());
        assert!(on_boundary.log_coefficient().is_none());
    }

    #[test]
    fn single_action_has_no_ranking_term() {
        let inst = ProblemInstance::unit_cost(
            ContextDist::from_weights(vec![1, 2]).unwrap(),
            vec![vec![0.9], vec![0.3]],
            RewardFamily::Bernoulli,
        )
        .unwrap();
        assert_eq!(theta_a(&inst), 0.0);
    }

    #[test]
    fn rejects_heterogeneous_costs() {
        let inst = ProblemInstance::new(
            ContextDist::from_weights(vec![1]).unwrap(),
            vec![vec![0.5]],
            vec![vec![2]],
            RewardFamily::Bernoulli,
        )
        .unwrap();
        assert!(bound_alp(&inst, Ratio::new(1, 2).unwrap()).is_err());
    }
}

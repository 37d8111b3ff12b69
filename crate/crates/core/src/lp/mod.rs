//! Closed-form solutions of the per-round budget LP.
//!
//! Budget ratios and cumulative context masses are kept as exact integer
//! ratios so that a ratio sitting exactly on a cumulative probability is
//! classified as such.

pub mod hetero;
pub mod unit;

use serde::{Deserialize, Serialize};

pub use hetero::{
    dedup_equal_costs, find_candidate_set, find_candidate_set_among, het_lp_solve, het_round_value, virtualize,
    CandidateSet, HetLpSolution, Rate, RateComparison, VirtualAction, VirtualActionTable,
};
pub use unit::{single_round_value, unit_lp_solve, unit_threshold, unit_threshold_f64, upper_bound, UnitLpSolution};

use crate::error::{invalid, Result};
use crate::instance::ProblemInstance;

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Exact non-negative rational `num / den`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Ratio {
    pub num: u128,
    pub den: u128,
}

impl Ratio {
    pub fn new(num: u128, den: u128) -> Result<Self> {
        if den == 0 {
            return Err(invalid("ratio with zero denominator"));
        }
        Ok(Self::reduced(num, den))
    }

    fn reduced(num: u128, den: u128) -> Self {
        let g = gcd(num, den).max(1);
        Self { num: num / g, den: den / g }
    }

    pub fn zero() -> Self {
        Self { num: 0, den: 1 }
    }

    pub fn one() -> Self {
        Self { num: 1, den: 1 }
    }

    pub fn to_f64(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn is_zero(self) -> bool {
        self.num == 0
    }

    /// `self <= other`, exactly.
    pub fn le(self, other: Ratio) -> bool {
        self.num * other.den <= other.num * self.den
    }

    pub fn min(self, other: Ratio) -> Ratio {
        if self.le(other) {
            self
        } else {
            other
        }
    }
}

impl PartialEq for Ratio {
    fn eq(&self, other: &Self) -> bool {
        self.num * other.den == other.num * self.den
    }
}

impl Eq for Ratio {}

/// Average budget per remaining round, `b / tau` or `B / T`, in cost units.
pub type BudgetRatio = Ratio;

/// `b / tau` as an exact ratio; `tau` must be positive.
pub fn budget_ratio(budget: u64, rounds: u64) -> Result<BudgetRatio> {
    if rounds == 0 {
        return Err(invalid("budget ratio needs at least one remaining round"));
    }
    Ok(Ratio::reduced(budget as u128, rounds as u128))
}

/// Single-round LP value at `rho` for any instance: the unit-cost threshold
/// solution when all costs are one, the heterogeneous solution otherwise.
pub fn round_value(instance: &ProblemInstance, rho: BudgetRatio) -> Result<f64> {
    if instance.is_unit_cost() {
        let gaps = crate::gaps::GapTable::build(instance);
        let sol = unit_lp_solve(gaps.ranked_weights(), gaps.total_weight(), rho);
        Ok(single_round_value(&gaps.ranked_probs(), &gaps.ranked_best_rewards(), &sol))
    } else {
        het_round_value(instance, rho)
    }
}

/// LP upper bound `T * v(B/T)` on the expected total reward of any policy.
pub fn lp_benchmark(instance: &ProblemInstance, horizon: u64, budget: u64) -> Result<f64> {
    if horizon == 0 {
        return Ok(0.0);
    }
    Ok(horizon as f64 * round_value(instance, budget_ratio(budget, horizon)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ratio_arithmetic() {
        let a = Ratio::new(39, 100).unwrap();
        let b = Ratio::new(78, 200).unwrap();
        assert_eq!(a, b);
        assert_eq!((b.num, b.den), (39, 100));
        assert!(a.le(Ratio::new(2, 5).unwrap()));
        assert!(!Ratio::new(41, 100).unwrap().le(Ratio::new(2, 5).unwrap()));
        assert!(Ratio::new(1, 0).is_err());
        assert!(budget_ratio(3, 0).is_err());
    }
}

#![allow(dead_code)]

use ccb_core::lp::Ratio;
use ccb_core::{ContextDist, ProblemInstance, RewardFamily};
use proptest::prelude::*;

/// Rewards on a 1/20 grid so that ties occur now and then.
pub fn reward() -> impl Strategy<Value = f64> {
    (0u32..=20).prop_map(|x| x as f64 / 20.0)
}

pub fn unit_instance(max_j: usize, max_k: usize) -> impl Strategy<Value = ProblemInstance> {
    (1..=max_j, 1..=max_k)
        .prop_flat_map(|(nj, nk)| {
            (
                prop::collection::vec(1u64..=10, nj),
                prop::collection::vec(prop::collection::vec(reward(), nk), nj),
            )
        })
        .prop_map(|(w, u)| ProblemInstance::unit_cost(ContextDist::from_weights(w).unwrap(), u, RewardFamily::Bernoulli).unwrap())
}

pub fn het_instance(max_j: usize, max_k: usize, max_cost: u64) -> impl Strategy<Value = ProblemInstance> {
    (1..=max_j, 1..=max_k)
        .prop_flat_map(move |(nj, nk)| {
            (
                prop::collection::vec(1u64..=10, nj),
                prop::collection::vec(prop::collection::vec(reward(), nk), nj),
                prop::collection::vec(prop::collection::vec(1u64..=max_cost, nk), nj),
            )
        })
        .prop_map(|(w, u, c)| ProblemInstance::new(ContextDist::from_weights(w).unwrap(), u, c, RewardFamily::Bernoulli).unwrap())
}

pub fn ratio() -> impl Strategy<Value = Ratio> {
    (0u128..=60, 1u128..=20).prop_map(|(n, d)| Ratio::new(n, d).unwrap())
}

/// LP value by strong duality: the dual
/// `min_{lambda >= 0} lambda rho + sum_j pi_j max(0, max_k (u_jk - lambda c_jk))`
/// is convex and piecewise linear, so its minimum sits at zero or at a
/// breakpoint, and every breakpoint is enumerated.
pub fn dual_lp_value(instance: &ProblemInstance, rho: f64) -> f64 {
    let (nj, nk) = (instance.num_contexts(), instance.num_actions());
    let mut candidates = vec![0.0];
    for j in 0..nj {
        for k in 0..nk {
            let (u, c) = (instance.reward(j, k), instance.cost(j, k) as f64);
            candidates.push(u / c);
            for k2 in 0..nk {
                let (u2, c2) = (instance.reward(j, k2), instance.cost(j, k2) as f64);
                if c2 != c {
                    let l = (u - u2) / (c - c2);
                    if l > 0.0 {
                        candidates.push(l);
                    }
                }
            }
        }
    }
    candidates
        .into_iter()
        .map(|l| {
            let inner: f64 = (0..nj)
                .map(|j| {
                    let best = (0..nk)
                        .map(|k| instance.reward(j, k) - l * instance.cost(j, k) as f64)
                        .fold(0.0, f64::max);
                    instance.contexts().prob(j) * best
                })
                .sum();
            l * rho + inner
        })
        .fold(f64::INFINITY, f64::min)
}

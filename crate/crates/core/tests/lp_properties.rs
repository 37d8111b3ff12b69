mod common;

use ccb_core::gaps::GapTable;
use ccb_core::lp::{
    find_candidate_set, het_lp_solve, lp_benchmark, round_value, unit_lp_solve, Ratio, VirtualActionTable,
};
use ccb_core::{ContextDist, ProblemInstance, RewardFamily};
use common::*;
use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

fn big(r: Ratio) -> BigRational {
    BigRational::new(BigInt::from(r.num), BigInt::from(r.den))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn unit_solution_spends_exactly_the_ratio(inst in unit_instance(5, 3), rho in ratio()) {
        let gaps = GapTable::build(&inst);
        let sol = unit_lp_solve(gaps.ranked_weights(), gaps.total_weight(), rho);
        let total = BigRational::from_integer(gaps.total_weight().into());
        let mut spent = BigRational::from_integer(0.into());
        let mut prev = BigRational::from_integer(1.into());
        for (r, &w) in gaps.ranked_weights().iter().enumerate() {
            let p = big(sol.exact_prob_at_rank(r));
            prop_assert!(p >= BigRational::from_integer(0.into()) && p <= prev);
            spent += BigRational::from_integer(w.into()) * &p / &total;
            prev = p;
        }
        let cap = big(rho).min(BigRational::from_integer(1.into()));
        prop_assert_eq!(spent, cap);
    }

    #[test]
    fn value_is_nondecreasing_and_concave(inst in unit_instance(4, 3)) {
        let grid: Vec<f64> = (0..=24).map(|n| round_value(&inst, Ratio::new(n, 20).unwrap()).unwrap()).collect();
        for w in grid.windows(2) {
            prop_assert!(w[1] >= w[0] - 1e-12);
        }
        for w in grid.windows(3) {
            prop_assert!(w[0] + w[2] <= 2.0 * w[1] + 1e-12);
        }
    }

    #[test]
    fn heterogeneous_solver_agrees_with_unit_solver_on_unit_costs(inst in unit_instance(4, 3), rho in ratio()) {
        let unit = round_value(&inst, rho).unwrap();
        let het = ccb_core::lp::het_round_value(&inst, rho).unwrap();
        prop_assert!((unit - het).abs() < 1e-12, "unit {} het {}", unit, het);
    }

    #[test]
    fn heterogeneous_solution_is_feasible_and_optimal(inst in het_instance(3, 4, 5), rho in ratio()) {
        let table = VirtualActionTable::from_instance(&inst).unwrap();
        let sol = het_lp_solve(
            inst.contexts().weights(),
            inst.contexts().total(),
            &table,
            rho,
            |j, k| inst.reward(j, k),
            |j, k| inst.cost(j, k),
        )
        .unwrap();
        for j in 0..inst.num_contexts() {
            let row = sol.row(j);
            prop_assert!(row.iter().all(|&p| (-1e-12..=1.0 + 1e-12).contains(&p)));
            prop_assert!(row.iter().sum::<f64>() <= 1.0 + 1e-9);
        }
        prop_assert!(sol.budget_used <= rho.to_f64() + 1e-9);
        let oracle = dual_lp_value(&inst, rho.to_f64());
        prop_assert!((sol.value - oracle).abs() < 1e-9, "solver {} dual {}", sol.value, oracle);
    }

    #[test]
    fn scaling_costs_and_ratio_together_keeps_the_value(inst in het_instance(3, 3, 4), rho in ratio(), s in 2u64..4) {
        let scaled = ProblemInstance::new(
            inst.contexts().clone(),
            (0..inst.num_contexts()).map(|j| inst.reward_row(j).to_vec()).collect(),
            (0..inst.num_contexts()).map(|j| inst.cost_row(j).iter().map(|c| c * s).collect()).collect(),
            RewardFamily::Bernoulli,
        )
        .unwrap();
        let a = round_value(&inst, rho).unwrap();
        let b = round_value(&scaled, Ratio::new(rho.num * s as u128, rho.den).unwrap()).unwrap();
        prop_assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn candidate_sets_keep_the_best_rate_and_the_best_reward(inst in het_instance(1, 5, 5)) {
        let (c, u) = (inst.cost_row(0), inst.reward_row(0));
        let set = find_candidate_set(c, u);
        let best_u = u.iter().cloned().fold(f64::MIN, f64::max);
        prop_assert!(set.actions.iter().any(|&k| u[k] == best_u));
        let best_rate = (0..u.len()).map(|k| u[k] / c[k] as f64).fold(f64::MIN, f64::max);
        prop_assert!(set.actions.iter().any(|&k| u[k] / c[k] as f64 == best_rate));
        // Kept actions climb in cost and reward.
        for w in set.actions.windows(2) {
            prop_assert!(c[w[1]] > c[w[0]] && u[w[1]] > u[w[0]]);
        }
    }
}

#[test]
fn benchmark_examples() {
    let inst = ProblemInstance::unit_cost(
        ContextDist::from_probs(&[0.4, 0.6]).unwrap(),
        vec![vec![0.8 / 3.0, 1.6 / 3.0, 0.8], vec![0.4 / 3.0, 0.8 / 3.0, 0.4]],
        RewardFamily::Bernoulli,
    )
    .unwrap();
    assert_eq!(lp_benchmark(&inst, 0, 0).unwrap(), 0.0);
    assert!((lp_benchmark(&inst, 1000, 390).unwrap() - 312.0).abs() < 1e-9);
    assert!((lp_benchmark(&inst, 1000, 410).unwrap() - (320.0 + 0.01 * 1000.0 * 0.4)).abs() < 1e-9);
    // Budget beyond the horizon is worth no more than serving everyone.
    assert!((lp_benchmark(&inst, 10, 50).unwrap() - 10.0 * inst.unconstrained_reward()).abs() < 1e-12);
}

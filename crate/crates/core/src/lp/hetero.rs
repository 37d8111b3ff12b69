//! Heterogeneous-cost LP: per-context candidate sets, the incremental
//! ("virtual") action transform, and the global threshold solution.

use serde::{Deserialize, Serialize};

use super::{BudgetRatio, Ratio};
use crate::error::{Error, Result};
use crate::instance::ProblemInstance;

/// Candidate actions of one context, ordered by `u / c` descending. Rewards
/// and costs are strictly increasing along the list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub actions: Vec<usize>,
}

/// A rate `(u_hi - u_lo) / (c_hi - c_lo)` between two actions of one context;
/// `lo = None` stands for the dummy action (zero reward, zero cost), which
/// makes the rate the normalized reward `u / c`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rate {
    pub context: usize,
    pub hi: usize,
    pub lo: Option<usize>,
}

/// A rate ordering the solver relied on: `larger` was judged at least `smaller`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RateComparison {
    pub larger: Rate,
    pub smaller: Rate,
}

fn rate(costs: &[u64], rewards: &[f64], hi: usize, lo: Option<usize>) -> f64 {
    match lo {
        None => rewards[hi] / costs[hi] as f64,
        Some(lo) => (rewards[hi] - rewards[lo]) / (costs[hi] as f64 - costs[lo] as f64),
    }
}

/// Among actions sharing a cost keeps only the highest reward (lowest index on ties).
pub fn dedup_equal_costs(costs: &[u64], rewards: &[f64], allowed: &[usize]) -> Vec<usize> {
    let mut kept: Vec<usize> = Vec::with_capacity(allowed.len());
    for &k in allowed {
        match kept.iter().position(|&m| costs[m] == costs[k]) {
            Some(i) if rewards[k] > rewards[kept[i]] => kept[i] = k,
            Some(_) => {}
            None => kept.push(k),
        }
    }
    kept.sort_unstable();
    kept
}

/// Candidate set over all actions of one context.
pub fn find_candidate_set(costs: &[u64], rewards: &[f64]) -> CandidateSet {
    let all: Vec<usize> = (0..costs.len()).collect();
    find_candidate_set_among(costs, rewards, &all, 0, None)
}

/// Candidate set restricted to `allowed` actions. When `log` is given, every
/// rate ordering that shaped the result is appended to it.
pub fn find_candidate_set_among(
    costs: &[u64],
    rewards: &[f64],
    allowed: &[usize],
    context: usize,
    mut log: Option<&mut Vec<RateComparison>>,
) -> CandidateSet {
    let mut sorted = dedup_equal_costs(costs, rewards, allowed);
    let eta = |k: usize| rewards[k] / costs[k] as f64;
    sorted.sort_by(|&a, &b| {
        eta(b)
            .partial_cmp(&eta(a))
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(rewards[b].partial_cmp(&rewards[a]).unwrap_or(std::cmp::Ordering::Equal))
            .then(a.cmp(&b))
    });
    if let Some(log) = log.as_deref_mut() {
        for w in sorted.windows(2) {
            log.push(RateComparison {
                larger: Rate { context, hi: w[0], lo: None },
                smaller: Rate { context, hi: w[1], lo: None },
            });
        }
    }

    // Drop actions whose reward does not beat some action of higher u / c.
    let mut survivors: Vec<usize> = Vec::with_capacity(sorted.len());
    let mut best_u = f64::NEG_INFINITY;
    for &k in &sorted {
        if rewards[k] > best_u {
            survivors.push(k);
        }
        best_u = best_u.max(rewards[k]);
    }

    // Walk the upper concave hull of (cost, reward) from the best-u/c action.
    let mut hull = Vec::with_capacity(survivors.len());
    let mut a = 0;
    while a < survivors.len() {
        hull.push(survivors[a]);
        if a + 1 == survivors.len() {
            break;
        }
        let from = survivors[a];
        let mut best = a + 1;
        let mut best_rate = rate(costs, rewards, survivors[best], Some(from));
        for b in a + 2..survivors.len() {
            let r = rate(costs, rewards, survivors[b], Some(from));
            // Ties go to the farther action so collinear points are dropped.
            if r >= best_rate {
                best = b;
                best_rate = r;
            }
        }
        if let Some(log) = log.as_deref_mut() {
            for b in a + 1..survivors.len() {
                if b != best {
                    log.push(RateComparison {
                        larger: Rate { context, hi: survivors[best], lo: Some(from) },
                        smaller: Rate { context, hi: survivors[b], lo: Some(from) },
                    });
                }
            }
        }
        a = best;
    }
    CandidateSet { actions: hull }
}

/// One incremental action: moving context `context` from candidate slot
/// `slot - 1` up to `slot`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirtualAction {
    pub context: usize,
    pub slot: usize,
    /// Underlying real action at this slot.
    pub action: usize,
    pub du: f64,
    pub dc: u64,
    pub eta: f64,
    /// Real action one slot down (`None` for the first slot).
    pub below: Option<usize>,
}

/// Incremental transform of one context's candidate set.
pub fn virtualize(context: usize, set: &CandidateSet, costs: &[u64], rewards: &[f64]) -> Result<Vec<VirtualAction>> {
    let mut out = Vec::with_capacity(set.actions.len());
    let mut prev: Option<usize> = None;
    for (slot, &k) in set.actions.iter().enumerate() {
        let (pu, pc) = prev.map_or((0.0, 0), |p| (rewards[p], costs[p]));
        if costs[k] <= pc || rewards[k] <= pu && prev.is_some() {
            return Err(Error::Internal(format!(
                "candidate set of context {} is not strictly increasing at slot {}",
                context + 1,
                slot + 1
            )));
        }
        let du = rewards[k] - pu;
        let dc = costs[k] - pc;
        let eta = du / dc as f64;
        if let Some(last) = out.last().map(|v: &VirtualAction| v.eta) {
            if eta > last * (1.0 + 1e-9) + 1e-12 {
                return Err(Error::Internal(format!(
                    "incremental rates of context {} increase at slot {}",
                    context + 1,
                    slot + 1
                )));
            }
        }
        out.push(VirtualAction {
            context,
            slot,
            action: k,
            du,
            dc,
            eta,
            below: prev,
        });
        prev = Some(k);
    }
    Ok(out)
}

/// All virtual actions, sorted by incremental rate descending with ties
/// broken by `(context, slot)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VirtualActionTable {
    pub num_contexts: usize,
    pub num_actions: usize,
    pub entries: Vec<VirtualAction>,
}

impl VirtualActionTable {
    pub fn new(num_contexts: usize, num_actions: usize, mut entries: Vec<VirtualAction>) -> Self {
        entries.sort_by(|a, b| {
            b.eta
                .partial_cmp(&a.eta)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then((a.context, a.slot).cmp(&(b.context, b.slot)))
        });
        Self {
            num_contexts,
            num_actions,
            entries,
        }
    }

    /// Table over every action of every context of `instance`.
    pub fn from_instance(instance: &ProblemInstance) -> Result<Self> {
        let all: Vec<usize> = (0..instance.num_actions()).collect();
        Self::from_rows(instance.num_contexts(), instance.num_actions(), |j| (instance.cost_row(j), instance.reward_row(j)), |_| &all[..], None)
    }

    /// Generic builder: `row(j)` yields `(costs, rewards)` and `allowed(j)` the
    /// admissible actions of context `j`.
    pub fn from_rows<'a, R, A>(
        num_contexts: usize,
        num_actions: usize,
        row: R,
        allowed: A,
        mut log: Option<&mut Vec<RateComparison>>,
    ) -> Result<Self>
    where
        R: Fn(usize) -> (&'a [u64], &'a [f64]),
        A: Fn(usize) -> &'a [usize],
    {
        let mut entries = Vec::new();
        for j in 0..num_contexts {
            let (costs, rewards) = row(j);
            let set = find_candidate_set_among(costs, rewards, allowed(j), j, log.as_deref_mut());
            entries.extend(virtualize(j, &set, costs, rewards)?);
        }
        let table = Self::new(num_contexts, num_actions, entries);
        if let Some(log) = log {
            for w in table.entries.windows(2) {
                log.push(RateComparison {
                    larger: Rate { context: w[0].context, hi: w[0].action, lo: w[0].below },
                    smaller: Rate { context: w[1].context, hi: w[1].action, lo: w[1].below },
                });
            }
        }
        Ok(table)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HetLpSolution {
    /// Number of table entries taken with probability one.
    pub threshold: usize,
    /// Exact probability of the entry just past the threshold, if any.
    pub partial: Option<Ratio>,
    /// Probability per table entry, in table order.
    pub virtual_probs: Vec<f64>,
    /// Row-major `J x K` probabilities of the real actions.
    pub probs: Vec<f64>,
    pub num_actions: usize,
    pub value: f64,
    pub budget_used: f64,
}

impl HetLpSolution {
    pub fn prob(&self, j: usize, k: usize) -> f64 {
        self.probs[j * self.num_actions + k]
    }

    pub fn row(&self, j: usize) -> &[f64] {
        &self.probs[j * self.num_actions..(j + 1) * self.num_actions]
    }
}

/// Solves the virtual LP by filling entries in rate order until the average
/// budget `rho` (in cost units) is spent, then maps back to real actions.
/// `rewards(j, k)` and `costs(j, k)` are only read for reporting the value.
pub fn het_lp_solve(
    weights: &[u64],
    total: u64,
    table: &VirtualActionTable,
    rho: BudgetRatio,
    rewards: impl Fn(usize, usize) -> f64,
    costs: impl Fn(usize, usize) -> u64,
) -> Result<HetLpSolution> {
    let limit = rho.num * total as u128;
    let mut spent = 0u128;
    let mut threshold = table.entries.len();
    for (i, v) in table.entries.iter().enumerate() {
        let next = spent + weights[v.context] as u128 * v.dc as u128;
        if next * rho.den > limit {
            threshold = i;
            break;
        }
        spent = next;
    }
    let mut virtual_probs = vec![0.0; table.entries.len()];
    virtual_probs[..threshold].fill(1.0);
    let mut partial = None;
    if threshold < table.entries.len() {
        let v = &table.entries[threshold];
        // (rho - S) / (pi_j * dc) = (num * W - S * den) / (w_j * dc * den)
        let num = limit - spent * rho.den;
        let den = weights[v.context] as u128 * v.dc as u128 * rho.den;
        if den > 0 {
            let p = Ratio::new(num, den)?;
            virtual_probs[threshold] = p.to_f64();
            partial = Some(p);
        }
    }

    let (nj, nk) = (table.num_contexts, table.num_actions);
    let mut slot_probs: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nj];
    for (v, &p) in table.entries.iter().zip(&virtual_probs) {
        slot_probs[v.context].push((v.slot, p));
    }
    let mut slot_action: Vec<Vec<usize>> = vec![Vec::new(); nj];
    for v in &table.entries {
        let row = &mut slot_action[v.context];
        if row.len() <= v.slot {
            row.resize(v.slot + 1, usize::MAX);
        }
        row[v.slot] = v.action;
    }
    let mut probs = vec![0.0; nj * nk];
    for j in 0..nj {
        let row = &mut slot_probs[j];
        row.sort_by_key(|&(slot, _)| slot);
        for a in 0..row.len() {
            let next = row.get(a + 1).map_or(0.0, |&(_, p)| p);
            let p = row[a].1 - next;
            if p < 0.0 {
                return Err(Error::Internal(format!(
                    "negative action probability {p} in context {} slot {}",
                    j + 1,
                    a + 1
                )));
            }
            probs[j * nk + slot_action[j][a]] = p;
        }
    }

    let mut value = 0.0;
    let mut budget_used = 0.0;
    for j in 0..nj {
        let pi = weights[j] as f64 / total as f64;
        for k in 0..nk {
            let p = probs[j * nk + k];
            if p > 0.0 {
                value += pi * p * rewards(j, k);
                budget_used += pi * p * costs(j, k) as f64;
            }
        }
    }
    Ok(HetLpSolution {
        threshold,
        partial,
        virtual_probs,
        probs,
        num_actions: nk,
        value,
        budget_used,
    })
}

/// Single-round heterogeneous LP value of `instance` at `rho`.
pub fn het_round_value(instance: &ProblemInstance, rho: BudgetRatio) -> Result<f64> {
    let table = VirtualActionTable::from_instance(instance)?;
    let sol = het_lp_solve(
        instance.contexts().weights(),
        instance.contexts().total(),
        &table,
        rho,
        |j, k| instance.reward(j, k),
        |j, k| instance.cost(j, k),
    )?;
    Ok(sol.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{ContextDist, RewardFamily};
    use crate::lp::unit_lp_solve;

    fn r(num: u128, den: u128) -> Ratio {
        Ratio::new(num, den).unwrap()
    }

    #[test]
    fn candidate_set_examples() {
        assert_eq!(find_candidate_set(&[1, 2, 3], &[0.5, 0.8, 0.9]).actions, vec![0, 1, 2]);
        assert_eq!(find_candidate_set(&[1, 2, 3], &[0.5, 0.55, 0.9]).actions, vec![0, 2]);
        assert_eq!(find_candidate_set(&[4], &[0.2]).actions, vec![0]);
    }

    #[test]
    fn equal_costs_keep_higher_reward() {
        assert_eq!(dedup_equal_costs(&[2, 2, 1], &[0.3, 0.6, 0.1], &[0, 1, 2]), vec![1, 2]);
        assert_eq!(find_candidate_set(&[1, 1, 1], &[0.3, 0.9, 0.9]).actions, vec![1]);
    }

    #[test]
    fn hull_pass_drops_points_under_the_chord() {
        // (1, 0.5), (2, 0.6), (3, 0.9): the middle point lies under the chord.
        assert_eq!(find_candidate_set(&[1, 2, 3], &[0.5, 0.6, 0.9]).actions, vec![0, 2]);
        // Collinear middle point is dropped.
        assert_eq!(find_candidate_set(&[1, 2, 3], &[0.5, 0.7, 0.9]).actions, vec![0, 2]);
    }

    #[test]
    fn virtualize_examples() {
        let set = CandidateSet { actions: vec![0, 1] };
        let v = virtualize(0, &set, &[1, 2], &[0.5, 0.8]).unwrap();
        assert_eq!(v.iter().map(|x| x.dc).collect::<Vec<_>>(), vec![1, 1]);
        assert!((v[0].du - 0.5).abs() < 1e-15 && (v[1].du - 0.3).abs() < 1e-15);
        assert!((v[0].eta - 0.5).abs() < 1e-15 && (v[1].eta - 0.3).abs() < 1e-15);

        let v = virtualize(0, &CandidateSet { actions: vec![0] }, &[3], &[0.6]).unwrap();
        assert_eq!((v[0].du, v[0].dc), (0.6, 3));

        let bad = CandidateSet { actions: vec![1, 0] };
        assert!(matches!(virtualize(0, &bad, &[1, 2], &[0.5, 0.8]), Err(Error::Internal(_))));
        let convex = CandidateSet { actions: vec![0, 1, 2] };
        assert!(matches!(virtualize(0, &convex, &[1, 2, 3], &[0.5, 0.6, 0.9]), Err(Error::Internal(_))));
    }

    fn single(costs: Vec<u64>, rewards: Vec<f64>) -> ProblemInstance {
        ProblemInstance::new(ContextDist::uniform(1).unwrap(), vec![rewards], vec![costs], RewardFamily::Bernoulli).unwrap()
    }

    fn solve(inst: &ProblemInstance, rho: Ratio) -> HetLpSolution {
        let table = VirtualActionTable::from_instance(inst).unwrap();
        het_lp_solve(inst.contexts().weights(), inst.contexts().total(), &table, rho, |j, k| inst.reward(j, k), |j, k| inst.cost(j, k)).unwrap()
    }

    #[test]
    fn het_solve_examples() {
        let inst = single(vec![1, 2], vec![0.5, 0.8]);
        let s = solve(&inst, r(3, 2));
        assert_eq!(s.row(0), &[0.5, 0.5]);
        assert!((s.value - 0.65).abs() < 1e-12);
        assert!((s.budget_used - 1.5).abs() < 1e-12);

        let s = solve(&inst, r(2, 1));
        assert_eq!(s.row(0), &[0.0, 1.0]);
        assert!((s.value - 0.8).abs() < 1e-12);

        let s = solve(&inst, r(5, 1));
        assert_eq!((s.threshold, s.partial), (2, None));
        assert_eq!(s.row(0), &[0.0, 1.0]);

        let s = solve(&inst, r(0, 1));
        assert_eq!(s.value, 0.0);
    }

    #[test]
    fn unit_costs_reduce_to_unit_lp() {
        let base = [1.0 / 3.0, 2.0 / 3.0, 1.0];
        let inst = ProblemInstance::unit_cost(
            ContextDist::from_probs(&[0.4, 0.6]).unwrap(),
            vec![base.map(|x| 0.8 * x).to_vec(), base.map(|x| 0.4 * x).to_vec()],
            RewardFamily::Bernoulli,
        )
        .unwrap();
        for rho in [r(39, 100), r(2, 5), r(41, 100), r(1, 1)] {
            let s = solve(&inst, rho);
            let u = unit_lp_solve(&[4, 6], 10, rho);
            assert_eq!(s.row(0), &[0.0, 0.0, u.probs[0]]);
            assert_eq!(s.row(1), &[0.0, 0.0, u.probs[1]]);
        }
        assert!((solve(&inst, r(39, 100)).value - 0.312).abs() < 1e-12);
    }

    #[test]
    fn comparisons_are_logged() {
        let mut log = Vec::new();
        let costs = [1u64, 2, 3];
        let rewards = [0.5, 0.8, 0.9];
        let all = [0usize, 1, 2];
        VirtualActionTable::from_rows(1, 3, |_| (&costs[..], &rewards[..]), |_| &all[..], Some(&mut log)).unwrap();
        assert!(!log.is_empty());
        let hull = log.iter().find(|c| c.larger.lo == Some(0)).unwrap();
        assert_eq!((hull.larger.hi, hull.smaller.hi), (1, 2));
    }
}

//! Policies that re-solve the budget LP every round: known-statistics ALP and
//! FLP, their empirical-context variants, and the UCB learners.

use rand::Rng;

use super::context_model::{delta_lcb, ContextModel};
use super::ucb::IndexSource;
use super::{sample_row, Decision, Policy, RoundView};
use crate::error::Result;
use crate::gaps::rank_by_desc;
use crate::instance::{argmax_first, Action, ProblemInstance};
use crate::lp::{budget_ratio, het_lp_solve, BudgetRatio, Ratio, VirtualActionTable};
use crate::rng::PolicyRng;

/// Which average budget the LP is solved with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RatioMode {
    /// `b / tau`, re-evaluated each round.
    Adaptive,
    /// `B / T` for the whole episode.
    Fixed(BudgetRatio),
}

/// Which LP solution the policy uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LpPath {
    /// Rank contexts by their best index; serve top contexts.
    Unit,
    /// Candidate sets, virtual actions and the global rate threshold.
    Het,
}

#[derive(Debug, Clone)]
enum StaticCache {
    Unit { best_k: Vec<usize>, ranking: Vec<usize> },
    Het(VirtualActionTable),
}

pub struct LpPolicy<S: IndexSource> {
    name: String,
    source: S,
    contexts: ContextModel,
    ratio: RatioMode,
    path: LpPath,
    instance: ProblemInstance,
    horizon: u64,
    plan_rho: f64,
    static_source: bool,
    cache: Option<StaticCache>,
    indices: Vec<f64>,
    diagnostics: Vec<String>,
}

impl<S: IndexSource> LpPolicy<S> {
    /// `static_source` promises that `source` never changes its indices,
    /// which lets the policy cache rankings and candidate sets.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        instance: &ProblemInstance,
        horizon: u64,
        budget: u64,
        source: S,
        contexts: ContextModel,
        ratio: RatioMode,
        path: LpPath,
        static_source: bool,
    ) -> Self {
        let plan_rho = if horizon == 0 { 0.0 } else { budget as f64 / horizon as f64 };
        Self {
            name: name.into(),
            source,
            contexts,
            ratio,
            path,
            instance: instance.clone(),
            horizon,
            plan_rho,
            static_source,
            cache: None,
            indices: vec![0.0; instance.num_contexts() * instance.num_actions()],
            diagnostics: Vec::new(),
        }
    }

    pub fn source(&self) -> &S {
        &self.source
    }

    pub fn context_model(&self) -> &ContextModel {
        &self.contexts
    }

    /// Swaps in a new index source and drops cached rankings.
    pub fn replace_source(&mut self, source: S) {
        self.source = source;
        self.cache = None;
    }

    pub fn push_diagnostic(&mut self, msg: String) {
        self.diagnostics.push(msg);
    }

    fn refresh_indices(&mut self, t: u64) {
        let nk = self.instance.num_actions();
        for j in 0..self.instance.num_contexts() {
            for k in 0..nk {
                self.indices[j * nk + k] = self.source.index(j, k, t);
            }
        }
    }

    fn unit_ranking(&self) -> (Vec<usize>, Vec<usize>) {
        let nk = self.instance.num_actions();
        let best_k: Vec<usize> = (0..self.instance.num_contexts())
            .map(|j| argmax_first(&self.indices[j * nk..(j + 1) * nk]))
            .collect();
        let best_val: Vec<f64> = best_k.iter().enumerate().map(|(j, &k)| self.indices[j * nk + k]).collect();
        (best_k, rank_by_desc(&best_val))
    }

    /// Records round `t`'s context in an empirical model.
    fn observe_context(&mut self, t: u64, j: usize) {
        if !matches!(self.contexts, ContextModel::Empirical { .. }) || self.contexts.is_frozen() {
            return;
        }
        let ranking = if self.path == LpPath::Unit { self.unit_ranking().1 } else { Vec::new() };
        let (rho, horizon) = (self.plan_rho, self.horizon);
        self.contexts.observe(t, j, |counts, seen| {
            let mut acc = 0u64;
            let q_hat: Vec<f64> = ranking
                .iter()
                .map(|&j| {
                    acc += counts[j];
                    acc as f64 / seen as f64
                })
                .collect();
            delta_lcb(&q_hat, rho, seen, horizon).stop
        });
        if let Some(t1) = self.contexts.frozen_at() {
            self.diagnostics.push(format!("context estimate frozen after round {t1}"));
        }
    }

    fn decide_unit(&mut self, context: usize, rho: Ratio, draw: f64) -> Decision {
        let (best_k, ranking) = match self.cache.take() {
            Some(StaticCache::Unit { best_k, ranking }) => (best_k, ranking),
            _ => self.unit_ranking(),
        };
        let (weights, total) = self.contexts.weights();
        let uniform;
        let (weights, total) = if total == 0 {
            uniform = vec![1u64; weights.len()];
            (&uniform[..], uniform.len() as u64)
        } else {
            (weights, total)
        };
        // Walk the ranking until the budget line is crossed.
        let limit = rho.num * total as u128;
        let mut cum = 0u128;
        let mut threshold = ranking.len();
        let mut prob = 0.0;
        for (r, &j) in ranking.iter().enumerate() {
            let next = cum + weights[j] as u128;
            if next * rho.den > limit {
                threshold = r;
                if j == context {
                    let p = Ratio::new(limit - cum * rho.den, weights[j] as u128 * rho.den).expect("positive weight");
                    prob = p.to_f64();
                }
                break;
            }
            if j == context {
                prob = 1.0;
            }
            cum = next;
        }
        let action = if draw < prob { Action::Arm(best_k[context]) } else { Action::Skip };
        if self.static_source {
            self.cache = Some(StaticCache::Unit { best_k, ranking });
        }
        Decision {
            action,
            take_prob: Some(prob),
            threshold: Some(threshold),
        }
    }

    fn decide_het(&mut self, context: usize, budget_left: u64, rho: Ratio, draw: f64) -> Result<Decision> {
        let nj = self.instance.num_contexts();
        let nk = self.instance.num_actions();
        let all_affordable = budget_left >= self.instance.max_cost();
        let cached = match self.cache.take() {
            Some(StaticCache::Het(table)) if all_affordable => Some(table),
            other => {
                self.cache = other;
                None
            }
        };
        let table = match cached {
            Some(table) => table,
            None => {
                let allowed: Vec<Vec<usize>> = (0..nj)
                    .map(|j| (0..nk).filter(|&k| self.instance.cost(j, k) <= budget_left).collect())
                    .collect();
                let indices = &self.indices;
                let inst = &self.instance;
                VirtualActionTable::from_rows(
                    nj,
                    nk,
                    |j| (inst.cost_row(j), &indices[j * nk..(j + 1) * nk]),
                    |j| &allowed[j][..],
                    None,
                )?
            }
        };
        let (weights, total) = self.contexts.weights();
        let uniform;
        let (weights, total) = if total == 0 {
            uniform = vec![1u64; weights.len()];
            (&uniform[..], uniform.len() as u64)
        } else {
            (weights, total)
        };
        let indices = &self.indices;
        let sol = het_lp_solve(weights, total, &table, rho, |j, k| indices[j * nk + k], |j, k| self.instance.cost(j, k))?;
        let row = sol.row(context);
        let action = sample_row(row, draw);
        let take_prob = row.iter().sum();
        if self.static_source && all_affordable {
            self.cache = Some(StaticCache::Het(table));
        }
        Ok(Decision {
            action,
            take_prob: Some(take_prob),
            threshold: Some(sol.threshold),
        })
    }
}

impl<S: IndexSource> Policy for LpPolicy<S> {
    fn name(&self) -> &str {
        &self.name
    }

    fn decide(&mut self, view: &RoundView<'_>, rng: &mut PolicyRng) -> Result<Decision> {
        if self.cache.is_none() || !self.static_source {
            self.refresh_indices(view.t);
        }
        self.observe_context(view.t, view.context);
        if view.remaining_budget == 0 {
            return Ok(Decision::skip());
        }
        let draw: f64 = rng.random();
        let rho = match self.ratio {
            RatioMode::Adaptive => budget_ratio(view.remaining_budget, view.remaining_time)?,
            RatioMode::Fixed(rho) => rho,
        };
        match self.path {
            LpPath::Unit => Ok(self.decide_unit(view.context, rho, draw)),
            LpPath::Het => self.decide_het(view.context, view.remaining_budget, rho, draw),
        }
    }

    fn observe(&mut self, context: usize, action: Action, reward: f64) {
        if let Action::Arm(k) = action {
            self.source.observe(context, k, reward);
        }
    }

    fn diagnostics(&self) -> Vec<String> {
        self.diagnostics.clone()
    }
}

//! Decision policies behind one per-round interface.

pub mod context_model;
pub mod eps_first;
pub mod lp_policy;
pub mod pb;
pub mod ucb;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use context_model::{delta_lcb, ealp2_horizon_too_short, ealp2_t1, ContextModel, DeltaLcb, Truncation};
pub use eps_first::{clt_test, eps_length, min_cost_gap, min_rate_gap, EpsFirstPolicy, Exploration};
pub use lp_policy::{LpPath, LpPolicy, RatioMode};
pub use pb::PbPolicy;
pub use ucb::{ucb_value, ucb_value_ln, IndexMode, IndexSource, OracleIndex, UcbEstimator};

use crate::dp::{dp_solve, DpPolicy, ValueTable};
use crate::error::{Error, Result};
use crate::gaps::{GapTable, Placement};
use crate::instance::{Action, ProblemInstance};
use crate::lp::{budget_ratio, Ratio};
use crate::rng::PolicyRng;

/// What a policy sees at the start of a round.
#[derive(Debug, Clone, Copy)]
pub struct RoundView<'a> {
    /// One-based round index.
    pub t: u64,
    pub context: usize,
    /// Rounds left including this one (`tau`).
    pub remaining_time: u64,
    /// Budget left before this round (`b`).
    pub remaining_budget: u64,
    pub horizon: u64,
    pub budget: u64,
    pub instance: &'a ProblemInstance,
}

/// A chosen action plus what the policy planned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Decision {
    pub action: Action,
    /// Probability of taking any real action in this round, when defined.
    pub take_prob: Option<f64>,
    /// LP threshold used, when defined.
    pub threshold: Option<usize>,
}

impl Decision {
    pub fn skip() -> Self {
        Self {
            action: Action::Skip,
            take_prob: Some(0.0),
            threshold: None,
        }
    }
}

pub trait Policy: Send {
    fn name(&self) -> &str;

    fn decide(&mut self, view: &RoundView<'_>, rng: &mut PolicyRng) -> Result<Decision>;

    /// Feedback after the round: the realized reward of the taken action.
    fn observe(&mut self, _context: usize, _action: Action, _reward: f64) {}

    fn diagnostics(&self) -> Vec<String> {
        Vec::new()
    }
}

/// Inverse-CDF draw over a probability row; leftover mass is the dummy action.
pub fn sample_row(row: &[f64], draw: f64) -> Action {
    let mut acc = 0.0;
    for (k, &p) in row.iter().enumerate() {
        if p <= 0.0 {
            continue;
        }
        acc += p;
        if draw < acc {
            return Action::Arm(k);
        }
    }
    Action::Skip
}

/// When the two-phase empirical policy stops updating its context estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum T1Mode {
    /// Freeze after a fixed round.
    Fixed { rounds: u64 },
    /// Use the truncation formula with a given margin.
    Delta { delta: f64 },
    /// Use the truncation formula with the instance's true margin.
    Oracle,
    /// Freeze when the data-driven margin estimate fires.
    Adaptive,
}

/// How long the explore-first policy explores.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum ExplorationMode {
    /// Length from the high-probability formula, with slack `delta` and the
    /// instance's true rate separation.
    Formula { delta: f64 },
    Fixed { rounds: u64 },
    /// Data-driven confidence-level test.
    Clt,
}

/// Every policy the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PolicyKind {
    Alp,
    Flp,
    Pb,
    Ealp,
    Ealp2 {
        t1: T1Mode,
    },
    UcbAlp {
        #[serde(default)]
        normalized: bool,
    },
    UcbFlp {
        #[serde(default)]
        normalized: bool,
    },
    UcbEalp {
        #[serde(default)]
        normalized: bool,
    },
    UcbPb,
    EpsFirstAlp {
        exploration: ExplorationMode,
    },
    DpOracle,
}

impl PolicyKind {
    /// Short identifier used in result tables.
    pub fn label(&self) -> String {
        let norm = |n: bool| if n { "-normalized" } else { "" };
        match self {
            PolicyKind::Alp => "alp".into(),
            PolicyKind::Flp => "flp".into(),
            PolicyKind::Pb => "pb".into(),
            PolicyKind::Ealp => "ealp".into(),
            PolicyKind::Ealp2 { t1 } => match t1 {
                T1Mode::Fixed { rounds } => format!("ealp2-t1-{rounds}"),
                T1Mode::Delta { delta } => format!("ealp2-delta-{delta}"),
                T1Mode::Oracle => "ealp2-oracle".into(),
                T1Mode::Adaptive => "ealp2-adaptive".into(),
            },
            PolicyKind::UcbAlp { normalized } => format!("ucb-alp{}", norm(*normalized)),
            PolicyKind::UcbFlp { normalized } => format!("ucb-flp{}", norm(*normalized)),
            PolicyKind::UcbEalp { normalized } => format!("ucb-ealp{}", norm(*normalized)),
            PolicyKind::UcbPb => "ucb-pb".into(),
            PolicyKind::EpsFirstAlp { exploration } => match exploration {
                ExplorationMode::Formula { delta } => format!("eps-first-alp-formula-{delta}"),
                ExplorationMode::Fixed { rounds } => format!("eps-first-alp-{rounds}"),
                ExplorationMode::Clt => "eps-first-alp-clt".into(),
            },
            PolicyKind::DpOracle => "dp-oracle".into(),
        }
    }

    /// Checks that the policy can run on `instance`.
    pub fn check(&self, instance: &ProblemInstance) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(format!("{}: {msg}", self.label())));
        let unit = instance.is_unit_cost();
        match self {
            PolicyKind::Pb | PolicyKind::UcbPb => {
                if instance.num_contexts() != 2 {
                    return fail(format!("needs exactly 2 contexts (J = 2), instance has J = {}", instance.num_contexts()));
                }
                if !unit {
                    return fail("needs unit costs".into());
                }
            }
            PolicyKind::UcbAlp { normalized } | PolicyKind::UcbFlp { normalized } | PolicyKind::UcbEalp { normalized } => {
                if *normalized {
                    if !instance.has_uniform_cost_per_context() {
                        return fail("normalized UCB needs one cost per context".into());
                    }
                } else if !unit {
                    return fail("needs unit costs (set normalized = true for one cost per context)".into());
                }
            }
            PolicyKind::Ealp2 { t1 } => match t1 {
                T1Mode::Oracle | T1Mode::Adaptive if !unit => return fail("margin-based truncation needs unit costs".into()),
                T1Mode::Delta { delta } if !(*delta > 0.0) => return fail("delta must be positive".into()),
                _ => {}
            },
            PolicyKind::EpsFirstAlp { exploration } => {
                if let ExplorationMode::Formula { delta } = exploration {
                    if !(*delta > 0.0 && *delta < 1.0) {
                        return fail("formula slack delta must lie in (0, 1)".into());
                    }
                    if instance.contexts().min_prob() <= 0.0 {
                        return fail("formula needs every context probability positive".into());
                    }
                    if min_rate_gap(instance) <= 0.0 {
                        return fail("formula needs distinct reward-cost rates; use the confidence-level test".into());
                    }
                }
            }
            PolicyKind::DpOracle => {
                if !unit {
                    return fail("the dynamic-programming oracle needs unit costs".into());
                }
            }
            PolicyKind::Alp | PolicyKind::Flp | PolicyKind::Ealp => {}
        }
        Ok(())
    }

    /// Validates and precomputes everything shared by the episodes of one
    /// `(instance, T, B)` configuration.
    pub fn prepare(&self, instance: &ProblemInstance, horizon: u64, budget: u64) -> Result<PreparedPolicy> {
        self.check(instance)?;
        let mut notes = Vec::new();
        let mut clamp = |what: &str, raw: u64| -> u64 {
            if raw > horizon {
                notes.push(format!("{what} = {raw} exceeds T = {horizon}; clamped to T"));
                horizon
            } else {
                raw
            }
        };
        let detail = match self {
            PolicyKind::Ealp2 { t1 } => {
                let nj = instance.num_contexts();
                let truncation = match t1 {
                    T1Mode::Fixed { rounds } => Truncation::After(clamp("T1", *rounds)),
                    T1Mode::Delta { delta } => {
                        let raw = ealp2_t1(horizon as f64, nj, *delta);
                        let t1 = clamp("T1", raw);
                        if ealp2_horizon_too_short(horizon, nj, *delta) {
                            notes.push(format!("horizon T = {horizon} is too short for the truncation guarantee at delta = {delta}"));
                        }
                        Truncation::After(t1)
                    }
                    T1Mode::Oracle => {
                        let margins = GapTable::build(instance).margins(plan_ratio(horizon, budget)?);
                        match margins.placement {
                            Placement::Interior { delta } => {
                                let raw = ealp2_t1(horizon as f64, nj, delta);
                                Truncation::After(clamp("T1", raw))
                            }
                            _ => {
                                notes.push("no positive margin at this budget ratio; T1 = T".into());
                                Truncation::After(horizon)
                            }
                        }
                    }
                    T1Mode::Adaptive => Truncation::Adaptive,
                };
                Detail::Truncation(truncation)
            }
            PolicyKind::EpsFirstAlp { exploration } => Detail::Exploration(match exploration {
                ExplorationMode::Fixed { rounds } => Exploration::Rounds(clamp("exploration length", *rounds)),
                ExplorationMode::Formula { delta } => {
                    let delta_star = min_cost_gap(instance) as f64 * min_rate_gap(instance);
                    let raw = eps_length(
                        (horizon.max(1) as f64).ln(),
                        instance.num_actions(),
                        *delta,
                        instance.contexts().min_prob(),
                        delta_star,
                    )?;
                    Exploration::Rounds(clamp("exploration length", raw))
                }
                ExplorationMode::Clt => Exploration::ConfidenceTest,
            }),
            PolicyKind::DpOracle => Detail::Dp(Arc::new(dp_solve(instance, horizon, budget)?)),
            _ => Detail::Plain,
        };
        Ok(PreparedPolicy {
            kind: *self,
            instance: instance.clone(),
            horizon,
            budget,
            detail,
            notes,
        })
    }
}

fn plan_ratio(horizon: u64, budget: u64) -> Result<Ratio> {
    if horizon == 0 {
        Ok(Ratio::zero())
    } else {
        budget_ratio(budget, horizon)
    }
}

#[derive(Debug, Clone)]
enum Detail {
    Plain,
    Truncation(Truncation),
    Exploration(Exploration),
    Dp(Arc<ValueTable<f64>>),
}

/// A policy ready to be instantiated once per episode.
#[derive(Debug, Clone)]
pub struct PreparedPolicy {
    kind: PolicyKind,
    instance: ProblemInstance,
    horizon: u64,
    budget: u64,
    detail: Detail,
    notes: Vec<String>,
}

impl PreparedPolicy {
    pub fn kind(&self) -> PolicyKind {
        self.kind
    }

    /// Notes produced while preparing, e.g. clamped lengths.
    pub fn notes(&self) -> &[String] {
        &self.notes
    }

    pub fn instantiate(&self) -> Result<Box<dyn Policy>> {
        let inst = &self.instance;
        let (nj, nk) = (inst.num_contexts(), inst.num_actions());
        let label = self.kind.label();
        let known = || ContextModel::Known {
            weights: inst.contexts().weights().to_vec(),
            total: inst.contexts().total(),
        };
        let oracle = || OracleIndex::new(nk, inst.rewards().to_vec());
        let ucb = || UcbEstimator::new(nj, nk, IndexMode::Ucb);
        let path = if inst.is_unit_cost() { LpPath::Unit } else { LpPath::Het };
        let fixed = RatioMode::Fixed(plan_ratio(self.horizon, self.budget)?);
        let (t, b) = (self.horizon, self.budget);
        let policy: Box<dyn Policy> = match (&self.kind, &self.detail) {
            (PolicyKind::Alp, _) => Box::new(LpPolicy::new(label, inst, t, b, oracle(), known(), RatioMode::Adaptive, path, true)),
            (PolicyKind::Flp, _) => Box::new(LpPolicy::new(label, inst, t, b, oracle(), known(), fixed, path, true)),
            (PolicyKind::Ealp, _) => Box::new(LpPolicy::new(
                label,
                inst,
                t,
                b,
                oracle(),
                ContextModel::empirical(nj, Truncation::Never),
                RatioMode::Adaptive,
                path,
                true,
            )),
            (PolicyKind::Ealp2 { .. }, Detail::Truncation(tr)) => Box::new(LpPolicy::new(
                label,
                inst,
                t,
                b,
                oracle(),
                ContextModel::empirical(nj, *tr),
                RatioMode::Adaptive,
                path,
                true,
            )),
            (PolicyKind::UcbAlp { .. }, _) => Box::new(LpPolicy::new(label, inst, t, b, ucb(), known(), RatioMode::Adaptive, path, false)),
            (PolicyKind::UcbFlp { .. }, _) => Box::new(LpPolicy::new(label, inst, t, b, ucb(), known(), fixed, path, false)),
            (PolicyKind::UcbEalp { .. }, _) => Box::new(LpPolicy::new(
                label,
                inst,
                t,
                b,
                ucb(),
                ContextModel::empirical(nj, Truncation::Never),
                RatioMode::Adaptive,
                path,
                false,
            )),
            (PolicyKind::Pb, _) => Box::new(PbPolicy::new(label, nk, oracle())),
            (PolicyKind::UcbPb, _) => Box::new(PbPolicy::new(label, nk, ucb())),
            (PolicyKind::EpsFirstAlp { .. }, Detail::Exploration(exploration)) => {
                let stats = UcbEstimator::new(nj, nk, IndexMode::Mean);
                let exploit = LpPolicy::new(label.clone(), inst, t, b, stats.clone(), known(), RatioMode::Adaptive, LpPath::Het, true);
                Box::new(EpsFirstPolicy::new(label, inst, t, *exploration, stats, exploit))
            }
            (PolicyKind::DpOracle, Detail::Dp(table)) => Box::new(DpPolicy::new(table.clone())),
            (kind, _) => return Err(Error::Internal(format!("{} prepared without its parameters", kind.label()))),
        };
        Ok(policy)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{ContextDist, RewardFamily};
    use rand::SeedableRng;

    fn two_context() -> ProblemInstance {
        let base = [1.0 / 3.0, 2.0 / 3.0, 1.0];
        ProblemInstance::unit_cost(
            ContextDist::from_probs(&[0.4, 0.6]).unwrap(),
            vec![base.map(|x| 0.8 * x).to_vec(), base.map(|x| 0.4 * x).to_vec()],
            RewardFamily::Bernoulli,
        )
        .unwrap()
    }

    fn view(inst: &ProblemInstance, t: u64, context: usize, tau: u64, b: u64) -> RoundView<'_> {
        RoundView {
            t,
            context,
            remaining_time: tau,
            remaining_budget: b,
            horizon: 100,
            budget: 39,
            instance: inst,
        }
    }

    fn rng() -> PolicyRng {
        PolicyRng::seed_from_u64(1)
    }

    #[test]
    fn alp_take_probabilities() {
        let inst = two_context();
        let mut p = PolicyKind::Alp.prepare(&inst, 100, 39).unwrap().instantiate().unwrap();
        let d = p.decide(&view(&inst, 1, 0, 100, 39), &mut rng()).unwrap();
        assert_eq!((d.take_prob, d.threshold), (Some(0.975), Some(0)));
        let d = p.decide(&view(&inst, 2, 1, 100, 39), &mut rng()).unwrap();
        assert_eq!((d.action, d.take_prob), (Action::Skip, Some(0.0)));
        let d = p.decide(&view(&inst, 3, 1, 10, 12), &mut rng()).unwrap();
        assert_eq!((d.action, d.take_prob), (Action::Arm(2), Some(1.0)));
        let d = p.decide(&view(&inst, 4, 0, 10, 0), &mut rng()).unwrap();
        assert_eq!(d.action, Action::Skip);
    }

    #[test]
    fn flp_keeps_the_initial_ratio() {
        let inst = two_context();
        let mut p = PolicyKind::Flp.prepare(&inst, 100, 39).unwrap().instantiate().unwrap();
        // b / tau = 1 would serve everything; FLP still plans with 0.39.
        let d = p.decide(&view(&inst, 90, 0, 10, 10), &mut rng()).unwrap();
        assert_eq!(d.take_prob, Some(0.975));
        let d = p.decide(&view(&inst, 91, 0, 9, 0), &mut rng()).unwrap();
        assert_eq!(d.action, Action::Skip);
        let mut p = PolicyKind::Flp.prepare(&inst, 100, 100).unwrap().instantiate().unwrap();
        assert_eq!(p.decide(&view(&inst, 1, 1, 100, 100), &mut rng()).unwrap().action, Action::Arm(2));
    }

    #[test]
    fn pb_rule() {
        let inst = two_context();
        let mut p = PolicyKind::Pb.prepare(&inst, 5, 3).unwrap().instantiate().unwrap();
        assert_eq!(p.decide(&view(&inst, 1, 0, 5, 1), &mut rng()).unwrap().action, Action::Arm(2));
        assert_eq!(p.decide(&view(&inst, 1, 1, 5, 3), &mut rng()).unwrap().action, Action::Skip);
        assert_eq!(p.decide(&view(&inst, 1, 1, 5, 5), &mut rng()).unwrap().action, Action::Arm(2));
    }

    #[test]
    fn ucb_pb_rule() {
        let inst = two_context();
        let mut p = PolicyKind::UcbPb.prepare(&inst, 5, 3).unwrap().instantiate().unwrap();
        // All indices are one at the start: context 1 wins the tie.
        assert_eq!(p.decide(&view(&inst, 1, 1, 5, 5), &mut rng()).unwrap().action, Action::Arm(0));
        assert_eq!(p.decide(&view(&inst, 1, 1, 5, 3), &mut rng()).unwrap().action, Action::Skip);
        assert_eq!(p.decide(&view(&inst, 1, 0, 5, 3), &mut rng()).unwrap().action, Action::Arm(0));
    }

    #[test]
    fn ucb_alp_first_round() {
        // Every index is one: rank by context index, best action 1 everywhere.
        let inst = two_context();
        let mut p = PolicyKind::UcbAlp { normalized: false }.prepare(&inst, 100, 39).unwrap().instantiate().unwrap();
        let d = p.decide(&view(&inst, 1, 0, 100, 39), &mut rng()).unwrap();
        assert_eq!((d.take_prob, d.threshold), (Some(0.975), Some(0)));
        let d = p.decide(&view(&inst, 1, 1, 100, 39), &mut rng()).unwrap();
        assert_eq!(d.take_prob, Some(0.0));
        let d = p.decide(&view(&inst, 1, 1, 100, 0), &mut rng()).unwrap();
        assert_eq!(d.action, Action::Skip);
    }

    #[test]
    fn compatibility_checks() {
        let three = ProblemInstance::unit_cost(ContextDist::uniform(3).unwrap(), vec![vec![0.1]; 3], RewardFamily::Bernoulli).unwrap();
        let err = PolicyKind::Pb.check(&three).unwrap_err().to_string();
        assert!(err.contains("J = 2"), "{err}");
        let het = ProblemInstance::new(
            ContextDist::uniform(2).unwrap(),
            vec![vec![0.1, 0.2], vec![0.3, 0.4]],
            vec![vec![1, 2], vec![2, 2]],
            RewardFamily::Bernoulli,
        )
        .unwrap();
        assert!(PolicyKind::UcbAlp { normalized: false }.check(&het).is_err());
        assert!(PolicyKind::UcbAlp { normalized: true }.check(&het).is_err());
        assert!(PolicyKind::DpOracle.check(&het).is_err());
        assert!(PolicyKind::Alp.check(&het).is_ok());
        assert!(PolicyKind::EpsFirstAlp { exploration: ExplorationMode::Clt }.check(&het).is_ok());
    }

    #[test]
    fn t1_is_clamped_with_a_note() {
        let inst = two_context();
        let p = PolicyKind::Ealp2 { t1: T1Mode::Delta { delta: 0.01 } }.prepare(&inst, 1000, 390).unwrap();
        assert!(p.notes().iter().any(|n| n.contains("clamped")));
        let p = PolicyKind::Ealp2 { t1: T1Mode::Oracle }.prepare(&inst, 1000, 400).unwrap();
        assert!(!p.notes().is_empty());
    }

    #[test]
    fn sample_row_uses_residual_as_dummy() {
        assert_eq!(sample_row(&[0.5, 0.5], 0.2), Action::Arm(0));
        assert_eq!(sample_row(&[0.5, 0.5], 0.7), Action::Arm(1));
        assert_eq!(sample_row(&[0.0, 0.3], 0.2), Action::Arm(1));
        assert_eq!(sample_row(&[0.0, 0.3], 0.3), Action::Skip);
    }
}

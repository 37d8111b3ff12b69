//! Running a single episode.

use rand::Rng;

use crate::clock::{BudgetClock, EpisodeTrace, RoundRecord};
use crate::error::{Error, Result};
use crate::instance::{Action, ProblemInstance};
use crate::policy::{Policy, RoundView};
use crate::rng::RunStreams;

/// Totals of one episode.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EpisodeSummary {
    pub total_reward: f64,
    pub total_expected_reward: f64,
    pub total_cost: u64,
}

/// Runs exactly `horizon` rounds, calling `on_round` after each.
///
/// Every round consumes one context draw and one reward draw whatever the
/// policy does, so policies compared on the same streams face the same
/// arrivals and the same reward realizations.
pub fn run_episode_with(
    instance: &ProblemInstance,
    policy: &mut dyn Policy,
    horizon: u64,
    budget: u64,
    streams: &mut RunStreams,
    mut on_round: impl FnMut(&RoundRecord),
) -> Result<EpisodeSummary> {
    let mut clock = BudgetClock::new(horizon, budget);
    let mut summary = EpisodeSummary::default();
    for t in 1..=horizon {
        let context = instance.sample_context(&mut streams.contexts);
        let uniform: f64 = streams.rewards.random();
        let view = RoundView {
            t,
            context,
            remaining_time: clock.remaining_time(),
            remaining_budget: clock.remaining_budget(),
            horizon,
            budget,
            instance,
        };
        let decision = policy.decide(&view, &mut streams.policy)?;
        let cost = clock.apply_action(instance, context, decision.action).map_err(|e| match e {
            Error::ContractViolation(msg) => Error::ContractViolation(format!("policy {}: {msg}", policy.name())),
            other => other,
        })?;
        let (reward, expected) = match decision.action {
            Action::Skip => (0.0, 0.0),
            Action::Arm(k) => (instance.reward_from_uniform(context, k, uniform), instance.reward(context, k)),
        };
        policy.observe(context, decision.action, reward);
        summary.total_reward += reward;
        summary.total_expected_reward += expected;
        summary.total_cost += cost;
        on_round(&RoundRecord {
            t,
            context,
            action: decision.action,
            reward,
            expected_reward: expected,
            cost,
            remaining_budget: clock.remaining_budget(),
        });
    }
    Ok(summary)
}

/// Runs one episode and keeps the full trace.
pub fn run_episode(
    instance: &ProblemInstance,
    policy: &mut dyn Policy,
    horizon: u64,
    budget: u64,
    streams: &mut RunStreams,
) -> Result<EpisodeTrace> {
    let mut rounds = Vec::with_capacity(horizon as usize);
    run_episode_with(instance, policy, horizon, budget, streams, |r| rounds.push(*r))?;
    Ok(EpisodeTrace { horizon, budget, rounds })
}

//! Procrastinate-for-the-better for two unit-cost contexts: spend on the
//! better context, and on the other only when the budget covers every
//! remaining round.

use super::ucb::IndexSource;
use super::{Decision, Policy, RoundView};
use crate::error::Result;
use crate::instance::{argmax_first, Action};
use crate::rng::PolicyRng;

pub struct PbPolicy<S: IndexSource> {
    name: String,
    source: S,
    num_actions: usize,
}

impl<S: IndexSource> PbPolicy<S> {
    pub fn new(name: impl Into<String>, num_actions: usize, source: S) -> Self {
        Self {
            name: name.into(),
            source,
            num_actions,
        }
    }

    fn best(&self, j: usize, t: u64) -> (usize, f64) {
        let row: Vec<f64> = (0..self.num_actions).map(|k| self.source.index(j, k, t)).collect();
        let k = argmax_first(&row);
        (k, row[k])
    }
}

impl<S: IndexSource> Policy for PbPolicy<S> {
    fn name(&self) -> &str {
        &self.name
    }

    fn decide(&mut self, view: &RoundView<'_>, _rng: &mut PolicyRng) -> Result<Decision> {
        let (b, tau) = (view.remaining_budget, view.remaining_time);
        if b == 0 {
            return Ok(Decision::skip());
        }
        let (k_here, v_here) = self.best(view.context, view.t);
        let (_, v_other) = self.best(1 - view.context, view.t);
        // Ties go to the lower context index.
        let better = v_here > v_other || (v_here == v_other && view.context == 0);
        let take = b >= tau || better;
        Ok(Decision {
            action: if take { Action::Arm(k_here) } else { Action::Skip },
            take_prob: Some(if take { 1.0 } else { 0.0 }),
            threshold: None,
        })
    }

    fn observe(&mut self, context: usize, action: Action, reward: f64) {
        if let Action::Arm(k) = action {
            self.source.observe(context, k, reward);
        }
    }
}

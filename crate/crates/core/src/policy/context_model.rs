//! Known or empirical context distributions, with the truncation rules used
//! by the two-phase empirical policy.

use serde::{Deserialize, Serialize};

use crate::lp::unit_threshold_f64;

/// `ceil(16 J^2 ln^3 T / delta^2)`, before any clamping to the horizon.
/// Values within `1e-12` relative of an integer are not rounded up, so that
/// `T = e^10` yields the intended integer rather than one more.
pub fn ealp2_t1(horizon: f64, num_contexts: usize, delta: f64) -> u64 {
    if delta <= 0.0 {
        return u64::MAX;
    }
    let ln_t = horizon.ln().max(0.0);
    let raw = 16.0 * (num_contexts * num_contexts) as f64 * ln_t.powi(3) / (delta * delta);
    ceil_tolerant(raw)
}

pub(crate) fn ceil_tolerant(x: f64) -> u64 {
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-12 * nearest.abs().max(1.0) {
        nearest as u64
    } else {
        x.ceil() as u64
    }
}

/// True when the horizon is too short for the truncation guarantee,
/// `ln^3 T / T > delta^3 / (64 J^2)`.
pub fn ealp2_horizon_too_short(horizon: u64, num_contexts: usize, delta: f64) -> bool {
    let t = horizon as f64;
    t.ln().powi(3) / t > delta.powi(3) / (64.0 * (num_contexts * num_contexts) as f64)
}

/// Outcome of the data-driven margin estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaLcb {
    /// Half of the estimated margin.
    pub delta: f64,
    pub stop: bool,
}

/// Lower confidence estimate of the boundary margin from the empirical
/// cumulative masses `q_hat_1..q_hat_J` after `t` observations.
pub fn delta_lcb(q_hat: &[f64], rho: f64, t: u64, horizon: u64) -> DeltaLcb {
    let j_tilde = unit_threshold_f64(q_hat, rho);
    let lower = if j_tilde == 0 { 0.0 } else { q_hat[j_tilde - 1] };
    let delta_hat = match q_hat.get(j_tilde) {
        Some(&upper) => (upper - rho).min(rho - lower),
        None => f64::INFINITY,
    };
    let delta = (delta_hat / 2.0).max(0.0);
    if delta == 0.0 {
        return DeltaLcb { delta, stop: false };
    }
    let big_t = horizon as f64;
    let j = q_hat.len() as f64;
    let tail_ok = (-2.0 * delta * delta * t as f64).exp() <= 1.0 / (big_t * big_t);
    let length_ok = t as f64 >= 16.0 * j * j * big_t.ln().max(0.0).powi(3) / (delta * delta);
    DeltaLcb {
        delta,
        stop: tail_ok && length_ok,
    }
}

/// When an empirical distribution stops updating.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Truncation {
    Never,
    /// Freeze after this many rounds.
    After(u64),
    /// Freeze once the margin estimate fires.
    Adaptive,
}

/// The context distribution a policy plans with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ContextModel {
    Known { weights: Vec<u64>, total: u64 },
    Empirical {
        counts: Vec<u64>,
        seen: u64,
        truncation: Truncation,
        frozen_at: Option<u64>,
    },
}

impl ContextModel {
    pub fn empirical(num_contexts: usize, truncation: Truncation) -> Self {
        ContextModel::Empirical {
            counts: vec![0; num_contexts],
            seen: 0,
            truncation,
            frozen_at: None,
        }
    }

    pub fn is_frozen(&self) -> bool {
        matches!(self, ContextModel::Empirical { frozen_at: Some(_), .. })
    }

    /// Adds the round-`t` context unless the estimate is frozen.
    /// `margin` is consulted only under adaptive truncation; it receives the
    /// updated weights and the observation count and answers whether to freeze.
    pub fn observe(&mut self, t: u64, j: usize, margin: impl FnOnce(&[u64], u64) -> bool) {
        if let ContextModel::Empirical {
            counts,
            seen,
            truncation,
            frozen_at,
        } = self
        {
            if frozen_at.is_some() {
                return;
            }
            counts[j] += 1;
            *seen += 1;
            let freeze = match *truncation {
                Truncation::Never => false,
                Truncation::After(t1) => t >= t1,
                Truncation::Adaptive => margin(counts, *seen),
            };
            if freeze {
                *frozen_at = Some(t);
            }
        }
    }

    /// Current weights and their total; the total is zero before any observation.
    pub fn weights(&self) -> (&[u64], u64) {
        match self {
            ContextModel::Known { weights, total } => (weights, *total),
            ContextModel::Empirical { counts, seen, .. } => (counts, *seen),
        }
    }

    pub fn frozen_at(&self) -> Option<u64> {
        match self {
            ContextModel::Empirical { frozen_at, .. } => *frozen_at,
            ContextModel::Known { .. } => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t1_examples() {
        let t = 10f64.exp();
        assert_eq!(ealp2_t1(t, 2, 0.01), 640_000_000);
        assert_eq!(ealp2_t1(t, 2, 0.4), 400_000);
        assert_eq!(ealp2_t1(t, 2, 0.0), u64::MAX);
        assert!(ealp2_horizon_too_short(22_026, 2, 0.01));
    }

    #[test]
    fn delta_lcb_examples() {
        let d = delta_lcb(&[0.4, 1.0], 0.41, 10, 100);
        assert!((d.delta - 0.005).abs() < 1e-12);
        let d = delta_lcb(&[0.3, 1.0], 0.5, 10, 100);
        assert!((d.delta - 0.1).abs() < 1e-12);
        assert!(!d.stop);
        let d = delta_lcb(&[0.4, 1.0], 0.4, 1_000_000, 100);
        assert_eq!((d.delta, d.stop), (0.0, false));
        // delta = 0.1, T = 100: needs t >= 16 * 4 * ln^3(100) / 0.01 and exp(-0.02 t) <= 1e-4.
        let need = (16.0 * 4.0 * 100f64.ln().powi(3) / (0.1 * 0.1)).ceil() as u64;
        assert!(!delta_lcb(&[0.3, 1.0], 0.5, need - 1, 100).stop);
        assert!(delta_lcb(&[0.3, 1.0], 0.5, need, 100).stop);
    }

    #[test]
    fn empirical_counts() {
        let mut m = ContextModel::empirical(2, Truncation::Never);
        for (t, j) in [(1, 0), (2, 0), (3, 1)] {
            m.observe(t, j, |_, _| false);
        }
        assert_eq!(m.weights(), (&[2u64, 1][..], 3));

        let mut m = ContextModel::empirical(2, Truncation::After(2));
        for (t, j) in [(1, 0), (2, 1), (3, 1), (4, 1)] {
            m.observe(t, j, |_, _| false);
        }
        assert_eq!(m.weights(), (&[1u64, 1][..], 2));
        assert_eq!(m.frozen_at(), Some(2));
    }
}

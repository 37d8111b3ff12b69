//! Constrained contextual bandits with a hard budget.
//!
//! The crate covers the environment (contexts, rewards, costs, budget
//! accounting), closed-form LP solutions for unit and heterogeneous costs,
//! the decision policies built on them, an exact dynamic-programming oracle
//! for small unit-cost instances, and a deterministic Monte-Carlo harness.

pub mod clock;
pub mod dp;
pub mod error;
pub mod gaps;
pub mod instance;
pub mod lp;
pub mod policy;
pub mod rng;
pub mod sim;

pub use clock::{BudgetClock, EpisodeTrace, RoundRecord};
pub use error::{Error, Result};
pub use gaps::GapTable;
pub use instance::{Action, ContextDist, ProblemInstance, RewardFamily};
pub use policy::{Decision, Policy, PolicyKind, PreparedPolicy, RoundView};

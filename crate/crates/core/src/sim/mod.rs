//! Episode execution, Monte-Carlo regret, budget statistics and bounds.

pub mod bounds;
pub mod budget;
pub mod episode;
pub mod growth;
pub mod regret;

pub use bounds::{bound_alp, bound_ucb_alp, theta_a, BoundReport, Classification};
pub use budget::{
    budget_stats, budget_stats_from_traces, hypergeometric_mean, hypergeometric_variance, sample_remaining_budget, BudgetStats,
    TailCheck,
};
pub use episode::{run_episode, run_episode_with, EpisodeSummary};
pub use growth::{fit_against, linear_trend_test, logarithmic_growth_check, CurvePoint, Fit, GrowthDiagnostics, SlopeTest, Z95};
pub use regret::{
    benchmark_value, estimate_point, estimate_regret, geometric_grid, mean_sd, parallel_runs, run_totals, scaled_budget, Benchmark,
    MonteCarloConfig, RegretPoint, RegretReport, RewardAccounting, MIN_RUNS_FOR_CI,
};

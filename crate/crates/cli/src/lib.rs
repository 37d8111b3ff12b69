//! Experiment configuration and runner.

pub mod config;
pub mod error;
pub mod output;
pub mod presets;
pub mod runner;

pub use config::{budget_for, ExperimentConfig, OutputFormat};
pub use error::CliError;
pub use output::{read_csv, write_csv, ResultRow, Results, CSV_HEADER};
pub use runner::{run_config, write_results, Overrides};

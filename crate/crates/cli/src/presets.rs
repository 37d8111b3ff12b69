//! Configurations shipped with the binary.

use std::path::Path;

use crate::config::ExperimentConfig;
use crate::error::CliError;

pub struct Preset {
    pub name: &'static str,
    pub summary: &'static str,
    pub text: &'static str,
}

pub const PRESETS: &[Preset] = &[
    Preset {
        name: "appendixF-two-context",
        summary: "J = 2, K = 3, pi = (0.4, 0.6); rho in {0.39, 0.4, 0.41}",
        text: include_str!("../presets/appendixF-two-context.toml"),
    },
    Preset {
        name: "appendixF-multi-context",
        summary: "J = 10, K = 5, u = jk/(JK); rho in {0.49, 0.5, 0.51}",
        text: include_str!("../presets/appendixF-multi-context.toml"),
    },
    Preset {
        name: "tiny-dp",
        summary: "J = 2, K = 2, short horizons against the exact dynamic program",
        text: include_str!("../presets/tiny-dp.toml"),
    },
];

pub fn preset(name: &str) -> Option<&'static Preset> {
    PRESETS.iter().find(|p| p.name == name)
}

/// Loads `arg` as a file if one exists there, else as a preset name.
pub fn resolve(arg: &str) -> Result<ExperimentConfig, CliError> {
    let path = Path::new(arg);
    if path.exists() {
        return ExperimentConfig::load(path);
    }
    match preset(arg) {
        Some(p) => ExperimentConfig::parse(p.text).map_err(|e| CliError::Config(format!("preset {}: {e}", p.name))),
        None => Err(CliError::Config(format!("{arg}: no such file or preset"))),
    }
}

pub fn list() -> String {
    PRESETS.iter().map(|p| format!("{:<26}{}\n", p.name, p.summary)).collect()
}

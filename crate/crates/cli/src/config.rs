//! Experiment configuration files.

use std::path::{Path, PathBuf};

use ccb_core::dp::check_dp_size;
use ccb_core::lp::Ratio;
use ccb_core::sim::{Benchmark, RewardAccounting};
use ccb_core::{ContextDist, PolicyKind, ProblemInstance, RewardFamily};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// The only computed reward expression accepted: `u_{j,k} = j k / (J K)`.
pub const PRODUCT_GENERATOR: &str = "jk/(JK)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RewardSpec {
    Matrix(Vec<Vec<f64>>),
    Generator(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CostSpec {
    Matrix(Vec<Vec<u64>>),
    Keyword(String),
}

impl Default for CostSpec {
    fn default() -> Self {
        CostSpec::Keyword("unit".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    /// Context probabilities `pi`.
    pub probs: Vec<f64>,
    /// Expected-reward matrix, or the product generator.
    pub rewards: RewardSpec,
    /// Number of actions; required with the generator.
    #[serde(default)]
    pub actions: Option<usize>,
    #[serde(default)]
    pub costs: CostSpec,
    #[serde(default)]
    pub family: RewardFamily,
}

fn default_runs() -> u64 {
    100
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub instance: InstanceSpec,
    /// Budget ratios; each horizon `T` gets `B = floor(rho T)`.
    pub rho: Vec<f64>,
    pub horizons: Vec<u64>,
    pub policies: Vec<PolicyKind>,
    #[serde(default = "default_runs")]
    pub runs: u64,
    #[serde(default)]
    pub seed: u64,
    /// Extra horizons run once per `(policy, rho)` as a regret curve.
    #[serde(default)]
    pub checkpoints: Vec<u64>,
    #[serde(default)]
    pub benchmark: Benchmark,
    #[serde(default)]
    pub accounting: RewardAccounting,
    /// Also emit bound rows for every `rho`.
    #[serde(default)]
    pub bounds: bool,
    #[serde(default)]
    pub threads: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

fn field(path: &str, msg: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("{path}: {msg}"))
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn build_instance(&self) -> Result<ProblemInstance, CliError> {
        let spec = &self.instance;
        let contexts = ContextDist::from_probs(&spec.probs).map_err(|e| field("instance.probs", e))?;
        let nj = spec.probs.len();
        let rewards = match &spec.rewards {
            RewardSpec::Matrix(m) => {
                if spec.actions.is_some_and(|k| m.first().is_some_and(|row| row.len() != k)) {
                    return Err(field("instance.actions", "disagrees with the reward matrix"));
                }
                m.clone()
            }
            RewardSpec::Generator(g) => {
                let compact: String = g.chars().filter(|c| !c.is_whitespace()).collect();
                if compact != PRODUCT_GENERATOR {
                    return Err(field("instance.rewards", format!("unknown generator {g:?}; expected \"{PRODUCT_GENERATOR}\"")));
                }
                let nk = spec.actions.ok_or_else(|| field("instance.actions", "required with the reward generator"))?;
                let denom = (nj * nk) as f64;
                (1..=nj).map(|j| (1..=nk).map(|k| (j * k) as f64 / denom).collect()).collect()
            }
        };
        let instance = match &spec.costs {
            CostSpec::Keyword(k) if k == "unit" => ProblemInstance::unit_cost(contexts, rewards, spec.family),
            CostSpec::Keyword(k) => return Err(field("instance.costs", format!("unknown keyword {k:?}; expected \"unit\" or a matrix"))),
            CostSpec::Matrix(c) => ProblemInstance::new(contexts, rewards, c.clone(), spec.family),
        };
        instance.map_err(|e| field("instance", e))
    }

    /// Full compatibility check without running anything.
    pub fn validate(&self) -> Result<ProblemInstance, CliError> {
        let instance = self.build_instance()?;
        if self.policies.is_empty() {
            return Err(field("policies", "at least one policy is required"));
        }
        if self.rho.is_empty() {
            return Err(field("rho", "at least one budget ratio is required"));
        }
        if self.horizons.is_empty() {
            return Err(field("horizons", "at least one horizon is required"));
        }
        if self.runs < 2 {
            return Err(field("runs", "at least 2 runs are required"));
        }
        if self.threads == Some(0) {
            return Err(field("threads", "must be positive"));
        }
        for (i, &r) in self.rho.iter().enumerate() {
            if !(r.is_finite() && r >= 0.0) {
                return Err(field(&format!("rho[{i}]"), format!("{r} is not a non-negative number")));
            }
        }
        for (i, &t) in self.horizons.iter().enumerate() {
            if t == 0 {
                return Err(field(&format!("horizons[{i}]"), "horizon must be positive"));
            }
        }
        if self.checkpoints.iter().any(|&t| t == 0) || self.checkpoints.windows(2).any(|w| w[1] <= w[0]) {
            return Err(field("checkpoints", "must be positive and strictly increasing"));
        }
        if self.benchmark == Benchmark::Dp && !instance.is_unit_cost() {
            return Err(field("benchmark", "the dp benchmark needs unit costs"));
        }
        let horizons: Vec<u64> = self.horizons.iter().chain(&self.checkpoints).copied().collect();
        for &rho in &self.rho {
            for &t in &horizons {
                let b = budget_for(rho, t);
                if self.benchmark == Benchmark::Dp {
                    check_dp_size(t, b).map_err(|e| field("benchmark", e))?;
                }
                for (i, kind) in self.policies.iter().enumerate() {
                    let path = format!("policies[{i}]");
                    match kind {
                        PolicyKind::DpOracle => {
                            kind.check(&instance).map_err(|e| field(&path, e))?;
                            check_dp_size(t, b).map_err(|e| field(&path, e))?;
                        }
                        _ => {
                            kind.prepare(&instance, t, b).map_err(|e| field(&path, e))?;
                        }
                    }
                }
            }
        }
        Ok(instance)
    }
}

/// `rho` as the exact ratio of its shortest round-trip decimal, so that
/// `0.29` means 29/100 rather than the nearest double.
pub fn decimal_ratio(rho: f64) -> Option<Ratio> {
    if !(rho.is_finite() && rho >= 0.0) {
        return None;
    }
    let text = format!("{rho}");
    let (int, frac) = text.split_once('.').unwrap_or((&text, ""));
    let num: u128 = format!("{int}{frac}").parse().ok()?;
    let den = 10u128.checked_pow(frac.len() as u32)?;
    Ratio::new(num, den).ok()
}

/// `B = floor(rho T)` with `rho` read as a decimal.
pub fn budget_for(rho: f64, horizon: u64) -> u64 {
    match decimal_ratio(rho).and_then(|r| r.num.checked_mul(horizon as u128).map(|p| p / r.den)) {
        Some(b) => b.min(u64::MAX as u128) as u64,
        None => (rho * horizon as f64).floor() as u64,
    }
}

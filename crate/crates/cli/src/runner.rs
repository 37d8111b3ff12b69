//! Running a validated configuration and writing its tables.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use ccb_core::sim::{bound_ucb_alp, estimate_point, MonteCarloConfig, RegretPoint};
use ccb_core::PolicyKind;

use crate::config::{budget_for, decimal_ratio, ExperimentConfig, OutputFormat};
use crate::error::CliError;
use crate::output::{write_bounds_csv, write_csv, write_json, BoundRow, ResultRow, Results};

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub runs: Option<u64>,
    pub threads: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: Option<OutputFormat>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(r) = self.runs {
            cfg.runs = r;
        }
        if let Some(t) = self.threads {
            cfg.threads = Some(t);
        }
        if let Some(o) = &self.out {
            cfg.output = Some(o.clone());
        }
        if let Some(f) = self.format {
            cfg.format = f;
        }
    }
}

fn row(kind: &PolicyKind, rho: f64, seed: u64, checkpoint: u32, p: &RegretPoint) -> ResultRow {
    ResultRow {
        policy: kind.label(),
        horizon: p.horizon,
        budget: p.budget,
        rho,
        runs: p.runs,
        mean_reward: p.mean_reward,
        benchmark: p.benchmark,
        regret_mean: p.regret_mean,
        regret_ci95: p.regret_ci95,
        seed,
        checkpoint,
    }
}

/// Validates and runs every `(policy, rho, T)` combination, then the
/// checkpoint curve of every `(policy, rho)`.
pub fn run_config(cfg: &ExperimentConfig) -> Result<Results, CliError> {
    let instance = cfg.validate()?;
    let mc = MonteCarloConfig {
        runs: cfg.runs,
        master_seed: cfg.seed,
        threads: cfg.threads,
        benchmark: cfg.benchmark,
        accounting: cfg.accounting,
    };
    let mut results = Results {
        name: cfg.name.clone(),
        ..Results::default()
    };
    let mut note = |label: String, rho: f64, t: u64, notes: Vec<String>| {
        for n in notes {
            let line = format!("{label} rho={rho} T={t}: {n}");
            if !results.notes.contains(&line) {
                results.notes.push(line);
            }
        }
    };
    let mut rows = Vec::new();
    for kind in &cfg.policies {
        for &rho in &cfg.rho {
            let horizons = cfg.horizons.iter().map(|&t| (t, 0u32));
            let curve = cfg.checkpoints.iter().enumerate().map(|(i, &t)| (t, i as u32 + 1));
            for (t, checkpoint) in horizons.chain(curve) {
                let (point, notes) = estimate_point(&instance, kind, t, budget_for(rho, t), &mc)?;
                note(kind.label(), rho, t, notes);
                rows.push(row(kind, rho, cfg.seed, checkpoint, &point));
            }
        }
    }
    results.rows = rows;
    if cfg.runs < ccb_core::sim::MIN_RUNS_FOR_CI {
        results
            .notes
            .push(format!("runs = {} is below {}; confidence intervals omitted", cfg.runs, ccb_core::sim::MIN_RUNS_FOR_CI));
    }
    if cfg.bounds {
        if instance.is_unit_cost() {
            for &rho in &cfg.rho {
                let ratio = decimal_ratio(rho).ok_or_else(|| CliError::Config(format!("rho = {rho} is not representable")))?;
                results.bounds.push(BoundRow::from(&bound_ucb_alp(&instance, ratio)?));
            }
        } else {
            results.notes.push("bounds are defined for unit-cost instances only; none written".into());
        }
    }
    Ok(results)
}

/// Path of the bound table next to the regret table.
pub fn bounds_path(out: &Path) -> PathBuf {
    let stem = out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    out.with_file_name(format!("{stem}.bounds.csv"))
}

/// Writes results to the configured path, or to `stdout` when there is none.
pub fn write_results(cfg: &ExperimentConfig, results: &Results, stdout: &mut dyn Write) -> Result<(), CliError> {
    match (&cfg.output, cfg.format) {
        (Some(path), OutputFormat::Csv) => {
            write_csv(&results.rows, BufWriter::new(File::create(path)?))?;
            if !results.bounds.is_empty() {
                write_bounds_csv(&results.bounds, BufWriter::new(File::create(bounds_path(path))?))?;
            }
        }
        (Some(path), OutputFormat::Json) => {
            let mut w = BufWriter::new(File::create(path)?);
            write_json(results, &mut w)?;
            w.flush()?;
        }
        (None, OutputFormat::Csv) => write_csv(&results.rows, &mut *stdout)?,
        (None, OutputFormat::Json) => {
            write_json(results, &mut *stdout)?;
            writeln!(stdout)?;
        }
    }
    Ok(())
}

//! Result tables.

use std::io::Write;

use ccb_core::sim::{BoundReport, Classification};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

/// Column names of the regret table, in order.
pub const CSV_HEADER: [&str; 11] = [
    "policy",
    "T",
    "B",
    "rho",
    "runs",
    "mean_reward",
    "benchmark",
    "regret_mean",
    "regret_ci95",
    "seed",
    "checkpoint",
];

/// One regret estimate. `checkpoint` is 0 for a configured horizon and the
/// one-based position in the checkpoint grid otherwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub policy: String,
    #[serde(rename = "T")]
    pub horizon: u64,
    #[serde(rename = "B")]
    pub budget: u64,
    pub rho: f64,
    pub runs: u64,
    pub mean_reward: f64,
    pub benchmark: f64,
    pub regret_mean: f64,
    pub regret_ci95: Option<f64>,
    pub seed: u64,
    pub checkpoint: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub rho: f64,
    pub classification: Classification,
    pub threshold: usize,
    pub delta: Option<f64>,
    pub delta_prime: Option<f64>,
    pub theta_o: f64,
    pub constant: f64,
    pub theta_a: Option<f64>,
    pub theta_c_nb: Option<f64>,
}

impl From<&BoundReport> for BoundRow {
    fn from(b: &BoundReport) -> Self {
        Self {
            rho: b.rho,
            classification: b.classification,
            threshold: b.threshold,
            delta: b.delta,
            delta_prime: b.delta_prime,
            theta_o: b.theta_o,
            constant: b.constant,
            theta_a: b.theta_a,
            theta_c_nb: b.theta_c_nb,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Results {
    pub name: Option<String>,
    pub rows: Vec<ResultRow>,
    pub bounds: Vec<BoundRow>,
    pub notes: Vec<String>,
}

/// Seventeen significant digits, plain notation for moderate magnitudes.
pub fn fmt_f64(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.16e}", x.abs());
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..17).contains(&exp) {
        return format!("{x:.16e}");
    }
    let digits = mantissa.replace('.', "");
    let sign = if x < 0.0 { "-" } else { "" };
    if exp >= 0 {
        let (int, frac) = digits.split_at(exp as usize + 1);
        if frac.is_empty() {
            format!("{sign}{int}")
        } else {
            format!("{sign}{int}.{frac}")
        }
    } else {
        format!("{sign}0.{}{digits}", "0".repeat((-exp - 1) as usize))
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

pub fn write_csv(rows: &[ResultRow], out: impl Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.policy.clone(),
            r.horizon.to_string(),
            r.budget.to_string(),
            fmt_f64(r.rho),
            r.runs.to_string(),
            fmt_f64(r.mean_reward),
            fmt_f64(r.benchmark),
            fmt_f64(r.regret_mean),
            opt(r.regret_ci95),
            r.seed.to_string(),
            r.checkpoint.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_bounds_csv(rows: &[BoundRow], out: impl Write) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "rho",
        "classification",
        "threshold",
        "delta",
        "delta_prime",
        "theta_o",
        "constant",
        "theta_a",
        "theta_c_nb",
    ])
    .map_err(csv_err)?;
    for b in rows {
        let class = serde_json::to_value(b.classification).expect("plain enum");
        w.write_record([
            fmt_f64(b.rho),
            class.as_str().unwrap_or_default().to_string(),
            b.threshold.to_string(),
            opt(b.delta),
            opt(b.delta_prime),
            fmt_f64(b.theta_o),
            fmt_f64(b.constant),
            opt(b.theta_a),
            opt(b.theta_c_nb),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Parses a regret table written by [`write_csv`].
pub fn read_csv(input: impl std::io::Read) -> Result<Vec<ResultRow>, CliError> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers().map_err(csv_err)?.iter().map(String::from).collect();
    if header != CSV_HEADER {
        return Err(CliError::Config(format!("unexpected header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(csv_err)).collect()
}

pub fn write_json(results: &Results, out: impl Write) -> Result<(), CliError> {
    serde_json::to_writer_pretty(out, results).map_err(|e| CliError::Io(e.into()))
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Io(std::io::Error::other(e))
}

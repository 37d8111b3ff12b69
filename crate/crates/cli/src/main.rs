use std::path::PathBuf;
use std::process::ExitCode;

use ccb_cli::presets;
use ccb_cli::{run_config, write_results, CliError, OutputFormat, Overrides};
use clap::{Parser, Subcommand};

/// Budget-constrained contextual bandit experiments.
#[derive(Parser)]
#[command(name = "ccb", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Master seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte-Carlo runs per row.
    #[arg(long, global = true)]
    runs: Option<u64>,
    /// Worker threads.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration file or preset.
    Run { config: String },
    /// Check a configuration file or preset without running it.
    Validate { config: String },
    /// List the built-in presets, or print one.
    Presets { name: Option<String> },
}

fn execute(cli: Cli) -> Result<(), CliError> {
    let overrides = Overrides {
        seed: cli.seed,
        runs: cli.runs,
        threads: cli.threads,
        out: cli.out,
        format: cli.format,
    };
    match cli.command {
        Command::Presets { name: None } => print!("{}", presets::list()),
        Command::Presets { name: Some(name) } => {
            let p = presets::preset(&name).ok_or_else(|| CliError::Config(format!("no preset named {name}")))?;
            print!("{}", p.text);
        }
        Command::Validate { config } => {
            let mut cfg = presets::resolve(&config)?;
            overrides.apply(&mut cfg);
            cfg.validate()?;
            println!("ok");
        }
        Command::Run { config } => {
            let mut cfg = presets::resolve(&config)?;
            overrides.apply(&mut cfg);
            let results = run_config(&cfg)?;
            for note in &results.notes {
                eprintln!("note: {note}");
            }
            write_results(&cfg, &results, &mut std::io::stdout().lock())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

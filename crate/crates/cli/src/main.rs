//! `fwl`: generate data and run fidelity-weighted learning experiments.
//!
//! On failure the last line on stderr is `error: <Category>: <message>` and
//! the exit code is 1 (2 for malformed command lines).

mod commands;
mod settings;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use fwl_core::engine::Preset;
use fwl_core::{Error, Result};

use settings::{parse_seeds, parse_strategies, FileConfig, Overrides, Settings};

#[derive(Parser, Debug)]
#[command(name = "fwl", version, about = "Fidelity-weighted learning experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON config file; flags override its values.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "NAME")]
    preset: Option<String>,
    /// Strategy name, or a comma-separated list.
    #[arg(long, global = true, value_name = "NAME")]
    strategy: Option<String>,
    #[arg(long, global = true, value_name = "F")]
    beta: Option<f64>,
    /// `1..10`, `1,2,5` or a mix.
    #[arg(long, global = true, value_name = "LIST")]
    seeds: Option<String>,
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write weak, strong and test sets as CSV.
    GenData,
    /// Run strategies over seeds: one JSON report each plus an aggregate.
    Run {
        /// Also save trained students, teachers and soft sets.
        #[arg(long)]
        checkpoints: bool,
    },
    /// Every strategy over seeds.
    Grid,
    /// FWL across β values and toy regimes.
    SweepBeta,
    /// Metric against weak-data and strong-data fractions.
    BudgetCurve,
    /// FWL against FWL_s on growing fractions of the soft set.
    FwlVsFwls,
}

fn settings(cli: &Cli) -> Result<Settings> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let flags = Overrides {
        preset: cli.preset.as_deref().map(str::parse::<Preset>).transpose()?,
        strategies: cli.strategy.as_deref().map(parse_strategies).transpose()?,
        beta: cli.beta,
        seeds: cli.seeds.as_deref().map(parse_seeds).transpose()?,
        out: cli.out.clone(),
    };
    Ok(Settings::new(file, flags))
}

fn execute(cli: &Cli) -> Result<Vec<PathBuf>> {
    let s = settings(cli)?;
    let files = match cli.command {
        Command::GenData => commands::gen_data(&s),
        Command::Run { checkpoints } => commands::run(&s, checkpoints),
        Command::Grid => commands::grid(&s),
        Command::SweepBeta => commands::sweep_beta_cmd(&s),
        Command::BudgetCurve => commands::budget_curve_cmd(&s),
        Command::FwlVsFwls => commands::fwl_vs_fwls_cmd(&s),
    }?;
    let out = s.out_dir();
    Ok(files.into_iter().map(|f| out.join(f)).collect())
}

fn one_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help / --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ");
            eprintln!("error: Usage: {}", one_line(first));
            return ExitCode::from(2);
        }
    };
    match execute(&cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            report(&e);
            ExitCode::FAILURE
        }
    }
}

fn report(e: &Error) {
    eprintln!("error: {}: {}", e.category(), one_line(&e.to_string()));
}

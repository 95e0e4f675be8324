//! Batch front door: parse scenario files, dispatch to the calculus
//! operations, emit structured reports.
//!
//! Exit codes: 0 when every check passes, 1 when any check fails, 2 on
//! input errors (unparseable files, schema violations, missing paths).

mod dispatch;
mod report;
mod scenario;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use dispatch::{run_scenario, Overrides};
use report::{render_report_text, render_suite_text, Report, SuiteReport};
use scenario::ScenarioFile;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Parser)]
#[command(name = "aperture", version, about = "Fixed-point disclosure calculus, batch runner")]
struct Cli {
    /// Iteration fuel override for fixpoint computations.
    #[arg(long, global = true)]
    fuel: Option<usize>,
    /// Seed override for sampled checks.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Enumeration cap override.
    #[arg(long, global = true)]
    bound: Option<usize>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Allow gl scenarios to evaluate frames outside the GL class.
    #[arg(long, global = true)]
    raw_relation: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a single scenario file and print its report.
    Run { path: PathBuf },
    /// Run every scenario in a directory (sorted by filename) and print the
    /// aggregate report.
    Suite { directory: PathBuf },
    /// Run the mu/nu nesting comparison of a mucalc scenario's commute block.
    Experiment { path: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let overrides = Overrides {
        fuel: cli.fuel,
        seed: cli.seed,
        bound: cli.bound,
        raw_relation: cli.raw_relation,
    };
    match execute(&cli.command, &overrides, cli.format) {
        Ok(all_pass) => {
            if all_pass {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(error) => {
            eprintln!("error: {error:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(command: &Command, overrides: &Overrides, format: Format) -> Result<bool> {
    match command {
        Command::Run { path } => {
            // a scenario of kind `suite` delegates to the directory runner
            let scenario = ScenarioFile::load(path)?;
            if scenario.kind == "suite" {
                let section = scenario.suite.as_ref().unwrap();
                let base = path.parent().unwrap_or_else(|| Path::new("."));
                let suite = run_suite(&base.join(&section.directory), overrides)?;
                match format {
                    Format::Json => println!("{}", serde_json::to_string_pretty(&suite)?),
                    Format::Text => print!("{}", render_suite_text(&suite)),
                }
                return Ok(suite.all_pass());
            }
            let report = run_one(path, overrides)?;
            print_report(&report, format)?;
            Ok(report.all_pass())
        }
        Command::Suite { directory } => {
            let suite = run_suite(directory, overrides)?;
            match format {
                Format::Json => println!("{}", serde_json::to_string_pretty(&suite)?),
                Format::Text => print!("{}", render_suite_text(&suite)),
            }
            Ok(suite.all_pass())
        }
        Command::Experiment { path } => {
            let report = run_experiment(path)?;
            print_report(&report, format)?;
            Ok(report.all_pass())
        }
    }
}

fn print_report(report: &Report, format: Format) -> Result<()> {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(report)?),
        Format::Text => print!("{}", render_report_text(report)),
    }
    Ok(())
}

fn run_one(path: &Path, overrides: &Overrides) -> Result<Report> {
    let started = Instant::now();
    let mut report = run_scenario(path, overrides)?;
    report.timing_ms = started.elapsed().as_millis() as u64;
    Ok(report)
}

fn run_suite(directory: &Path, overrides: &Overrides) -> Result<SuiteReport> {
    let started = Instant::now();
    if !directory.is_dir() {
        bail!("{} is not a directory", directory.display());
    }
    let mut paths: Vec<PathBuf> = std::fs::read_dir(directory)
        .with_context(|| format!("cannot read {}", directory.display()))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|ext| ext == "toml"))
        .collect();
    if paths.is_empty() {
        bail!("{} contains no scenario files", directory.display());
    }
    paths.sort();
    let reports = paths
        .iter()
        .map(|path| run_one(path, overrides))
        .collect::<Result<Vec<_>>>()?;
    let mut suite = SuiteReport::new(directory.display().to_string(), reports);
    suite.timing_ms = started.elapsed().as_millis() as u64;
    Ok(suite)
}

/// Runs only the commute block of a mucalc scenario: an exploratory
/// comparison of the two fixpoint nestings, asserting nothing.
fn run_experiment(path: &Path) -> Result<Report> {
    let scenario = ScenarioFile::load(path)?;
    if scenario.kind != "mucalc" {
        bail!("experiment requires a mucalc scenario");
    }
    let section = scenario.mucalc.as_ref().unwrap();
    if section.commute.is_none() {
        bail!("scenario has no [mucalc.commute] block");
    }
    let started = Instant::now();
    let mut report = run_scenario(path, &Overrides::default())?;
    report.checks.retain(|c| c.name == "commute_experiment");
    if report.checks.is_empty() {
        bail!("commute experiment produced no result");
    }
    let mut report = Report::new(
        report.scenario,
        "mucalc-experiment".to_string(),
        report.seed,
        report.checks,
    );
    report.timing_ms = started.elapsed().as_millis() as u64;
    Ok(report)
}

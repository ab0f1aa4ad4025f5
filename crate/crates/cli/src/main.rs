use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use orbitgrowth::zoo::CATALOG;
use orbitgrowth_cli::config::{parse_formats, ConfigFile, ExperimentConfig, Format, Overrides, Suite};
use orbitgrowth_cli::report::{diff, Report};
use orbitgrowth_cli::suites;

/// Orbit-separation growth experiments on finite systems and their hyperspace and measure lifts.
#[derive(Parser)]
#[command(name = "orbitgrowth", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a suite and emit its report.
    Run(RunArgs),
    /// Run a lemma suite; exits 1 if any check fails.
    Check(RunArgs),
    /// The example systems.
    Zoo {
        #[command(subcommand)]
        action: ZooAction,
    },
    /// Operations on saved json reports.
    Report {
        #[command(subcommand)]
        action: ReportAction,
    },
}

#[derive(Subcommand)]
enum ZooAction {
    /// List the system kinds.
    List,
}

#[derive(Subcommand)]
enum ReportAction {
    /// Rows that differ between two json reports; exits 1 if any.
    Diff { a: PathBuf, b: PathBuf },
}

#[derive(Args)]
struct RunArgs {
    /// TOML experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Suite name, overriding the config.
    #[arg(long)]
    suite: Option<String>,
    /// Directory for report files; without it reports go to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Largest system size for exact counts.
    #[arg(long)]
    exact_cap: Option<usize>,
    /// Comma-separated list of table, csv, json, plotdata.
    #[arg(long)]
    format: Option<String>,
}

impl RunArgs {
    fn resolve(&self) -> Result<(ExperimentConfig, Option<PathBuf>, Vec<Format>)> {
        let file = match &self.config {
            Some(path) => ConfigFile::load(path)?,
            None => ConfigFile::default(),
        };
        let overrides = Overrides {
            suite: self.suite.as_deref().map(str::parse).transpose()?,
            seed: self.seed,
            exact_cap: self.exact_cap,
            out: self.out.clone(),
            formats: self.format.as_deref().map(parse_formats).transpose()?,
        };
        let (config, output) = ExperimentConfig::resolve(file, &overrides)?;
        Ok((config, output.out, output.formats))
    }
}

fn run(args: &RunArgs, lemma_only: bool) -> Result<i32> {
    let (config, out, formats) = args.resolve()?;
    if lemma_only && !config.suite.is_lemma_suite() {
        let lemma: Vec<&str> = Suite::ALL
            .iter()
            .filter(|s| s.is_lemma_suite())
            .map(|s| s.name())
            .collect();
        bail!(
            "`check` runs lemma suites only ({}), not {}",
            lemma.join(", "),
            config.suite
        );
    }
    let report = suites::run(&config);
    match &out {
        Some(dir) => {
            for path in report.write(dir, &formats)? {
                eprintln!("wrote {}", path.display());
            }
        }
        None => {
            for &format in &formats {
                print!("{}", report.render(format)?);
            }
        }
    }
    let failed = report.failed_checks().count();
    eprintln!(
        "{}: {} of {} checks pass",
        config.suite,
        report.checks.len() - failed,
        report.checks.len()
    );
    for e in &report.errors {
        eprintln!("error: {e}");
    }
    Ok(report.exit_code())
}

fn report_diff(a: &PathBuf, b: &PathBuf) -> Result<i32> {
    let load = |p: &PathBuf| -> Result<Report> {
        let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        Report::from_json(&text).with_context(|| format!("parsing {}", p.display()))
    };
    let lines = diff(&load(a)?, &load(b)?)?;
    for line in &lines {
        println!("{line}");
    }
    Ok(i32::from(!lines.is_empty()))
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run(args) => run(args, false),
        Command::Check(args) => run(args, true),
        Command::Zoo {
            action: ZooAction::List,
        } => {
            for (name, description) in CATALOG {
                println!("{name:<12} {description}");
            }
            Ok(0)
        }
        Command::Report {
            action: ReportAction::Diff { a, b },
        } => report_diff(a, b),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand, ValueEnum};
use rnmod::experiment::{run_file, run_suite, Overrides, ReportFormat, SuiteOptions, Verdict};
use rnmod::selftest::run_selftest;

/// Demiclosedness experiments for random asymptotically nonexpansive maps.
#[derive(Debug, Parser)]
#[command(name = "rnmod", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Seed overriding the one in each scenario.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Report file for `run`, report directory for `suite`.
    #[arg(long, global = true)]
    report: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,

    /// Horizon overriding the one in each scenario.
    #[arg(long, global = true)]
    horizon: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one scenario file.
    Run { scenario: PathBuf },
    /// Run every `*.toml` scenario in a directory.
    Suite { dir: PathBuf },
    /// Run the built-in invariant battery.
    Selftest {
        /// Instances per check.
        #[arg(long, default_value_t = 200)]
        scale: usize,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

impl From<Format> for ReportFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Json => ReportFormat::Json,
            Format::Csv => ReportFormat::Csv,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn execute(cli: Cli) -> anyhow::Result<ExitCode> {
    let overrides = Overrides {
        seed: cli.seed,
        horizon: cli.horizon,
    };
    let format = ReportFormat::from(cli.format);
    match cli.command {
        Command::Run { scenario } => {
            let report = run_file(&scenario, &overrides)
                .with_context(|| format!("scenario {}", scenario.display()))?;
            let text = format.render(&report);
            match &cli.report {
                Some(path) => std::fs::write(path, &text)
                    .with_context(|| format!("writing {}", path.display()))?,
                None => print!("{text}"),
            }
            eprintln!(
                "{}: {} (conclusion residual {:e}, structure {})",
                report.name,
                report.verdict.as_str(),
                report.conclusion.sup_norm,
                if report.structure.passed { "ok" } else { "FAILED" }
            );
            let ok = report.verdict != Verdict::Violated && report.structure.passed;
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Suite { dir } => {
            let report_dir = cli.report.unwrap_or_else(|| dir.join("reports"));
            let options = SuiteOptions {
                overrides,
                format,
                report_dir,
            };
            let summary = run_suite(&dir, &options)?;
            print!("{}", summary.render(ReportFormat::Csv));
            eprintln!(
                "{} scenarios: {} pass, {} hypotheses not met, {} violated, {} structure failed, {} errors",
                summary.rows.len(),
                summary.count("pass"),
                summary.count("hypotheses-not-met"),
                summary.count("violated"),
                summary.count("structure-failed"),
                summary.count("error"),
            );
            Ok(if summary.success() { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
        Command::Selftest { scale } => {
            let outcomes = run_selftest(scale, cli.seed.unwrap_or(0));
            let mut ok = true;
            for o in &outcomes {
                ok &= o.passed();
                println!(
                    "{} {} ({} cases, {} failures)",
                    if o.passed() { "PASS" } else { "FAIL" },
                    o.name,
                    o.cases,
                    o.failures
                );
            }
            Ok(if ok { ExitCode::SUCCESS } else { ExitCode::FAILURE })
        }
    }
}

use std::io::IsTerminal;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tacit::bargaining::{load_board_set, PayoffLostMode};
use tacit::focal::load_focality_labels;
use tacit::runner::{
    emit_report, ingest_human_data, read_records, run_bargaining_experiment, run_task_experiment,
    write_report, ExperimentConfig, IngestKind, Ingested, ReportOptions, RunOptions, RunSummary,
    RunnerError,
};
use tacit::tasks::load_human_tallies;

#[derive(Parser)]
#[command(name = "tacit", version, about = "Tacit-coordination experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a task experiment (pick / guess / coordinate).
    RunTasks(RunArgs),
    /// Run a Bargaining Table experiment.
    RunBargaining(RunArgs),
    /// Validate a human-data file and print a summary.
    Ingest {
        #[arg(long, value_enum)]
        kind: Kind,
        file: PathBuf,
        /// Board set the history was played on (bargaining only).
        #[arg(long)]
        boards: Option<PathBuf>,
    },
    /// Regenerate the report from a persisted trials or outcomes file.
    Report {
        file: PathBuf,
        #[arg(long, value_enum, default_value = "penalty")]
        payoff_lost: LostMode,
        /// Directory for report.txt and the CSV tables.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        human_tallies: Option<PathBuf>,
        #[arg(long)]
        focality_labels: Option<PathBuf>,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the config output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stop after persisting this many new records.
    #[arg(long, hide = true)]
    stop_after: Option<usize>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Tasks,
    Bargaining,
}

#[derive(Clone, Copy, ValueEnum)]
enum LostMode {
    Penalty,
    Shortfall,
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("warn")),
        )
        .with_writer(std::io::stderr)
        .with_ansi(std::io::stderr().is_terminal())
        .init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn run(cli: Cli) -> Result<u8, RunnerError> {
    match cli.command {
        Command::RunTasks(args) => {
            let ExperimentConfig::Tasks(mut config) = ExperimentConfig::load(&args.config)? else {
                return Err(RunnerError::Config("expected a config with kind \"tasks\"".into()));
            };
            config.seed = args.seed.unwrap_or(config.seed);
            config.output = args.out.unwrap_or(config.output);
            let summary = run_task_experiment(&config, RunOptions { stop_after: args.stop_after })?;
            Ok(finish("trials", &summary, &config.output))
        }
        Command::RunBargaining(args) => {
            let ExperimentConfig::Bargaining(mut config) = ExperimentConfig::load(&args.config)?
            else {
                return Err(RunnerError::Config("expected a config with kind \"bargaining\"".into()));
            };
            config.seed = args.seed.unwrap_or(config.seed);
            config.output = args.out.unwrap_or(config.output);
            let summary =
                run_bargaining_experiment(&config, RunOptions { stop_after: args.stop_after })?;
            Ok(finish("iterations", &summary, &config.output))
        }
        Command::Ingest { kind, file, boards } => {
            let boards = boards.as_deref().map(load_board_set).transpose()?;
            let kind = match kind {
                Kind::Tasks => IngestKind::Tasks,
                Kind::Bargaining => IngestKind::Bargaining,
            };
            match ingest_human_data(&file, kind, boards.as_deref())? {
                Ingested::Tallies(tallies) => {
                    for (q, t) in &tallies {
                        let nci = t
                            .normalized_ci()
                            .map_or_else(|_| "NA".to_string(), |v| format!("{v:.4}"));
                        println!("{q}\toptions={}\trespondents={}\tnci={nci}", t.num_options(), t.total());
                    }
                }
                Ingested::History(h) => {
                    println!("{} recorded plays", h.records().len());
                }
            }
            Ok(0)
        }
        Command::Report {
            file,
            payoff_lost,
            out,
            human_tallies,
            focality_labels,
        } => {
            let options = ReportOptions {
                payoff_lost: match payoff_lost {
                    LostMode::Penalty => PayoffLostMode::Penalty,
                    LostMode::Shortfall => PayoffLostMode::Shortfall,
                },
                human_tallies: human_tallies.as_deref().map(load_human_tallies).transpose()?,
                focality_labels: focality_labels.as_deref().map(load_focality_labels).transpose()?,
            };
            let bundle = emit_report(&read_records(&file)?, &options)?;
            print!("{}", bundle.to_text());
            if let Some(dir) = out {
                write_report(&bundle, &dir)?;
            }
            Ok(0)
        }
    }
}

fn finish(unit: &str, summary: &RunSummary, out: &std::path::Path) -> u8 {
    eprintln!(
        "{} {unit} persisted ({} resumed), {} issued, {} failed{}",
        summary.persisted,
        summary.resumed,
        summary.issued,
        summary.failures.len() + summary.failed_records,
        if summary.incomplete { ", run incomplete" } else { "" }
    );
    for f in &summary.failures {
        eprintln!("  failure: {f}");
    }
    if !summary.incomplete {
        eprintln!("report written to {}", out.join("report.txt").display());
    }
    summary.exit_code() as u8
}

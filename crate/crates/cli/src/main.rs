//! botwatch: batch pipelines for group-level social spambot detection.
//!
//! Wires the corpus loaders, the three detectors, and the evaluation kit
//! into reproducible commands driven by a TOML config. Identical config,
//! fixtures, and seed produce byte-identical reports.

mod commands;
mod config;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::Resolved;

#[derive(Parser)]
#[command(
    name = "botwatch",
    version,
    about = "Group-level social spambot detection pipelines",
    after_help = "Exit codes: 0 success, 2 config validation failure, 3 dataset/fixture \
                  load failure, 1 other errors.\n\
                  The fixture root comes from BOTWATCH_FIXTURES, then the config's \
                  fixture_root, then `fixtures`."
)]
struct Cli {
    /// Run configuration file.
    #[arg(long, global = true, default_value = "botwatch.toml")]
    config: PathBuf,
    /// Random seed; overrides the config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory; overrides the config's out_dir.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Load and validate every configured dataset, reporting row counts.
    Ingest,
    /// Behavioral-sequence detector: similarity curve, split, verdicts.
    DetectDna,
    /// Feature-graph detector: similarity graph, communities, verdicts.
    DetectGraph,
    /// Reputation-distribution tamper test between two account groups.
    DetectDist,
    /// Score a third-party per-account verdict file against a test set.
    ScoreExternal,
    /// Alive/deleted/suspended accounting over the configured datasets.
    Survivability,
    /// Crowdsourcing analytics: contributor gating, votes, agreement.
    Annotations,
    /// Emit one of the bundled replica tables.
    Table {
        #[arg(value_enum)]
        which: TableKind,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum TableKind {
    /// Survivability counts and percentages per dataset.
    Table2,
    /// Effect sizes and chi-square significance vs the baseline dataset.
    Table3,
    /// Annotation-campaign outcomes with recomputed accuracies.
    Table4,
    /// Internal-consistency audit of the bundled detector score table.
    #[value(name = "table7-consistency")]
    Table7Consistency,
}

/// Failure classes mapped onto the exit-code contract.
#[derive(Debug)]
pub enum Failure {
    /// Invalid or incomplete configuration (exit 2).
    Config(String),
    /// Missing or malformed dataset/fixture input (exit 3).
    Load(String),
    /// Everything else (exit 1).
    Other(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Load(_) => 3,
            Failure::Other(_) => 1,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Config(m) | Failure::Load(m) | Failure::Other(m) => m,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("botwatch: error: {}", failure.message());
            ExitCode::from(failure.exit_code())
        }
    }
}

fn run(cli: &Cli) -> Result<(), Failure> {
    let resolved = Resolved::load(&cli.config, cli.seed, cli.out.as_deref())?;
    match cli.command {
        Command::Ingest => commands::ingest(&resolved),
        Command::DetectDna => commands::detect_dna(&resolved),
        Command::DetectGraph => commands::detect_graph(&resolved),
        Command::DetectDist => commands::detect_dist(&resolved),
        Command::ScoreExternal => commands::score_external(&resolved),
        Command::Survivability => commands::survivability_cmd(&resolved),
        Command::Annotations => commands::annotations_cmd(&resolved),
        Command::Table { which } => commands::table_cmd(&resolved, which),
    }
}

//! `multisage` command-line tool.
//!
//! Exit codes: 0 success, 1 other failure, 2 configuration error, 3 data
//! error (missing or inconsistent input), 4 numeric failure.

mod commands;
mod config;
mod error;

use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};
use multisage::embed::Mode;
use multisage::ingest::CouplingPolicy;

use error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "multisage",
    version,
    about = "Multiplex network embedding and link prediction"
)]
struct Cli {
    /// Directory that relative dataset paths are resolved against.
    #[arg(long, global = true, env = "MULTISAGE_DATA_DIR")]
    data_dir: Option<PathBuf>,
    /// Log more (-v per-epoch losses, -vv per-batch).
    #[arg(short, long, action = ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print node, layer and link counts of a dataset's largest component.
    Inspect(InspectArgs),
    /// Train one model on one split; writes a checkpoint and a metrics file.
    Train(TrainArgs),
    /// Run the sweep described in the config.
    Sweep(SweepArgs),
    /// Score replica pairs with a trained checkpoint.
    Score(ScoreArgs),
    /// Write the split of one run to a file.
    SplitExport(SplitExportArgs),
    /// Check a split file against a dataset and summarize it.
    SplitImport(SplitImportArgs),
}

#[derive(Debug, Args)]
struct InspectArgs {
    /// Layered edge list.
    edges: PathBuf,
    #[arg(long)]
    couplings: Option<PathBuf>,
    /// `derive_shared_label` or `explicit`.
    #[arg(long, default_value = "derive_shared_label", value_parser = parse_policy)]
    policy: CouplingPolicy,
    /// Published dataset to compare against; defaults to the file stem when known.
    #[arg(long)]
    reference: Option<String>,
}

#[derive(Debug, Args)]
struct ConfigArgs {
    /// TOML run configuration.
    #[arg(short, long)]
    config: PathBuf,
    /// Dataset from the config; needed when it lists several.
    #[arg(long)]
    dataset: Option<String>,
    /// Overrides `settings.master_seed`.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct TrainArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Overrides the first entry of `settings.modes`.
    #[arg(long)]
    mode: Option<Mode>,
    /// Run index; selects the split and the initialization seeds.
    #[arg(long, default_value_t = 0)]
    run: usize,
    /// Train on this split instead of drawing one.
    #[arg(long)]
    split: Option<PathBuf>,
    /// Output directory; overrides `output.dir`.
    #[arg(short, long)]
    out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Debug, Args)]
struct SweepArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Overrides `settings.runs`.
    #[arg(long)]
    runs: Option<usize>,
    /// Worker threads; overrides `settings.threads` (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ScoreArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long)]
    checkpoint: PathBuf,
    /// Pairs `layer_a node_a layer_b node_b`, one per line; stdin when absent.
    #[arg(long)]
    pairs: Option<PathBuf>,
    /// Embed the training graph of this split instead of the full graph.
    #[arg(long)]
    split: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct SplitExportArgs {
    #[command(flatten)]
    config: ConfigArgs,
    #[arg(long, default_value_t = 0)]
    run: usize,
    /// Destination file.
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct SplitImportArgs {
    #[command(flatten)]
    config: ConfigArgs,
    /// Split file to check.
    #[arg(long)]
    split: PathBuf,
}

fn parse_policy(s: &str) -> Result<CouplingPolicy, String> {
    match s {
        "derive_shared_label" => Ok(CouplingPolicy::DeriveSharedLabel),
        "explicit" => Ok(CouplingPolicy::Explicit),
        _ => Err(format!("unknown coupling policy {s:?}")),
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let data_dir = cli.data_dir.as_deref();
    match cli.command {
        Command::Inspect(a) => commands::inspect(
            &a.edges,
            a.couplings.as_deref(),
            a.policy,
            a.reference.as_deref(),
            data_dir,
        ),
        Command::Train(a) => commands::train(&a, data_dir),
        Command::Sweep(a) => commands::sweep(&a, data_dir),
        Command::Score(a) => commands::score(&a, data_dir),
        Command::SplitExport(a) => commands::split_export(&a, data_dir),
        Command::SplitImport(a) => commands::split_import(&a, data_dir),
    }
}

fn main() {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    if let Err(e) = run(cli) {
        eprintln!("multisage: {e}");
        std::process::exit(e.exit_code());
    }
}

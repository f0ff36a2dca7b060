//! `asymdetect`: generate epidemic datasets, train the detector, evaluate it
//! against the observed-betweenness baseline and tabulate results.

mod commands;
mod report;
mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

#[derive(Parser, Debug)]
#[command(name = "asymdetect", version, about = "Find asymptomatic nodes in SI epidemic snapshots")]
struct Cli {
    /// Worker threads for instance-level parallelism (defaults to all cores).
    /// Results do not depend on this value.
    #[arg(long, global = true, value_parser = clap::value_parser!(u32).range(1..))]
    jobs: Option<u32>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a dataset of epidemic instances.
    Generate(GenerateArgs),
    /// Train a GCN on a dataset and write a checkpoint.
    Train(TrainArgs),
    /// Score datasets with a checkpoint and/or the baseline.
    Eval(EvalArgs),
    /// Join aggregate results into a comparison table.
    Report(ReportArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    /// Barabási–Albert preferential attachment.
    Ba,
    /// Watts–Strogatz small world.
    Ws,
}

#[derive(Args, Debug, Serialize)]
pub struct GenerateArgs {
    #[arg(long, value_enum)]
    pub model: ModelKind,
    /// Nodes per network.
    #[arg(long)]
    pub nodes: usize,
    #[arg(long)]
    pub instances: usize,
    /// Probability that an infected node is observed.
    #[arg(long)]
    pub theta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Dataset directory to create.
    #[arg(long)]
    pub out: PathBuf,
    /// Edges per new node (BA).
    #[arg(long, default_value_t = 4)]
    pub m: usize,
    /// Ring-lattice degree (WS).
    #[arg(long, default_value_t = 8)]
    pub k: usize,
    /// Rewiring probability (WS).
    #[arg(long, default_value_t = 0.3)]
    pub p: f64,
    /// Infection probabilities; each instance draws one uniformly.
    #[arg(long, value_delimiter = ',', default_values_t = [0.1, 0.3, 0.5])]
    pub betas: Vec<f64>,
    /// Infected fraction at which the epidemic is stopped.
    #[arg(long, default_value_t = 0.2)]
    pub stop_fraction: f64,
}

#[derive(Args, Debug, Serialize)]
pub struct TrainArgs {
    /// Dataset directory written by `generate`.
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value_t = 1000)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 128)]
    pub hidden: usize,
    /// Graphs per mini-batch.
    #[arg(long, default_value_t = 128)]
    pub batch: usize,
    #[arg(long, default_value_t = 0.1)]
    pub val_fraction: f64,
    /// Epochs between validation passes.
    #[arg(long, default_value_t = 50)]
    pub validation_every: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Run directory (default: $ASYMDETECT_OUTPUT_DIR or ./runs, plus train-<time>).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug, Serialize)]
#[command(group(ArgGroup::new("input").required(true).args(["dataset", "sweep"])))]
pub struct EvalArgs {
    /// Trained checkpoint. Without one only the baseline is evaluated.
    #[arg(long)]
    pub checkpoint: Option<PathBuf>,
    /// Also evaluate the observed-betweenness baseline when a checkpoint is given.
    #[arg(long)]
    pub baseline: bool,
    /// Dataset directory; repeat for several.
    #[arg(long)]
    pub dataset: Vec<PathBuf>,
    /// Evaluate every dataset directory directly under this one, in name order.
    #[arg(long, conflicts_with = "dataset")]
    pub sweep: Option<PathBuf>,
    /// Share of the evaluation pool used for top-k precision.
    #[arg(long, default_value_t = 0.01)]
    pub top_fraction: f64,
    /// Write feature matrices (raw and normalized) of the first instances here.
    #[arg(long)]
    pub dump_features: Option<PathBuf>,
    /// Instances per dataset written by --dump-features.
    #[arg(long, default_value_t = 1, requires = "dump_features")]
    pub dump_count: usize,
    /// Run directory (default: $ASYMDETECT_OUTPUT_DIR or ./runs, plus eval-<time>).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum TableFormat {
    Markdown,
    Csv,
}

#[derive(Args, Debug, Serialize)]
pub struct ReportArgs {
    /// Aggregate JSON files or per-instance CSV files written by `eval`.
    #[arg(required = true, num_args = 1..)]
    pub inputs: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = TableFormat::Markdown)]
    pub format: TableFormat,
    /// Top-k fraction recorded for per-instance CSV inputs.
    #[arg(long, default_value_t = 0.01)]
    pub top_fraction: f64,
    /// Run directory (default: $ASYMDETECT_OUTPUT_DIR or ./runs, plus report-<time>).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(jobs) = cli.jobs {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(jobs as usize).build_global() {
            eprintln!("error: cannot start {jobs} worker threads: {e}");
            return ExitCode::FAILURE;
        }
    }
    let result = match &cli.command {
        Command::Generate(args) => commands::generate(args),
        Command::Train(args) => commands::train(args),
        Command::Eval(args) => commands::eval(args),
        Command::Report(args) => report::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn train_defaults_match_the_library_defaults() {
        let cli = Cli::try_parse_from(["asymdetect", "train", "--dataset", "d"]).unwrap();
        let Command::Train(args) = cli.command else {
            panic!("expected train");
        };
        assert_eq!((args.epochs, args.lr, args.hidden, args.batch), (1000, 1e-3, 128, 128));
        let defaults = asymdetect::gcn::TrainConfig::default();
        assert_eq!(
            (defaults.epochs, defaults.adam.lr, defaults.hidden, defaults.batch_size),
            (args.epochs, args.lr, args.hidden, args.batch)
        );
    }

    #[test]
    fn eval_needs_a_dataset() {
        assert!(Cli::try_parse_from(["asymdetect", "eval", "--baseline"]).is_err());
        assert!(Cli::try_parse_from(["asymdetect", "eval", "--dataset", "a", "--sweep", "b"]).is_err());
    }

    #[test]
    fn command_line_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}

//! `latcard`: batch experiments for hidden-variable cardinality selection.
//!
//! Every subcommand reads files and writes files. On failure a single JSON
//! line `{"error": <kind>, "message": <text>}` goes to stderr and the exit
//! code is nonzero.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "latcard", version, about = "Cardinality selection for hidden variables in discrete Bayesian networks")]
pub struct Cli {
    /// Seed for every random choice. Required by stochastic subcommands.
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Leave wall-clock timings out of all outputs.
    #[arg(long, global = true)]
    pub omit_timing: bool,

    /// Dirichlet pseudo-count per cell.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub alpha: f64,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write one of the built-in benchmark networks.
    Synth(SynthArgs),
    /// Draw rows from a network by ancestral sampling.
    Sample(SampleArgs),
    /// Choose the cardinality of one hidden variable by state merging.
    Agglomerate(AgglomerateArgs),
    /// Run EM for every cardinality in a range and score each by CS.
    SweepEm(SweepArgs),
    /// Agglomerate several hidden variables in turn until none changes.
    Roundrobin(RoundRobinArgs),
    /// Learn a network, propose hidden parents for semi-cliques and size them.
    Findhidden(FindHiddenArgs),
    /// Mean test log-probability of a network.
    Eval(EvalArgs),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Benchmark {
    SingleHidden,
    MultiHidden,
    PlantedClique,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, value_enum)]
    pub benchmark: Benchmark,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub net: PathBuf,
    #[arg(long)]
    pub rows: usize,
    /// Comma-separated variables written as `?`.
    #[arg(long, value_delimiter = ',')]
    pub hide: Vec<String>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct AgglomerateArgs {
    #[arg(long)]
    pub net: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub hidden: String,
    /// Cap on the number of initial states.
    #[arg(long)]
    pub max_initial_states: Option<usize>,
    /// Output prefix; writes .trace.json, .tree.dot, .curve.csv,
    /// .summary.json and .params.json.
    #[arg(long)]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub net: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub hidden: String,
    #[arg(long)]
    pub k_min: usize,
    #[arg(long)]
    pub k_max: usize,
    #[arg(long, default_value_t = 5)]
    pub restarts: usize,
    #[arg(long, default_value_t = 200)]
    pub max_iters: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub ll_tolerance: f64,
    /// Output prefix; writes .sweep.csv and .sweep.json.
    #[arg(long)]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct RoundRobinArgs {
    #[arg(long)]
    pub net: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Comma-separated hidden variables, in visiting order.
    #[arg(long, value_delimiter = ',', required = true)]
    pub hidden: Vec<String>,
    #[arg(long)]
    pub max_initial_states: Option<usize>,
    #[arg(long, default_value_t = 100)]
    pub max_rounds: usize,
    /// Output prefix; writes .roundrobin.json and .params.json.
    #[arg(long)]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct FindHiddenArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// JSON file with pipeline settings; omitted fields keep their defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output prefix; writes .report.json, .base.json and .params.json.
    #[arg(long)]
    pub out: String,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Network file with structure and parameters.
    #[arg(long)]
    pub net: PathBuf,
    /// Parameters to use instead of the ones in `--net`; must have the same
    /// variables and structure.
    #[arg(long)]
    pub params: Option<PathBuf>,
    #[arg(long)]
    pub test: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.to_string();
            let first = text.lines().next().unwrap_or("usage error");
            output::report_error("usage", first.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
    };
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            output::report_error(output::error_kind(&e), &format!("{e:#}"));
            ExitCode::FAILURE
        }
    }
}

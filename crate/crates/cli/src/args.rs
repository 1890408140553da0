use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rkr_core::ScanTarget;

use crate::input::PmfArgs;

#[derive(Debug, Parser)]
#[command(
    name = "rkr",
    version,
    about = "Recent-k-record statistics for i.i.d. discrete sequences"
)]
pub struct Cli {
    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Write the report here instead of stdout
    #[arg(long, global = true, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form probabilities, optionally checked by exact enumeration
    Exact(ExactArgs),
    /// Seeded Monte Carlo estimates
    Simulate(SimulateArgs),
    /// Stein-Chen bounds on the distance between the event count and Poisson
    PoissonBound(PoissonBoundArgs),
    /// Local-lemma feasibility of avoiding every event
    LllCheck(LllArgs),
    /// Scan statistic of a data file, or its tail probability under a pmf
    Scan(ScanArgs),
    /// RkR levels, level histogram and model comparison for a data file
    Analyze(AnalyzeArgs),
    /// Formula vs exact enumeration (vs simulation) over a grid
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Args)]
pub struct LevelArgs {
    /// Window length
    #[arg(long)]
    pub k: usize,
    /// Record level
    #[arg(long)]
    pub j: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExactTarget {
    Window,
    Marginal,
    Posterior,
    Prediction,
    Conditional,
    CountPmf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PredictionVariant {
    #[value(name = "paper")]
    Published,
    Corrected,
}

#[derive(Debug, Args)]
pub struct ExactArgs {
    #[command(flatten)]
    pub pmf: PmfArgs,
    #[command(flatten)]
    pub level: LevelArgs,
    /// Target value
    #[arg(long)]
    pub i0: Option<usize>,
    /// Horizon (window: first-n union bound; count-pmf: number of windows)
    #[arg(long)]
    pub n: Option<usize>,
    /// Level of the next observation for `conditional` (defaults to --j)
    #[arg(long)]
    pub j1: Option<usize>,
    #[arg(value_enum)]
    pub target: ExactTarget,
    #[arg(long, value_enum, default_value_t = PredictionVariant::Corrected)]
    pub variant: PredictionVariant,
    /// Also compute the exact enumeration value
    #[arg(long)]
    pub verify: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SimTarget {
    Event,
    Conditional,
    CountPmf,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,
    /// Worker threads (results do not depend on it)
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: u64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub pmf: PmfArgs,
    #[command(flatten)]
    pub level: LevelArgs,
    #[arg(long)]
    pub i0: Option<usize>,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub j1: Option<usize>,
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(value_enum, default_value_t = SimTarget::Event)]
    pub target: SimTarget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BoundVariant {
    Both,
    #[value(name = "paper")]
    Published,
    Conservative,
}

#[derive(Debug, Args)]
pub struct PoissonBoundArgs {
    #[command(flatten)]
    pub pmf: PmfArgs,
    #[command(flatten)]
    pub level: LevelArgs,
    #[arg(long)]
    pub i0: usize,
    /// Number of windows
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value_t = BoundVariant::Both)]
    pub variant: BoundVariant,
    /// Exact TV distance by enumeration
    #[arg(long)]
    pub exact_tv: bool,
    /// Simulated TV distance (needs --seed)
    #[arg(long)]
    pub mc_tv: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: u64,
}

#[derive(Debug, Args)]
pub struct LllArgs {
    #[command(flatten)]
    pub pmf: PmfArgs,
    #[command(flatten)]
    pub level: LevelArgs,
    #[arg(long)]
    pub i0: usize,
    /// Also compute the exact probability that none of n windows is an event
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TailMethodArg {
    Oracle,
    Montecarlo,
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Data file (CSV or JSONL); computes the statistic
    #[arg(long, value_name = "FILE")]
    pub input: Option<PathBuf>,
    #[command(flatten)]
    pub pmf: PmfArgs,
    /// Window length
    #[arg(long)]
    pub k: usize,
    /// fixed:<m> or random
    #[arg(long)]
    pub target: ScanTarget,
    /// Sequence length for tail probabilities
    #[arg(long)]
    pub n: Option<usize>,
    /// Threshold s in P(S_k >= s)
    #[arg(long)]
    pub s: Option<usize>,
    #[arg(long, value_enum, default_value_t = TailMethodArg::Oracle)]
    pub method: TailMethodArg,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    pub reps: u64,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub workers: u64,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[arg(long, value_name = "FILE")]
    pub input: PathBuf,
    #[arg(long)]
    pub k: usize,
    /// Restrict the report to one level
    #[arg(long)]
    pub j: Option<usize>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    /// Single distribution; the built-in grid is used when omitted
    #[command(flatten)]
    pub pmf: PmfArgs,
    /// Largest window length in the grid
    #[arg(long, default_value_t = 2)]
    pub k_max: usize,
    /// Monte Carlo replications per row (0 disables simulation)
    #[arg(long, default_value_t = 0)]
    pub reps: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

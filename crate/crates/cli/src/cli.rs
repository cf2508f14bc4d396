use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "pet",
    version,
    about = "Population-to-population transformer for multi-objective optimization"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Record parent/successor population pairs from teacher runs.
    Collect(CollectArgs),
    /// Train a model on a trajectory dataset.
    Pretrain(PretrainArgs),
    /// Run one optimizer on one problem.
    Optimize(OptimizeArgs),
    /// Run an experiment file and write its reports.
    Benchmark(BenchmarkArgs),
    /// IGD of a solution set against a reference front.
    Igd(IgdArgs),
    /// Run the built-in oracle suites.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct CollectArgs {
    /// Comma-separated `name:d[:m]` entries, e.g. `zdt1:30,lsmop1:100:3`.
    #[arg(long, value_delimiter = ',', required = true)]
    pub problems: Vec<String>,
    /// Comma-separated teachers (`nsga2`, `cso`).
    #[arg(long, value_delimiter = ',', default_value = "nsga2,cso")]
    pub teachers: Vec<String>,
    /// Runs per (problem, teacher) cell.
    #[arg(long, default_value_t = 3)]
    pub seeds: u64,
    #[arg(long, default_value_t = 100)]
    pub pop: usize,
    #[arg(long, default_value_t = 10_000)]
    pub evals: usize,
    #[arg(long, default_value_t = 0)]
    pub master_seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PretrainArgs {
    #[arg(long)]
    pub data: PathBuf,
    /// Model dimensions as JSON; the built-in defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub steps: usize,
    #[arg(long, default_value_t = 64)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 50)]
    pub eval_every: usize,
    /// Optional loss curve, one JSON object per line.
    #[arg(long)]
    pub curve: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long)]
    pub problem: String,
    #[arg(long)]
    pub d: usize,
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// `pet`, `pet-frozen`, `nsga2`, `cso` or `random`.
    #[arg(long, default_value = "pet")]
    pub arm: String,
    /// Checkpoint for the PET arms.
    #[arg(long)]
    pub model: Option<PathBuf>,
    #[arg(long, default_value_t = 100)]
    pub pop: usize,
    #[arg(long, default_value_t = 1000)]
    pub evals: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fine-evolving learning rate of the `pet` arm.
    #[arg(long, default_value_t = 1e-4)]
    pub fine_lr: f64,
    /// Per-generation log, one JSON object per line.
    #[arg(long)]
    pub log: Option<PathBuf>,
    /// Final objective vectors, one whitespace-separated row per solution.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub front_size: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BenchmarkArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Checkpoint overriding the one named in the config.
    #[arg(long)]
    pub model: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IgdArgs {
    /// Reference points: JSON array of rows, or one row per line.
    #[arg(long)]
    pub front: PathBuf,
    #[arg(long)]
    pub solutions: PathBuf,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

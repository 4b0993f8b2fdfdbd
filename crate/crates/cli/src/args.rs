use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "drsub", version, about = "Global maximization of DR-submodular benchmark problems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded benchmark instance as JSON.
    Generate(GenerateArgs),
    /// Solve an instance file and append a record to the results CSV.
    Solve(SolveArgs),
    /// Summarize a results CSV per (solver, n, budget).
    Table(TableArgs),
    /// Run the invariant checks on freshly generated instances.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Quadratic,
    Covering,
    Influence,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum GArg {
    Identity,
    Contest,
}

impl From<GArg> for drsub_core::problems::GKind {
    fn from(g: GArg) -> Self {
        match g {
            GArg::Identity => drsub_core::problems::GKind::Identity,
            GArg::Contest => drsub_core::problems::GKind::Contest,
        }
    }
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(value_enum)]
    pub kind: Family,
    /// Number of variables (facilities for covering).
    #[arg(long)]
    pub n: Option<usize>,
    /// Rows of A for quadratic instances.
    #[arg(long, default_value_t = 5)]
    pub m: usize,
    /// Demand points for covering instances.
    #[arg(long, default_value_t = 150)]
    pub j: usize,
    /// Graph nodes for influence instances (same as --n).
    #[arg(long)]
    pub nodes: Option<usize>,
    #[arg(long, default_value_t = 2.0)]
    pub budget: f64,
    /// Covering only: add facility capacities.
    #[arg(long)]
    pub capacitated: bool,
    #[arg(long, value_enum, default_value = "contest")]
    pub g: GArg,
    #[arg(long, env = "DRSUB_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Output path; the JSON goes to stdout when omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Solver {
    Sbb,
    ApproxCp,
    ExactCp,
    Grid,
}

impl Solver {
    pub fn name(self) -> &'static str {
        match self {
            Solver::Sbb => "sbb",
            Solver::ApproxCp => "approx-cp",
            Solver::ExactCp => "exact-cp",
            Solver::Grid => "grid",
        }
    }
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    pub instance: PathBuf,
    #[arg(long, value_enum, default_value = "sbb")]
    pub solver: Solver,
    #[arg(long, default_value_t = 0.05)]
    pub rel_gap: f64,
    /// Seconds; 0 disables the limit.
    #[arg(long, default_value_t = 3600.0)]
    pub time_limit: f64,
    #[arg(long)]
    pub node_limit: Option<usize>,
    /// Cutting-plane iterations without upper-bound progress.
    #[arg(long, default_value_t = 5)]
    pub stall: usize,
    /// Relative gap at which a box's cutting plane stops.
    #[arg(long, default_value_t = 0.001)]
    pub subgap: f64,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Absolute gap for the exact cutting plane.
    #[arg(long, default_value_t = 0.01)]
    pub epsilon: f64,
    /// Iteration cap for the cutting-plane solvers.
    #[arg(long)]
    pub max_iters: Option<usize>,
    #[arg(long, default_value_t = 0.01)]
    pub grid_step: f64,
    /// Per-node (sbb) or per-iteration (cutting plane) CSV log.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[arg(long, default_value = "results.csv")]
    pub results: PathBuf,
}

#[derive(Debug, Args)]
pub struct TableArgs {
    #[arg(default_value = "results.csv")]
    pub results: PathBuf,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, env = "DRSUB_SEED", default_value_t = 1)]
    pub seed: u64,
    /// Sampled pairs for the lattice and overestimator checks.
    #[arg(long, default_value_t = 10_000)]
    pub trials: usize,
    /// Interior points for the finite-difference gradient check.
    #[arg(long, default_value_t = 100)]
    pub points: usize,
}

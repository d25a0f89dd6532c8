//! `chaos-stein`: Kolmogorov bounds, simulations, scaling studies, identity
//! suites and chaos decompositions for subgraph counts.
//!
//! Exit codes: 0 success, 1 verification failure, 2 malformed graph or
//! invalid arguments, 3 isolated vertex, 4 I/O failure, 5 enumeration cap.

mod commands;
mod plot;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use chaos_stein::Error;

#[derive(Parser, Debug)]
#[command(name = "chaos-stein", version, about = "Normal approximation of subgraph counts in G(n, p)")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Kolmogorov bound, regime, density and normality verdict for a pattern.
    Bound(BoundArgs),
    /// Monte Carlo counts of a pattern in G(n, p) and their distance to normal.
    Simulate(SimulateArgs),
    /// Empirical Kolmogorov distances along p = c n^-alpha and a slope fit.
    Scaling(ScalingArgs),
    /// Randomized identity and inequality suites: core, kernels or graph.
    Verify(VerifyArgs),
    /// Chaos kernels of the standardized count and the reconstruction residual.
    Decompose(DecomposeArgs),
}

/// Pattern selection: a graph file or a named family.
#[derive(Args, Debug, Clone)]
pub struct PatternArgs {
    /// Graph file: a line `v e` followed by `e` lines `u v` (0-based).
    #[arg(long, conflicts_with = "family")]
    pub graph: Option<std::path::PathBuf>,
    /// Pattern family: cycle, complete or tree (a path with `size` edges).
    #[arg(long, requires = "size")]
    pub family: Option<String>,
    /// Family size: vertices for cycle and complete, edges for tree.
    #[arg(long, requires = "family")]
    pub size: Option<usize>,
}

#[derive(Args, Debug)]
pub struct BoundArgs {
    #[command(flatten)]
    pub pattern: PatternArgs,
    /// Number of vertices of G(n, p).
    #[arg(long)]
    pub n: usize,
    /// Edge probability.
    #[arg(long)]
    pub p: f64,
    /// Exponent of the sequence p_n = p (n_k / n)^-alpha used for the
    /// normality verdict; defaults to ln(1/p) / ln n.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Use the greedy subgraph profile for patterns too large to enumerate.
    #[arg(long)]
    pub approx: bool,
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub pattern: PatternArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: f64,
    /// Number of replications.
    #[arg(long, default_value_t = chaos_stein::montecarlo::DEFAULT_REPS)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads; defaults to the available parallelism.
    #[arg(long)]
    pub threads: Option<usize>,
    /// CSV output path; the table goes to stdout when omitted.
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    /// Write a tool-agnostic plot description to this path.
    #[arg(long)]
    pub plot: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
pub struct ScalingArgs {
    #[command(flatten)]
    pub pattern: PatternArgs,
    /// Decay exponent alpha of p = c n^-alpha.
    #[arg(long)]
    pub alpha: f64,
    /// Prefactor c of p = c n^-alpha.
    #[arg(long, default_value_t = 1.0)]
    pub p: f64,
    /// Comma-separated, strictly increasing sizes (at least four).
    #[arg(long, value_delimiter = ',', required = true)]
    pub n_list: Vec<usize>,
    #[arg(long, default_value_t = chaos_stein::montecarlo::DEFAULT_REPS)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub threads: Option<usize>,
    #[arg(long)]
    pub out: Option<std::path::PathBuf>,
    #[arg(long)]
    pub plot: Option<std::path::PathBuf>,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Suite to run: core, kernels or graph.
    pub suite: String,
    /// Number of Bernoulli coordinates m (at most 24).
    #[arg(long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 0.3)]
    pub p: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of random trials.
    #[arg(long, default_value_t = 200)]
    pub reps: usize,
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Args, Debug)]
pub struct DecomposeArgs {
    #[command(flatten)]
    pub pattern: PatternArgs,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub p: f64,
    /// Largest number of edge coordinates C(n, 2) to enumerate.
    #[arg(long, default_value_t = 22)]
    pub max_m: usize,
}

/// A failure with its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }

    pub fn io(context: &std::path::Path, err: std::io::Error) -> Self {
        Self::new(4, format!("{}: {err}", context.display()))
    }
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        let code = match err {
            Error::IsolatedVertex(_) => 3,
            Error::SpaceTooLarge { .. } | Error::BudgetExceeded { .. } | Error::ExhaustiveTooLarge { .. } => 5,
            _ => 2,
        };
        Self::new(code, err.to_string())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Bound(a) => commands::bound(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Scaling(a) => commands::scaling(&a),
        Command::Verify(a) => commands::verify(&a),
        Command::Decompose(a) => commands::decompose(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;

/// Stochastic collocation with Gaussian-mixture inputs.
#[derive(Parser, Debug)]
#[command(name = "gmcolloc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build orthonormal bases of order p and 2p.
    Basis(Common),
    /// Compute a quadrature rule exact to order 2p.
    Quadrature {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        solver: SolverFlags,
    },
    /// Project model values at the rule nodes onto the order-p basis.
    Surrogate {
        #[command(flatten)]
        common: Common,
        /// Rule file (default: <out>/rule.json).
        #[arg(long)]
        rule: Option<PathBuf>,
        #[command(flatten)]
        model: ModelFlags,
    },
    /// Mean, variance and output density of a surrogate.
    Stats {
        #[command(flatten)]
        common: Common,
        /// Surrogate file (default: <out>/surrogate.json).
        #[arg(long)]
        surrogate: Option<PathBuf>,
        /// Mixture draws used for the density estimate.
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
        #[arg(long, default_value_t = 50)]
        bins: usize,
    },
    /// Draw seeded samples from the mixture.
    Sample {
        #[command(flatten)]
        common: Common,
        /// Number of draws.
        #[arg(short, long, default_value_t = 1000)]
        n: usize,
    },
}

#[derive(Args, Debug, Clone)]
struct Common {
    /// Mixture JSON file, or `builtin:ro6` / `builtin:filter4`.
    #[arg(long)]
    config: String,
    /// Surrogate polynomial order p.
    #[arg(long, default_value_t = 2)]
    order: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args, Debug, Clone)]
struct SolverFlags {
    /// Residual tolerance for a converged rule.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Monte Carlo candidates for node initialization (default 10 * N_2p).
    #[arg(long)]
    candidates: Option<usize>,
    #[arg(long, default_value_t = 1.5)]
    increase_factor: f64,
    #[arg(long, default_value_t = 200)]
    max_iters: usize,
}

#[derive(Args, Debug, Clone)]
#[group(required = true, multiple = false)]
struct ModelFlags {
    /// Builtin benchmark, e.g. `builtin:ro6`.
    #[arg(long)]
    model: Option<String>,
    /// Values CSV produced externally, one row per node.
    #[arg(long)]
    values: Option<PathBuf>,
    /// Command reading nodes on stdin and printing one value per line.
    #[arg(long)]
    model_cmd: Option<String>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Basis(common) => commands::basis(&common),
        Command::Quadrature { common, solver } => commands::quadrature(&common, &solver),
        Command::Surrogate {
            common,
            rule,
            model,
        } => commands::surrogate(&common, rule, &model),
        Command::Stats {
            common,
            surrogate,
            samples,
            bins,
        } => commands::stats(&common, surrogate, samples, bins),
        Command::Sample { common, n } => commands::sample(&common, n),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use period_dynamics::commands;

/// Period-domain dynamics over indefinite integral lattices: classification
/// of period points, monodromy random walks, and twistor chain construction.
#[derive(Parser)]
#[command(name = "period-dynamics", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Print rank, signature, determinant, Fujiki constant, and dimensions
    LatticeInfo {
        /// Lattice JSON file
        #[arg(long)]
        lattice: PathBuf,
    },
    /// Classify a period point as ergodic or closed-orbit (exit 0 / 3)
    Classify {
        #[arg(long)]
        lattice: PathBuf,
        /// Period point JSON file
        #[arg(long)]
        period: PathBuf,
        /// Coordinate bound for the Neron-Severi enumeration
        #[arg(long, default_value_t = period_dynamics_core::DEFAULT_HEIGHT_BOUND)]
        height_bound: i64,
        /// Output directory for verdict.json
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Random walk on the period space plus chart-coverage diagnostics
    Walk {
        #[arg(long)]
        lattice: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        steps: u64,
        /// Trajectory checkpoint interval
        #[arg(long, default_value_t = 1000)]
        checkpoint_every: u64,
        /// Height bound for reflection generator construction
        #[arg(long, default_value_t = 2)]
        height_bound: i64,
        /// Number of reference planes in the coverage chart
        #[arg(long, default_value_t = 1000)]
        reference_count: usize,
        /// Coefficient bound of the reference chart sampler
        #[arg(long, default_value_t = 1.0)]
        coefficient_bound: f64,
        /// Coverage radius in the plane metric
        #[arg(long, default_value_t = 0.15)]
        epsilon: f64,
        /// Optional start plane JSON (default: a chart sample)
        #[arg(long)]
        start: Option<PathBuf>,
        /// Output directory for trajectory.csv, coverage.json, generators.json
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Connect two planes by a chain of generic twistor curves (exit 0 / 5)
    Chain {
        #[arg(long)]
        lattice: PathBuf,
        /// Endpoints JSON file with "from" and "to" planes
        #[arg(long)]
        endpoints: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.5)]
        ball_radius: f64,
        #[arg(long, default_value_t = 32)]
        max_steps: usize,
        /// Height bound for the genericity certificates
        #[arg(long, default_value_t = period_dynamics_core::DEFAULT_HEIGHT_BOUND)]
        height_bound: i64,
        /// Output directory for chain.json
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Recover the primitive form and constant from the degree-2n evaluator
    FujikiRecover {
        #[arg(long)]
        lattice: PathBuf,
        /// Output directory for recovery.json
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::LatticeInfo { lattice } => commands::lattice_info(lattice),
        Command::Classify {
            lattice,
            period,
            height_bound,
            out,
        } => commands::classify(lattice, period, *height_bound, out),
        Command::Walk {
            lattice,
            seed,
            steps,
            checkpoint_every,
            height_bound,
            reference_count,
            coefficient_bound,
            epsilon,
            start,
            out,
        } => commands::walk(
            lattice,
            *seed,
            *steps,
            *checkpoint_every,
            *height_bound,
            *reference_count,
            *coefficient_bound,
            *epsilon,
            start.as_deref(),
            out,
        ),
        Command::Chain {
            lattice,
            endpoints,
            seed,
            ball_radius,
            max_steps,
            height_bound,
            out,
        } => commands::chain(
            lattice,
            endpoints,
            *seed,
            *ball_radius,
            *max_steps,
            *height_bound,
            out,
        ),
        Command::FujikiRecover { lattice, out } => commands::fujiki_recover(lattice, out),
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code() as u8)
        }
    }
}

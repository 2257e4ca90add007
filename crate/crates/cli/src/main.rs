//! Benchmark and verification front end for the geodesic optimization
//! library.
//!
//! Exit codes: 0 success, 2 configuration error, 3 numerical failure,
//! 4 verified-inequality violation.

mod config;
mod error;
mod experiment;
mod gradcheck;
mod log;
mod run;
mod verify;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use error::CliError;

#[derive(Parser)]
#[command(
    name = "ragd-bench",
    about = "Riemannian accelerated gradient descent benchmarks and verification",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configured optimization benchmark; writes CSV traces and a
    /// JSON summary.
    Run {
        /// Experiment configuration file (TOML).
        #[arg(long)]
        config: PathBuf,
        /// Override the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Override the configured output directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte Carlo verification of the comparison-geometry inequalities.
    VerifyGeometry {
        /// Which check to run: hyperbolic-triangles, spherical-triangles,
        /// distortion-sphere, distortion-hyperbolic, distortion-euclidean,
        /// or all.
        #[arg(long, default_value = "all")]
        model: String,
        /// Samples per model.
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write report.json here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact big-integer verification of the two multinomial identities.
    VerifyIdentities {
        /// Check all 0 <= q <= p <= p_max (cap 20).
        #[arg(long, default_value_t = 12)]
        p_max: u64,
        /// Write report.json here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite-difference gradient checks and convexity/smoothness
    /// inequality sweeps for the configured objective.
    GradCheck {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Write grad-check.json here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Run { config, seed, out } => run::cmd_run(&config, seed, out),
        Command::VerifyGeometry { model, samples, seed, out } => {
            verify::cmd_verify_geometry(&model, samples, seed, out)
        }
        Command::VerifyIdentities { p_max, out } => verify::cmd_verify_identities(p_max, out),
        Command::GradCheck { config, seed, out } => {
            gradcheck::cmd_grad_check(&config, seed, out)
        }
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli) {
        eprintln!("error: {}", e.message());
        std::process::exit(e.exit_code());
    }
}

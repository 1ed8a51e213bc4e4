//! Command-line front end for `spectral-transport`.
//!
//! [`run`] executes a parsed command and returns the text to print together with the exit code,
//! so the whole interface can be exercised without spawning processes.

pub mod commands;
pub mod config;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::{run, Outcome};
pub use config::{ConfigError, TripleConfig};

/// Exit codes.
pub mod exit {
    pub const OK: i32 = 0;
    pub const CONFIG: i32 = 1;
    pub const NOT_CONVERGED: i32 = 2;
    pub const INFINITE: i32 = 3;
    pub const CHECK_FAILED: i32 = 4;
}

/// Environment variable capping the worker thread count (0 or unset: automatic).
pub const THREADS_ENV: &str = "SPECTRAL_TRANSPORT_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "spectral-transport",
    version,
    about = "Spectral distance and spectral-cost transport on finite spectral triples"
)]
pub struct Cli {
    /// Emit machine-readable JSON.
    #[arg(long, global = true)]
    pub json: bool,
    /// Emit CSV where a table is produced.
    #[arg(long, global = true, conflicts_with = "json")]
    pub csv: bool,
    /// Absolute tolerance of the distance solver (overrides the config).
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    /// Seed for randomized checks.
    #[arg(long, global = true, default_value_t = 42)]
    pub seed: u64,
    /// Largest sample count of the M₂(ℂ) probe.
    #[arg(long, global = true, default_value_t = 128)]
    pub samples: usize,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Spectral distance between two states.
    Distance {
        config: PathBuf,
        /// State name from the config, `pure:K` (1-based), `bloch:X,Y,Z` or comma-separated weights.
        phi: String,
        psi: String,
    },
    /// Wasserstein distance with the pure-state spectral distance as cost.
    Wasserstein {
        config: PathBuf,
        phi: String,
        psi: String,
    },
    /// Both distances and their gap.
    Compare {
        config: PathBuf,
        phi: String,
        psi: String,
    },
    /// Spectral distances between all pure states.
    CostMatrix { config: PathBuf },
    /// Distances over a regular grid of the three-point simplex, as CSV.
    GridScan {
        config: PathBuf,
        /// Points per simplex edge.
        #[arg(long, default_value_t = 5)]
        resolution: usize,
        /// Fixed second state; without it every ordered pair of grid points is scanned.
        #[arg(long)]
        reference: Option<String>,
    },
    /// Runs every built-in check and prints a pass/fail summary.
    ReproPaper,
}

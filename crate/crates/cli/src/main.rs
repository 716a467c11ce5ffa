//! Batch front end over the measurement library: classify measurement
//! files, compile and verify remote POVM protocols, reproduce the
//! two-outcome filtering example, and sweep seeded random suites.
//!
//! Exit codes: 0 success, 1 usage, 2 invalid input, 3 invariant failure.

mod commands;

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "repovm",
    version,
    about = "Remote generalized measurements over a shared entangled resource"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum RunMode {
    /// Full branch expansion with exact probabilities.
    Exact,
    /// Exact verification plus seeded shot counts.
    Sampled,
}

#[derive(Subcommand)]
enum Command {
    /// Classify a measurement file and decompose it into an orthogonal frame.
    Analyze {
        /// Measurement JSON file (kind: povm or kraus).
        #[arg(long)]
        input: PathBuf,
        /// Write the JSON report here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compile a POVM for remote execution and verify it against local statistics.
    RemoteRun {
        /// Measurement JSON file (kind: povm).
        #[arg(long)]
        input: PathBuf,
        /// Write the JSON report here.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = RunMode::Exact)]
        mode: RunMode,
        /// Shot count; required with --mode sampled.
        #[arg(long)]
        shots: Option<u64>,
        /// Base seed; required with --mode sampled.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Run the two-outcome filtering protocol for both prepared signs.
    Fig1 {
        /// Smaller amplitude of the prepared pair; normalized before use.
        #[arg(long)]
        alpha: f64,
        /// Larger amplitude of the prepared pair.
        #[arg(long)]
        beta: f64,
        /// Sampled shot count; requires --seed.
        #[arg(long)]
        shots: Option<u64>,
        /// Seed for the sampled shots.
        #[arg(long)]
        seed: Option<u64>,
        /// Write the JSON report here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Compare the entanglement a POVM can create against its cost.
    Capability {
        /// Measurement JSON file (kind: povm).
        #[arg(long)]
        input: PathBuf,
        /// Write the JSON report here.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Random search trials (default 1000).
        #[arg(long)]
        shots: Option<u64>,
        /// Seed for the random search (default 0).
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Decompose and remotely run seeded random POVMs, checking every invariant.
    RandomSuite {
        /// Qubit count, 1 or 2.
        #[arg(long)]
        n: usize,
        /// Number of cases.
        #[arg(long)]
        count: u64,
        /// Base seed; case i derives its own sub-seed (default 0).
        #[arg(long)]
        seed: Option<u64>,
        /// Write the JSON report here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match commands::dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            ExitCode::from(failure.code)
        }
    }
}

//! Command-line surface: validate scenario files, solve for optimal
//! recommendation policies, learn trust regions from an oracle, sweep
//! parameters into long-format CSV, and emit the full case-study bundle.

mod commands;
mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Exit codes: 0 success, 1 domain violation, 2 input error, 3 numerical or
/// budget failure.
#[derive(Debug)]
pub enum Failure {
    Domain(String),
    Input(String),
    Numerical(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Domain(_) => 1,
            Failure::Input(_) => 2,
            Failure::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Domain(m) | Failure::Input(m) | Failure::Numerical(m) => m,
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Input(format!("io error: {e}"))
    }
}

#[derive(Parser)]
#[command(
    name = "zetar",
    about = "Compliance recommendation toolkit: trustworthy-policy solving, learning, and sweeps",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a scenario file against the model invariants.
    Validate {
        /// Scenario JSON file.
        scenario: PathBuf,
    },
    /// Compute the optimal recommendation policy for a scenario.
    Solve {
        scenario: PathBuf,
        /// Customization level: a positive real or "inf".
        #[arg(long, default_value = "inf")]
        eta: String,
        /// Default policy anchoring the KL term: "uniform" or a JSON file
        /// with a nested row array.
        #[arg(long, default_value = "uniform")]
        default_policy: String,
        /// Output directory (ZETAR_OUT overrides).
        #[arg(long, default_value = "zetar-out")]
        out: PathBuf,
    },
    /// Learn the trusted-policy regions through oracle queries, then solve
    /// on the learned constraints.
    Learn {
        scenario: PathBuf,
        /// Binary-search accuracy in (0, 1).
        #[arg(long, default_value_t = 1e-3)]
        epsilon: f64,
        /// Oracle mode: "direct" or "episodic".
        #[arg(long, default_value = "direct")]
        mode: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "zetar-out")]
        out: PathBuf,
    },
    /// Sweep a parameter and solve at every grid point.
    Sweep {
        scenario: PathBuf,
        /// One of: prior_hr, c_d_ic, policy.
        #[arg(long)]
        param: String,
        /// Grid: "start:stop:step" or a comma-separated list.
        #[arg(long)]
        grid: String,
        #[arg(long, default_value = "zetar-out")]
        out: PathBuf,
    },
    /// Emit the full case-study bundle: thresholds, sweeps, surfaces,
    /// regions, and the learner walkthrough.
    Casestudy {
        /// "reference" or a JSON file with a case_study parameter block.
        #[arg(long, default_value = "reference")]
        params: String,
        #[arg(long, default_value = "zetar-out")]
        out: PathBuf,
    },
}

/// `ZETAR_OUT` overrides any `--out` flag.
fn resolve_out(flag: PathBuf) -> PathBuf {
    match std::env::var_os("ZETAR_OUT") {
        Some(dir) if !dir.is_empty() => PathBuf::from(dir),
        _ => flag,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Validate { scenario } => commands::validate(&scenario),
        Command::Solve {
            scenario,
            eta,
            default_policy,
            out,
        } => commands::solve(&scenario, &eta, &default_policy, &resolve_out(out)),
        Command::Learn {
            scenario,
            epsilon,
            mode,
            seed,
            out,
        } => commands::learn(&scenario, epsilon, &mode, seed, &resolve_out(out)),
        Command::Sweep {
            scenario,
            param,
            grid,
            out,
        } => commands::sweep(&scenario, &param, &grid, &resolve_out(out)),
        Command::Casestudy { params, out } => commands::casestudy(&params, &resolve_out(out)),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            eprintln!("error: {}", failure.message());
            ExitCode::from(failure.code())
        }
    }
}

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use fracns_cli::config::Format;
use fracns_cli::run::{execute, Command, Invocation};

/// Mild-solution experiments for the fractional Navier–Stokes equations.
#[derive(Parser)]
#[command(name = "fracns", version)]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides run.out_dir.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Seed for every random input; overrides the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Encoding of tabular outputs.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Suppress the stdout summary.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Variable-exponent norm of an FNSV field.
    Norm {
        #[arg(long)]
        field: Option<PathBuf>,
    },
    /// Heat-kernel profile table, optionally with a decay report.
    Kernel {
        #[arg(long)]
        verify: bool,
    },
    /// Ensemble bound check for a harmonic-analysis operator.
    OperatorsCheck,
    /// Exponential-Euler time march.
    Solve,
    /// Picard iteration of the mild formulation.
    Picard,
    /// Local-theorem sweep and verdict.
    Theorem1 {
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Global-theorem sweep and verdict.
    Theorem2 {
        #[arg(long)]
        trajectory: Option<PathBuf>,
    },
    /// Summarize and re-verify the manifests in the output directory.
    Report,
}

fn main() {
    let cli = Cli::parse();
    let cmd = match cli.command {
        Cmd::Norm { field } => Command::Norm { field },
        Cmd::Kernel { verify } => Command::Kernel { verify },
        Cmd::OperatorsCheck => Command::OperatorsCheck,
        Cmd::Solve => Command::Solve,
        Cmd::Picard => Command::Picard,
        Cmd::Theorem1 { trajectory } => Command::Theorem1 { trajectory },
        Cmd::Theorem2 { trajectory } => Command::Theorem2 { trajectory },
        Cmd::Report => Command::Report,
    };
    let inv = Invocation {
        config: cli.config,
        out_dir: cli.out_dir,
        seed: cli.seed,
        format: cli.format,
        quiet: cli.quiet,
    };
    std::process::exit(execute(&cmd, &inv));
}

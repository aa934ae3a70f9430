//! Command-line laboratory for the collective-spin chaos toolkit.
//!
//! One subcommand per experiment family: spectral statistics (`levels`),
//! QFI growth and plateaus (`qfi-evolve`), system-size sweeps
//! (`scaling-sweep`), the classical/quantum chaos border
//! (`phase-diagram`), Haar-average cross-checks (`random-qfi`),
//! phase-space portraits (`wigner`), and Krylov-dimension probes
//! (`krylov-dim`).
//!
//! Every run resolves its effective settings as CLI flags over config
//! file over built-in defaults, writes a manifest recording all of them
//! *before* any result file, and only then computes. All randomness is
//! seeded and all reductions are ordered, so a run that reproduces a
//! manifest reproduces its CSV files byte for byte.
//!
//! Exit codes: 0 success, 2 bad arguments or inputs, 3 capacity
//! exceeded, 4 numerical or environment failure.

mod cmd;
mod common;
mod manifest;
mod svg;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "spinchaos",
    version,
    about = "Experiment runner for collective-spin chaos and QFI saturation studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Level-spacing statistics of one model against the Wigner surmises.
    Levels(cmd::levels::Args),
    /// QFI time evolution: trace, early growth rate, plateau vs prediction.
    QfiEvolve(cmd::qfi_evolve::Args),
    /// Time-averaged QFI across system sizes with a power-law fit.
    ScalingSweep(cmd::scaling::Args),
    /// Classical Lyapunov map vs quantum QFI saturation over (A, C).
    PhaseDiagram(cmd::phase::Args),
    /// Monte-Carlo random-state QFI against the closed-form average.
    RandomQfi(cmd::random_qfi::Args),
    /// Wigner quasi-probability fields along a trajectory.
    Wigner(cmd::wigner::Args),
    /// Krylov dimension explored from a chosen initial state.
    KrylovDim(cmd::krylov::Args),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Levels(args) => cmd::levels::run(args),
        Command::QfiEvolve(args) => cmd::qfi_evolve::run(args),
        Command::ScalingSweep(args) => cmd::scaling::run(args),
        Command::PhaseDiagram(args) => cmd::phase::run(args),
        Command::RandomQfi(args) => cmd::random_qfi::run(args),
        Command::Wigner(args) => cmd::wigner::run(args),
        Command::KrylovDim(args) => cmd::krylov::run(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(common::exit_code(&err))
        }
    }
}

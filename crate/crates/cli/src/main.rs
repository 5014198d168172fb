//! `relayrate`: rate evaluation, max-min optimization, SNR sweeps, schedule
//! rendering and oracle verification for Gaussian relay chains.

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use relayrate_cli::{commands, OptimizeArgs, ScenarioArgs, ScheduleArgs, VerifyArgs};

#[derive(Parser)]
#[command(
    name = "relayrate",
    version,
    about = "Decode-forward achievable rates on Gaussian relay chains, \
             with bounded-view (myopic) and full-view cooperation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate per-node reception rates for the scenario's power split
    Rate(ScenarioArgs),
    /// Maximize the end-to-end rate over feasible power splits
    Optimize(OptimizeArgs),
    /// Optimize at every sweep value and view depth, one CSV row per value
    Sweep(OptimizeArgs),
    /// Render or dump the block-Markov transmission schedule
    Schedule(ScheduleArgs),
    /// Cross-check closed-form rates against the covariance oracle
    Verify(VerifyArgs),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Rate(args) => commands::rate(&args),
        Command::Optimize(args) => commands::optimize(&args),
        Command::Sweep(args) => commands::sweep(&args),
        Command::Schedule(args) => commands::schedule(&args),
        Command::Verify(args) => commands::verify(&args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}

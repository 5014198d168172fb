//! Library side of the `relayrate` command-line tool: scenario schema,
//! deterministic output formatting and the subcommand implementations.
//! The binary in `main.rs` only parses arguments and maps errors to exit
//! codes (0 success, 2 usage/config, 3 budget exceeded, 4 verification
//! failure).

pub mod commands;
pub mod format;
pub mod scenario;

use std::path::PathBuf;

use clap::{Args, ValueEnum};

/// Error carrying the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    message: String,
    code: u8,
}

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: 2,
        }
    }

    pub fn verification(message: impl Into<String>) -> Self {
        Self {
            message: message.into(),
            code: 4,
        }
    }

    pub fn message(&self) -> &str {
        &self.message
    }

    pub fn code(&self) -> u8 {
        self.code
    }
}

impl From<relayrate_core::Error> for CliError {
    fn from(err: relayrate_core::Error) -> Self {
        let code = match err {
            relayrate_core::Error::BudgetExceeded { .. } => 3,
            _ => 2,
        };
        Self {
            message: err.to_string(),
            code,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(err: std::io::Error) -> Self {
        Self::usage(format!("io error: {err}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
    Text,
}

#[derive(Args, Clone)]
pub struct ScenarioArgs {
    /// Scenario JSON file
    #[arg(long, value_name = "PATH", conflicts_with = "preset")]
    pub scenario: Option<PathBuf>,
    /// Built-in scenario: equal_spacing_5 or node2_close_5
    #[arg(long, value_name = "NAME")]
    pub preset: Option<String>,
    /// View depth (overrides the scenario's `k`)
    #[arg(long)]
    pub k: Option<usize>,
    /// Output format (default: csv for rate/optimize/sweep, text for
    /// schedule/verify)
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Write output to this file instead of stdout
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Grid resolution; must divide 1 (overrides the scenario)
    #[arg(long)]
    pub resolution: Option<f64>,
    /// Grid evaluation budget (overrides the scenario)
    #[arg(long)]
    pub budget: Option<u64>,
    /// Exhaust relay orders (full view only)
    #[arg(long)]
    pub permute: bool,
}

#[derive(Args)]
pub struct ScheduleArgs {
    /// Node count T
    #[arg(long)]
    pub nodes: usize,
    /// View depth k
    #[arg(long)]
    pub k: usize,
    /// Number of source messages B
    #[arg(long)]
    pub blocks: usize,
    /// First block to render (default 1)
    #[arg(long)]
    pub from: Option<usize>,
    /// Last block to render (default B + T - 2)
    #[arg(long)]
    pub to: Option<usize>,
    /// Output format: text (default) or json
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Write output to this file instead of stdout
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Number of randomized split trials
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    /// RNG seed for the trial splits
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

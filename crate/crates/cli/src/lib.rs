// SPDX-License-Identifier: Apache-2.0

//! The `ecoprompt` command line: serve the API, estimate one query offline,
//! verify a session transcript and run headless farm simulations.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or validation error.

use std::io::Write;
use std::net::IpAddr;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ecoprompt_core::farm::policy::Policy;
use ecoprompt_core::provider::ProviderMode;
use ecoprompt_core::{Config, ConfigError};
use thiserror::Error;

pub mod estimate;
pub mod replay;
pub mod serve;
pub mod simulate;

#[derive(Debug, Parser)]
#[command(name = "ecoprompt", version, about = "Footprint calculator and farm game service")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the HTTP API until interrupted.
    Serve(ServeArgs),
    /// Estimate the footprint of one query.
    Estimate(EstimateArgs),
    /// Recompute a session transcript and check its logged totals.
    Replay(ReplayArgs),
    /// Play one farm game headlessly and print its trajectory as CSV.
    Simulate(SimulateArgs),
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: IpAddr,
    /// JSON config file; bundled defaults when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Directory holding the session and game event logs.
    #[arg(long, default_value = "data")]
    pub data_dir: PathBuf,
    /// Completion provider: mock or live. Defaults to the config's mode.
    #[arg(long)]
    pub provider: Option<ProviderMode>,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    #[arg(long, default_value_t = 0)]
    pub input_tokens: u64,
    #[arg(long)]
    pub output_tokens: u64,
    /// Measured latency in seconds; modeled from the token count otherwise.
    #[arg(long, allow_negative_numbers = true)]
    pub latency: Option<f64>,
    /// JSON file with `model` and/or `datacenter` profiles overriding the config.
    #[arg(long)]
    pub profile: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Print one JSON object instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Session log (`.jsonl`) written by the service.
    pub transcript: PathBuf,
    /// Profiles used when the transcript does not pin its own.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// never_ai, always_ai or threshold(K) with K in 0..=100.
    #[arg(long, default_value = "never_ai")]
    pub policy: Policy,
    #[arg(long, default_value_t = 5000)]
    pub max_ticks: u64,
    /// Write the CSV here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.to_string())
    }
}

pub(crate) fn load_config(path: Option<&Path>) -> Result<Config, CliError> {
    Ok(Config::load_or_default(path)?)
}

/// Runs a parsed command. `serve` blocks until shutdown.
pub fn run(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Serve(a) => serve::run(a, out),
        Command::Estimate(a) => estimate::run(a, out),
        Command::Replay(a) => replay::run(a, out),
        Command::Simulate(a) => simulate::run(a, out, err),
    }
}

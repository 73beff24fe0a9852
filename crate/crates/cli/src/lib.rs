//! `ehcap` command line: rate tables, architecture comparisons and buffer
//! simulations, written as CSV.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;

mod commands;
pub mod format;
pub mod spec;

pub use commands::{architectures, capacity, run, simulate, Output};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid specification: {0}")]
    Spec(String),
    #[error(transparent)]
    Core(#[from] ehcap_core::Error),
    #[error("energy infeasibility detected: {0}")]
    Infeasible(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV error: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 for a bad specification, 3 for a solver failure, 4 when a policy
    /// overspends, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        use ehcap_core::Error as E;
        match self {
            CliError::Spec(_) => 2,
            CliError::Core(E::InvalidModel(_) | E::InvalidParameter(_) | E::MissingDistribution { .. }) => 2,
            CliError::Core(E::QuadratureFailure { .. } | E::NonConvergence { .. } | E::FitFailure { .. }) => {
                3
            }
            CliError::Core(E::InfeasibleEnergy { .. }) | CliError::Infeasible(_) => 4,
            CliError::Io(_) | CliError::Csv(_) => 1,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "ehcap",
    version,
    about = "Capacity and achievable rates of energy-harvesting AWGN transmitters"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Capacity or achievable rate for one configuration or a sweep.
    Capacity(CapacityArgs),
    /// Harvest-use, store-first and use-first rates against storage efficiency.
    Architectures(ArchitecturesArgs),
    /// Simulate buffer, policy and channel slot by slot.
    Simulate(SimulateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Unit {
    Nats,
    Bits,
}

impl Unit {
    pub fn convert(self, nats: f64) -> f64 {
        match self {
            Unit::Nats => nats,
            Unit::Bits => nats / std::f64::consts::LN_2,
        }
    }
}

#[derive(Clone, Debug, Args)]
pub struct OutputArgs {
    /// Noise variance.
    #[arg(long, default_value_t = 1.0)]
    pub sigma2: f64,
    #[arg(long, value_enum, default_value_t = Unit::Nats)]
    pub unit: Unit,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write a gnuplot script that plots the CSV (requires --out).
    #[arg(long)]
    pub plot: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Mode {
    /// Infinite lossless buffer.
    Ideal,
    /// No buffer: per-slot peak and power both equal to the harvest.
    Hu,
    /// Processing energy E[Z] per transmitted symbol, with or without sleep.
    Pe,
    /// Upper bound for a buffer of size gamma.
    Finite,
    /// Lossy store-first buffer.
    Hsu,
    /// Lossy use-first buffer.
    Hus,
    /// Sleep-wake comparison: never sleep, sleep a quarter of the time, optimal.
    SleepCompare,
}

#[derive(Clone, Debug, Args)]
pub struct CapacityArgs {
    #[arg(long, value_enum, default_value_t = Mode::Ideal)]
    pub mode: Mode,
    /// Harvest description: example1, const:Y, discrete:v1,v2,.. or
    /// discrete:v1@p1,.., chi2:S, periodic:A|B.
    #[arg(long, default_value = "example1")]
    pub harvest: String,
    /// Mean harvest; rescales the harvest model.
    #[arg(long)]
    pub ey: Option<f64>,
    /// Mean processing energy per transmitted symbol.
    #[arg(long, default_value_t = 1.0)]
    pub ez: f64,
    #[arg(long, default_value_t = 1.0)]
    pub beta1: f64,
    #[arg(long, default_value_t = 0.0)]
    pub beta2: f64,
    /// Buffer size for the finite mode.
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Processing-energy mode without a sleep mode.
    #[arg(long)]
    pub no_sleep: bool,
    /// var:min:max:steps[:log] with var one of ey, ez, sigma2, gamma, beta1, beta2.
    #[arg(long)]
    pub sweep: Option<String>,
    /// Amplitude grid size of the numerical solver.
    #[arg(long, default_value_t = 501)]
    pub grid_points: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Debug, Args)]
pub struct ArchitecturesArgs {
    #[arg(long, default_value = "example1")]
    pub harvest: String,
    #[arg(long, default_value_t = 0.0)]
    pub beta2: f64,
    /// Storage-efficiency axis, beta1:min:max:steps[:log].
    #[arg(long, default_value = "beta1:0.05:1:20")]
    pub sweep: String,
    #[arg(long, default_value_t = 501)]
    pub grid_points: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Architecture {
    Hsu,
    Hu,
    Hus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PolicyKind {
    /// Gaussian symbols clipped to the available energy.
    Truncated,
    /// Same as truncated, with the power read as a budget.
    Budgeted,
    /// ±√(harvest) with a fair sign.
    Peak,
    /// Per-harvest optimal laws from the harvest-use solver (discrete harvests).
    HarvestUse,
    /// Sleep with probability --sleep-p, otherwise Gaussian with processing energy --ez.
    SleepWake,
    /// Never transmit.
    Silent,
}

#[derive(Clone, Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, default_value = "example1")]
    pub harvest: String,
    #[arg(long, value_enum, default_value_t = Architecture::Hsu)]
    pub arch: Architecture,
    #[arg(long, default_value_t = 1.0)]
    pub beta1: f64,
    #[arg(long, default_value_t = 0.0)]
    pub beta2: f64,
    #[arg(long, default_value_t = f64::INFINITY)]
    pub gamma: f64,
    #[arg(long, value_enum, default_value_t = PolicyKind::Truncated)]
    pub policy: PolicyKind,
    /// Symbol variance; defaults to the architecture's sustainable budget
    /// less a 0.1% back-off.
    #[arg(long)]
    pub power: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    pub sleep_p: f64,
    /// Processing energy per transmitted symbol (sleep-wake policy).
    #[arg(long, default_value_t = 0.0)]
    pub ez: f64,
    /// Number of slots.
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Histogram bins for the empirical rate.
    #[arg(long, default_value_t = 201)]
    pub bins: usize,
    /// Summary CSV destination; stderr when absent.
    #[arg(long)]
    pub summary: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

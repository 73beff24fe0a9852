//! Capacity and achievable rates of an energy-harvesting transmitter over an
//! AWGN channel.
//!
//! The crate is organised around the pieces of such a node:
//!
//! - [`harvest`]: the harvest process `Y_k` and its moments,
//! - [`buffer`]: energy-buffer recursions for the harvest-store-use (HSU),
//!   harvest-use (HU) and harvest-use-store (HUS) architectures,
//! - [`policy`]: per-slot signalling rules that never spend more energy than
//!   is available,
//! - [`capacity`]: closed-form rates, mutual-information quadrature and a
//!   cost-constrained Blahut-Arimoto solver,
//! - [`sim`]: a Monte-Carlo engine that drives all of the above forward in
//!   time and summarises the resulting trace.
//!
//! All rates are in nats.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod buffer;
pub mod capacity;
pub mod error;
pub mod harvest;
pub mod policy;
mod quad;
pub mod rng;
pub mod sim;

pub use buffer::{Architecture, BufferConfig, BufferState};
pub use capacity::{
    awgn_capacity, hu_capacity, hus_budget, kt_density_check, mutual_information, onoff_decomposition,
    pe_capacity, peak_average_capacity, rate_table, AwgnChannel, CapacityResult, DensityGrid, HuCapacity,
    InputDistribution, KtReport, OnOffParts, RateQuery, SolverOptions,
};
pub use error::{Error, Result};
pub use harvest::HarvestModel;
pub use policy::{budget, Backoff, BudgetFamily, BudgetInputs, Policy, Symbol, SymbolLaw};
pub use sim::{SimReport, SimTrace};

/// Tolerance used when checking that a slot spends no more than it has.
pub const ENERGY_TOLERANCE: f64 = 1e-12;

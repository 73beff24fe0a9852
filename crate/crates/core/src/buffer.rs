//! Energy-buffer recursions.
//!
//! - HSU (harvest-store-use): `E' = min(γ, ((E - T) - β₂)⁺ + β₁·Y)`, only the
//!   stored energy `E` can be spent in the current slot.
//! - HU (harvest-use): no storage, `T ≤ Y`, the state is always 0.
//! - HUS (harvest-use-store): the fresh harvest is spent first and only the
//!   remainder is stored,
//!   `E' = min(γ, ((E + β₁(Y - T)⁺ - (T - Y)⁺)⁺ - β₂)⁺)`.
//!
//! Overflow above `γ` is discarded after the recursion.

use crate::error::{Error, Result};
use crate::ENERGY_TOLERANCE;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Architecture {
    Hsu,
    Hu,
    Hus,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BufferConfig {
    pub architecture: Architecture,
    /// Storage efficiency, in (0, 1].
    pub beta1: f64,
    /// Leakage per slot, >= 0.
    pub beta2: f64,
    /// Capacity, in (0, inf].
    pub gamma: f64,
}

impl BufferConfig {
    pub fn new(architecture: Architecture, beta1: f64, beta2: f64, gamma: f64) -> Result<Self> {
        if !(beta1 > 0.0 && beta1 <= 1.0) {
            return Err(Error::InvalidParameter(format!("beta1 = {beta1} must lie in (0, 1]")));
        }
        if !(beta2 >= 0.0 && beta2.is_finite()) {
            return Err(Error::InvalidParameter(format!("beta2 = {beta2} must be >= 0")));
        }
        if !(gamma > 0.0) {
            return Err(Error::InvalidParameter(format!("gamma = {gamma} must be > 0")));
        }
        Ok(Self { architecture, beta1, beta2, gamma })
    }

    /// Lossless, unbounded buffer.
    pub fn ideal(architecture: Architecture) -> Self {
        Self { architecture, beta1: 1.0, beta2: 0.0, gamma: f64::INFINITY }
    }

    /// Energy that may be spent in the current slot.
    pub fn available_energy(&self, state: BufferState, y: f64) -> f64 {
        match self.architecture {
            Architecture::Hsu => state.energy,
            Architecture::Hu => y,
            Architecture::Hus => state.energy + y,
        }
    }

    /// Advance one slot after spending `t` and harvesting `y`.
    pub fn step(&self, state: BufferState, t: f64, y: f64) -> Result<BufferState> {
        let available = self.available_energy(state, y);
        if t > available + ENERGY_TOLERANCE || t < 0.0 {
            return Err(Error::InfeasibleEnergy { requested: t, available });
        }
        let (b1, b2) = (self.beta1, self.beta2);
        let e = state.energy;
        let next = match self.architecture {
            Architecture::Hsu => ((e - t) - b2).max(0.0) + b1 * y,
            Architecture::Hu => 0.0,
            Architecture::Hus => {
                let stored = b1 * (y - t).max(0.0);
                let drawn = (t - y).max(0.0);
                ((e + stored - drawn).max(0.0) - b2).max(0.0)
            }
        };
        Ok(BufferState { energy: next.min(self.gamma) })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct BufferState {
    pub energy: f64,
}

impl BufferState {
    pub fn new(energy: f64) -> Self {
        Self { energy }
    }

    /// `E_0 = 0`.
    pub fn empty() -> Self {
        Self { energy: 0.0 }
    }
}

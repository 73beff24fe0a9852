//! Per-slot signalling rules.
//!
//! Every rule maps the energy available in the slot, the slot's harvest and
//! the slot's random streams to a channel symbol and the energy it costs. No
//! rule ever spends more than is available.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::capacity::InputDistribution;
use crate::error::{Error, Result};
use crate::harvest::HarvestModel;
use crate::rng::{SlotRng, Stream};

/// Law of the untruncated symbol `X'` of a sleep-wake rule.
#[derive(Clone, Debug, PartialEq)]
pub enum SymbolLaw {
    /// Zero-mean Gaussian, drawn exactly as [`Policy::TruncatedGaussian`] draws.
    Gaussian { variance: f64 },
    /// Inverse-CDF draw from a tabulated law.
    Tabulated(InputDistribution),
}

impl SymbolLaw {
    fn draw(&self, draws: &SlotRng) -> f64 {
        match self {
            SymbolLaw::Gaussian { variance } => gaussian_draw(*variance, draws),
            SymbolLaw::Tabulated(dist) => dist.sample(draws.stream(Stream::Symbol).random::<f64>()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Policy {
    /// `X = sgn(X')·min(√E, |X'|)` with `X' ~ N(0, power)`.
    TruncatedGaussian { power: f64 },
    /// Draw from the peak-`√y` law configured for the slot's harvest `y`.
    HarvestUse { laws: Vec<(f64, InputDistribution)> },
    /// `X = ±√y` with a fair sign: spend the whole harvest every slot.
    HarvestPeak,
    /// Sleep with probability `p` (or when `E < Z`), otherwise transmit `X'`
    /// truncated to `√(E − Z)⁺` and pay `X² + Z`.
    SleepWake { p: f64, on: SymbolLaw, z_model: HarvestModel },
    /// Truncated Gaussian whose variance is an architecture budget.
    BudgetedGaussian { power: f64 },
}

/// What a policy emits for one slot.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Symbol {
    pub x: f64,
    /// Energy spent.
    pub t: f64,
    pub slept: bool,
    /// `|x| < |x'|`.
    pub truncated: bool,
}

impl Symbol {
    fn sleep() -> Self {
        Self { x: 0.0, t: 0.0, slept: true, truncated: false }
    }
}

fn gaussian_draw(variance: f64, draws: &SlotRng) -> f64 {
    let g: f64 = draws.stream(Stream::Symbol).sample(StandardNormal);
    variance.sqrt() * g
}

/// `sgn(x')·min(cap, |x'|)` with `sgn(0) = 1`, and whether clipping happened.
fn clip(x_prime: f64, cap: f64) -> (f64, bool) {
    let sign = if x_prime >= 0.0 { 1.0 } else { -1.0 };
    let mag = x_prime.abs();
    if mag > cap {
        (sign * cap, true)
    } else {
        (x_prime, false)
    }
}

impl Policy {
    pub fn truncated_gaussian(power: f64) -> Result<Self> {
        positive_power(power)?;
        Ok(Policy::TruncatedGaussian { power })
    }

    pub fn budgeted_gaussian(power: f64) -> Result<Self> {
        positive_power(power)?;
        Ok(Policy::BudgetedGaussian { power })
    }

    pub fn sleep_wake(p: f64, on: SymbolLaw, z_model: HarvestModel) -> Result<Self> {
        let policy = Policy::SleepWake { p, on, z_model };
        policy.validate()?;
        Ok(policy)
    }

    /// Sleep in every slot.
    pub fn always_sleep() -> Self {
        Policy::SleepWake {
            p: 1.0,
            on: SymbolLaw::Gaussian { variance: 1.0 },
            z_model: HarvestModel::constant(0.0).expect("valid"),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Policy::TruncatedGaussian { power } | Policy::BudgetedGaussian { power } => {
                positive_power(*power)
            }
            Policy::SleepWake { p, on, .. } => {
                if !(0.0..=1.0).contains(p) {
                    return Err(Error::InvalidParameter(format!("sleep probability {p} outside [0, 1]")));
                }
                if let SymbolLaw::Gaussian { variance } = on {
                    if !(*variance >= 0.0 && variance.is_finite()) {
                        return Err(Error::InvalidParameter(format!(
                            "symbol variance {variance} must be >= 0"
                        )));
                    }
                }
                Ok(())
            }
            Policy::HarvestUse { .. } | Policy::HarvestPeak => Ok(()),
        }
    }

    /// The slot's symbol and energy use given `e_avail` available energy and
    /// harvest `y_slot`.
    pub fn next_symbol(&self, e_avail: f64, y_slot: f64, draws: &SlotRng) -> Result<Symbol> {
        let e_avail = e_avail.max(0.0);
        match self {
            Policy::TruncatedGaussian { power } | Policy::BudgetedGaussian { power } => {
                let x_prime = gaussian_draw(*power, draws);
                let (x, truncated) = clip(x_prime, e_avail.sqrt());
                Ok(Symbol { x, t: (x * x).min(e_avail), slept: false, truncated })
            }
            Policy::HarvestUse { laws } => {
                let tol = 1e-9 * y_slot.max(1.0);
                let law = laws
                    .iter()
                    .find(|(y, _)| (y - y_slot).abs() <= tol)
                    .map(|(_, d)| d)
                    .ok_or(Error::MissingDistribution { harvest: y_slot })?;
                let x_prime = match law.as_symmetric_two_point() {
                    Some(a) => {
                        if draws.stream(Stream::Symbol).random::<bool>() {
                            a
                        } else {
                            -a
                        }
                    }
                    None => law.sample(draws.stream(Stream::Symbol).random::<f64>()),
                };
                let (x, truncated) = clip(x_prime, y_slot.min(e_avail).sqrt());
                Ok(Symbol { x, t: (x * x).min(e_avail), slept: false, truncated })
            }
            Policy::HarvestPeak => {
                let mag = y_slot.min(e_avail).sqrt();
                let x = if draws.stream(Stream::Symbol).random::<bool>() { mag } else { -mag };
                Ok(Symbol { x, t: (x * x).min(e_avail), slept: false, truncated: false })
            }
            Policy::SleepWake { p, on, z_model } => {
                let z = z_model.sample_with(&mut draws.stream(Stream::Processing), draws.slot);
                if e_avail < z {
                    return Ok(Symbol::sleep());
                }
                if *p > 0.0 && draws.stream(Stream::Sleep).random::<f64>() < *p {
                    return Ok(Symbol::sleep());
                }
                let x_prime = on.draw(draws);
                let (x, truncated) = clip(x_prime, (e_avail - z).max(0.0).sqrt());
                let t = if x != 0.0 { (x * x + z).min(e_avail) } else { 0.0 };
                Ok(Symbol { x, t, slept: false, truncated })
            }
        }
    }
}

fn positive_power(power: f64) -> Result<()> {
    if power > 0.0 && power.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("signalling power {power} must be > 0")))
    }
}

/// Architecture whose sustainable transmit energy [`budget`] computes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BudgetFamily {
    /// `E[Y]`
    Ideal,
    /// `E[Y] − E[Z]`
    ProcessingEnergy,
    /// `β₁E[Y] − β₂`
    Hsu,
    /// The harvest-use-store constant `c`.
    Hus,
}

#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct BudgetInputs {
    pub ey: f64,
    pub ez: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub c: f64,
}

/// Back-off `ε` applied to a budget, as a fraction of the budget.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Backoff {
    pub relative: f64,
}

impl Default for Backoff {
    fn default() -> Self {
        Self { relative: 1e-3 }
    }
}

impl Backoff {
    pub fn none() -> Self {
        Self { relative: 0.0 }
    }
}

/// Signalling variance a policy may use, `budget − ε`, or 0 when the budget
/// is not positive.
pub fn budget(family: BudgetFamily, inputs: BudgetInputs, backoff: Backoff) -> f64 {
    let raw = match family {
        BudgetFamily::Ideal => inputs.ey,
        BudgetFamily::ProcessingEnergy => inputs.ey - inputs.ez,
        BudgetFamily::Hsu => inputs.beta1 * inputs.ey - inputs.beta2,
        BudgetFamily::Hus => inputs.c,
    };
    if raw > 0.0 {
        raw * (1.0 - backoff.relative)
    } else {
        0.0
    }
}

//! Closed-form and numerically solved capacities.

mod distribution;
mod mi;
mod pe;
mod rates;
mod solver;

pub use distribution::{DensityGrid, InputDistribution};
pub use mi::{mutual_information, onoff_decomposition, OnOffParts};
pub use pe::{fixed_sleep_rate, kt_density_check, pe_capacity, KtReport};
pub use rates::{hus_budget, rate_table, RateQuery};

use crate::error::{Error, Result};
use crate::harvest::HarvestModel;
use solver::{blahut_arimoto, consolidate, Problem};

/// Number of equiprobable atoms used to discretise a chi-square harvest.
pub const HU_QUANTILE_ATOMS: usize = 64;

/// `W = X + N`, `N ~ N(0, σ²)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AwgnChannel {
    sigma2: f64,
}

impl AwgnChannel {
    pub fn new(sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::InvalidParameter(format!("noise variance {sigma2} must be > 0")));
        }
        Ok(Self { sigma2 })
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }
}

/// `0.5 ln(1 + P/σ²)`; non-positive powers give 0.
pub fn awgn_capacity(power: f64, channel: &AwgnChannel) -> f64 {
    if power <= 0.0 {
        return 0.0;
    }
    0.5 * (power / channel.sigma2).ln_1p()
}

/// Knobs of the grid solver.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverOptions {
    /// Input grid size; forced odd so that 0 is a grid point.
    pub grid_points: usize,
    /// Stop once the certificate gap falls below this.
    pub tolerance: f64,
    /// Largest gap accepted when the sweep budget runs out.
    pub accept_gap: f64,
    pub max_iterations: usize,
    /// Output-grid step in units of σ.
    pub output_step: f64,
    /// Grid atoms at or below this mass are dropped by consolidation.
    pub consolidation_threshold: f64,
    /// Initial multiplier bracket, in units of 1/σ².
    pub lambda_bracket: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            grid_points: 501,
            tolerance: 1e-6,
            accept_gap: 1e-4,
            max_iterations: 10_000,
            output_step: 0.125,
            consolidation_threshold: 1e-6,
            lambda_bracket: 100.0,
        }
    }
}

impl SolverOptions {
    fn odd_grid(&self) -> usize {
        let n = self.grid_points.max(3);
        n | 1
    }
}

/// Output of a capacity solve.
#[derive(Clone, Debug, PartialEq)]
pub struct CapacityResult {
    /// Nats per channel use.
    pub rate: f64,
    /// Maximising law as returned by the solver.
    pub dist: InputDistribution,
    /// `dist` with adjacent grid atoms merged into centroids.
    pub mass_points: Vec<(f64, f64)>,
    /// Upper bound minus `rate`, in nats.
    pub certificate_gap: f64,
    pub iterations: usize,
    /// Multiplier on the average-cost constraint (0 when slack).
    pub multiplier: f64,
}

impl CapacityResult {
    fn degenerate() -> Self {
        Self {
            rate: 0.0,
            dist: InputDistribution::zero(),
            mass_points: Vec::new(),
            certificate_gap: 0.0,
            iterations: 0,
            multiplier: 0.0,
        }
    }

    /// Probability of the atom at 0, i.e. of sleeping.
    pub fn sleep_probability(&self) -> f64 {
        self.dist.zero_atom()
    }
}

/// Capacity with peak amplitude `peak` and average power `avg_power`
/// (`f64::INFINITY` for none).
pub fn peak_average_capacity(
    peak: f64,
    avg_power: f64,
    channel: &AwgnChannel,
    opts: &SolverOptions,
) -> Result<CapacityResult> {
    if peak.is_nan() || avg_power.is_nan() {
        return Err(Error::InvalidParameter("peak and power must be numbers".into()));
    }
    if peak <= 0.0 || avg_power <= 0.0 {
        return Ok(CapacityResult::degenerate());
    }
    if !peak.is_finite() {
        return Err(Error::InvalidParameter("peak amplitude must be finite".into()));
    }
    let n = opts.odd_grid();
    let mid = n / 2;
    let step = peak / mid as f64;
    let inputs: Vec<f64> =
        (0..n).map(|i| if i == mid { 0.0 } else { (i as f64 - mid as f64) * step }).collect();
    let costs: Vec<f64> = inputs.iter().map(|x| x * x).collect();
    let budget = (avg_power < peak * peak).then_some(avg_power);
    let sol = blahut_arimoto(&Problem { inputs: &inputs, costs: &costs, budget, init: None }, channel, opts)?;
    finish(&inputs, sol, opts)
}

fn finish(inputs: &[f64], sol: solver::Solution, opts: &SolverOptions) -> Result<CapacityResult> {
    let atoms: Vec<(f64, f64)> =
        inputs.iter().copied().zip(sol.probs.iter().copied()).filter(|(_, p)| *p > 0.0).collect();
    Ok(CapacityResult {
        rate: sol.rate,
        dist: InputDistribution::from_atoms(&atoms)?,
        mass_points: consolidate(inputs, &sol.probs, opts.consolidation_threshold),
        certificate_gap: sol.gap,
        iterations: sol.iterations,
        multiplier: sol.lambda,
    })
}

/// One harvest level of a harvest-use solve.
#[derive(Clone, Debug, PartialEq)]
pub struct HuSlot {
    pub harvest: f64,
    pub prob: f64,
    pub result: CapacityResult,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HuCapacity {
    /// `E_Y[C(√Y, Y)]`.
    pub rate: f64,
    pub per_value: Vec<HuSlot>,
}

impl HuCapacity {
    /// Largest certificate gap over all harvest levels.
    pub fn certificate_gap(&self) -> f64 {
        self.per_value.iter().map(|s| s.result.certificate_gap).fold(0.0, f64::max)
    }
}

/// Capacity without an energy buffer: each slot is an AWGN channel with peak
/// amplitude `√y` and per-slot energy `y`, averaged over the harvest law.
pub fn hu_capacity(model: &HarvestModel, channel: &AwgnChannel, opts: &SolverOptions) -> Result<HuCapacity> {
    let mut atoms = model.atoms(HU_QUANTILE_ATOMS);
    atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut per_value: Vec<HuSlot> = Vec::with_capacity(atoms.len());
    for (y, prob) in atoms {
        if let Some(last) = per_value.last_mut() {
            if last.harvest == y {
                last.prob += prob;
                continue;
            }
        }
        let result = peak_average_capacity(y.sqrt(), y, channel, opts)?;
        per_value.push(HuSlot { harvest: y, prob, result });
    }
    let rate = per_value.iter().map(|s| s.prob * s.result.rate).sum();
    Ok(HuCapacity { rate, per_value })
}

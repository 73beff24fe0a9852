//! Monte-Carlo engine: harvest, buffer, policy and channel driven forward
//! slot by slot.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::buffer::{BufferConfig, BufferState};
use crate::capacity::{mutual_information, AwgnChannel, InputDistribution};
use crate::error::{Error, Result};
use crate::harvest::HarvestModel;
use crate::policy::Policy;
use crate::rng::{SlotRng, Stream};
use crate::ENERGY_TOLERANCE;

/// Per-slot record of a run. All vectors have the same length.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SimTrace {
    /// Buffer energy at the start of the slot.
    pub e: Vec<f64>,
    pub y: Vec<f64>,
    pub t: Vec<f64>,
    pub x: Vec<f64>,
    pub w: Vec<f64>,
    pub slept: Vec<bool>,
    pub truncated: Vec<bool>,
    /// Energy the policy was allowed to spend.
    pub available: Vec<f64>,
}

impl SimTrace {
    fn with_capacity(n: usize) -> Self {
        Self {
            e: Vec::with_capacity(n),
            y: Vec::with_capacity(n),
            t: Vec::with_capacity(n),
            x: Vec::with_capacity(n),
            w: Vec::with_capacity(n),
            slept: Vec::with_capacity(n),
            truncated: Vec::with_capacity(n),
            available: Vec::with_capacity(n),
        }
    }

    pub fn len(&self) -> usize {
        self.e.len()
    }

    pub fn is_empty(&self) -> bool {
        self.e.is_empty()
    }
}

/// Summary statistics over the second half of a trace.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SimReport {
    pub mean_t: f64,
    pub mean_y: f64,
    /// Least-squares slope of the buffer energy, per slot.
    pub drift: f64,
    pub truncation_rate: f64,
    pub sleep_rate: f64,
    /// `I(X; W)` of the binned empirical input law through the channel.
    pub empirical_rate: f64,
    /// Every slot spent at most what was available (whole trace).
    pub feasible: bool,
}

/// Runs `n` slots from an empty buffer. Fails with
/// [`Error::InfeasibleEnergy`] if the policy ever overspends.
pub fn run(
    harvest: &HarvestModel,
    cfg: &BufferConfig,
    policy: &Policy,
    channel: &AwgnChannel,
    n: usize,
    seed: u64,
) -> Result<SimTrace> {
    if n == 0 {
        return Err(Error::InvalidParameter("a run needs at least one slot".into()));
    }
    policy.validate()?;
    let sigma = channel.sigma();
    let mut trace = SimTrace::with_capacity(n);
    let mut state = BufferState::empty();
    for k in 0..n as u64 {
        let draws = SlotRng::new(seed, k);
        let y = harvest.sample_at(seed, k);
        let available = cfg.available_energy(state, y);
        let sym = policy.next_symbol(available, y, &draws)?;
        let noise: f64 = draws.stream(Stream::Noise).sample(StandardNormal);
        trace.e.push(state.energy);
        trace.y.push(y);
        trace.t.push(sym.t);
        trace.x.push(sym.x);
        trace.w.push(sym.x + sigma * noise);
        trace.slept.push(sym.slept);
        trace.truncated.push(sym.truncated);
        trace.available.push(available);
        state = cfg.step(state, sym.t, y)?;
    }
    Ok(trace)
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

fn fraction(v: &[bool]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().filter(|b| **b).count() as f64 / v.len() as f64
    }
}

/// Least-squares slope of `v` against its index.
fn ls_slope(v: &[f64]) -> f64 {
    let n = v.len();
    if n < 2 {
        return 0.0;
    }
    let xm = 0.5 * (n - 1) as f64;
    let ym = mean(v);
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, y) in v.iter().enumerate() {
        let dx = i as f64 - xm;
        sxy += dx * (y - ym);
        sxx += dx * dx;
    }
    sxy / sxx
}

/// Equal-width histogram of `x` as a discrete law on the bin centres.
pub fn binned_input(x: &[f64], bins: usize) -> Result<InputDistribution> {
    if x.is_empty() {
        return Ok(InputDistribution::zero());
    }
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi <= lo || bins <= 1 {
        return InputDistribution::from_atoms(&[(0.5 * (lo + hi), 1.0)]);
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &v in x {
        let b = (((v - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let atoms: Vec<(f64, f64)> = counts
        .iter()
        .enumerate()
        .filter(|(_, c)| **c > 0)
        .map(|(b, c)| (lo + (b as f64 + 0.5) * width, *c as f64))
        .collect();
    InputDistribution::from_atoms(&atoms)
}

pub fn report(trace: &SimTrace, channel: &AwgnChannel, bins: usize) -> Result<SimReport> {
    if trace.is_empty() {
        return Err(Error::InvalidParameter("cannot summarise an empty trace".into()));
    }
    let start = trace.len() / 2;
    let feasible = trace.t.iter().zip(&trace.available).all(|(t, a)| *t <= a + ENERGY_TOLERANCE);
    let empirical = binned_input(&trace.x[start..], bins)?;
    Ok(SimReport {
        mean_t: mean(&trace.t[start..]),
        mean_y: mean(&trace.y[start..]),
        drift: ls_slope(&trace.e[start..]),
        truncation_rate: fraction(&trace.truncated[start..]),
        sleep_rate: fraction(&trace.slept[start..]),
        empirical_rate: mutual_information(&empirical, channel)?,
        feasible,
    })
}

//! Capacity with processing energy and an optional sleep mode.
//!
//! Transmitting a non-zero symbol `x` costs `x² + α` (α = E[Z]); sleeping
//! (the symbol 0) costs nothing. With a sleep mode the capacity is the
//! maximum of `I(X; W)` subject to `E[b(X)] ≤ E[Y]`.

use std::f64::consts::PI;

use super::solver::{blahut_arimoto, consolidate, Problem};
use super::{
    awgn_capacity, mutual_information, AwgnChannel, CapacityResult, DensityGrid, InputDistribution,
    SolverOptions,
};
use crate::error::{Error, Result};

/// Grid half-width in units of `sqrt(σ² + E[Y])`.
const RANGE_FACTOR: f64 = 7.0;
/// Variance of the starting law in units of `σ² + E[Y]`.
const WARM_START_SPREAD: f64 = 2.0;

/// Exact zero (the sleep symbol) plus a midpoint grid `±(j - ½)Δ`, so no
/// transmit cell sits on top of the sleep atom.
struct SleepGrid {
    inputs: Vec<f64>,
    costs: Vec<f64>,
    zero: usize,
    cell: f64,
}

impl SleepGrid {
    fn new(ey: f64, alpha: f64, channel: &AwgnChannel, opts: &SolverOptions) -> Self {
        let half = opts.odd_grid() / 2;
        let range = RANGE_FACTOR * (channel.sigma2() + ey).sqrt();
        let cell = range / half as f64;
        let positive = (1..=half).map(|j| (j as f64 - 0.5) * cell);
        let mut inputs: Vec<f64> = positive.clone().rev().map(|a| -a).collect();
        let zero = inputs.len();
        inputs.push(0.0);
        inputs.extend(positive);
        let costs = inputs.iter().map(|&x| if x == 0.0 { 0.0 } else { x * x + alpha }).collect();
        Self { inputs, costs, zero, cell }
    }

    /// Gaussian with variance `variance` on the transmit cells, no sleep mass.
    fn gaussian(&self, variance: f64) -> Vec<f64> {
        let mut p: Vec<f64> = self
            .inputs
            .iter()
            .map(|&x| if x == 0.0 { 0.0 } else { (-0.5 * x * x / variance).exp() })
            .collect();
        let total: f64 = p.iter().sum();
        if total > 0.0 {
            p.iter_mut().for_each(|v| *v /= total);
        } else {
            // Narrower than a cell: split the mass between the two cells at ±Δ/2.
            p[self.zero - 1] = 0.5;
            p[self.zero + 1] = 0.5;
        }
        p
    }

    fn to_distribution(&self, probs: &[f64]) -> Result<InputDistribution> {
        let mut amplitudes = Vec::with_capacity(self.inputs.len() - 1);
        let mut density = Vec::with_capacity(self.inputs.len() - 1);
        for (i, (&x, &p)) in self.inputs.iter().zip(probs).enumerate() {
            if i != self.zero {
                amplitudes.push(x);
                density.push(p / self.cell);
            }
        }
        let weights = vec![self.cell; amplitudes.len()];
        let grid = DensityGrid::with_weights(amplitudes, density, weights)?;
        let zero = probs[self.zero].clamp(0.0, 1.0);
        InputDistribution::new(zero, Vec::new(), Some(grid))
    }
}

/// Processing-energy capacity. Without a sleep mode every slot pays `α`, so
/// the rate is `0.5 ln(1 + (E[Y] - α)/σ²)` (0 when `E[Y] ≤ α`) achieved by a
/// Gaussian input; with a sleep mode the cost-constrained problem is solved
/// on a grid that contains the exact point 0 at cost 0.
pub fn pe_capacity(
    ey: f64,
    ez: f64,
    channel: &AwgnChannel,
    sleep_allowed: bool,
    opts: &SolverOptions,
) -> Result<CapacityResult> {
    if !(ey >= 0.0 && ey.is_finite()) || !(ez >= 0.0 && ez.is_finite()) {
        return Err(Error::InvalidParameter(format!("E[Y] = {ey} and E[Z] = {ez} must be >= 0")));
    }
    if ey == 0.0 || (!sleep_allowed && ey <= ez) {
        return Ok(CapacityResult::degenerate());
    }
    let grid = SleepGrid::new(ey, ez, channel, opts);
    if !sleep_allowed {
        let variance = ey - ez;
        let probs = grid.gaussian(variance);
        return Ok(CapacityResult {
            rate: awgn_capacity(variance, channel),
            dist: grid.to_distribution(&probs)?,
            mass_points: Vec::new(),
            certificate_gap: 0.0,
            iterations: 0,
            multiplier: 0.0,
        });
    }

    // Start wider than the answer: the update shrinks heavy tails quickly but
    // grows light ones only slowly. Projecting onto the budget then moves the
    // excess onto the sleep symbol.
    let n = grid.inputs.len();
    let init: Vec<f64> = grid
        .gaussian(WARM_START_SPREAD * (ey + channel.sigma2()))
        .iter()
        .map(|p| 0.999 * p + 1e-3 / n as f64)
        .collect();
    let sol = blahut_arimoto(
        &Problem { inputs: &grid.inputs, costs: &grid.costs, budget: Some(ey), init: Some(&init) },
        channel,
        opts,
    )?;
    Ok(CapacityResult {
        rate: sol.rate,
        dist: grid.to_distribution(&sol.probs)?,
        mass_points: consolidate(&grid.inputs, &sol.probs, opts.consolidation_threshold),
        certificate_gap: sol.gap,
        iterations: sol.iterations,
        multiplier: sol.lambda,
    })
}

/// Rate of the sleep-wake policy that sleeps with fixed probability `p` and
/// sends Gaussian symbols otherwise, with the symbol variance chosen to use
/// the whole budget: `(1 - p)(v + α) = E[Y]`. Zero when no `v > 0` fits.
pub fn fixed_sleep_rate(ey: f64, ez: f64, p: f64, channel: &AwgnChannel) -> Result<f64> {
    if !(0.0..1.0).contains(&p) {
        return Err(Error::InvalidParameter(format!("sleep probability {p} must lie in [0, 1)")));
    }
    let variance = ey / (1.0 - p) - ez;
    if !(variance > 0.0) {
        return Ok(0.0);
    }
    if p == 0.0 {
        return Ok(awgn_capacity(variance, channel));
    }
    let on = InputDistribution::gaussian(variance, 801)?;
    mutual_information(&InputDistribution::with_sleep(p, &on)?, channel)
}

/// Comparison of a solved transmit density with the parametric form
/// `f(a) = (k₁ e^{-k₂ a²} − p φ_σ(a) / (1 − p))⁺`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KtReport {
    pub k1: f64,
    pub k2: f64,
    pub sleep_probability: f64,
    /// Max |solver density − fitted form| over the grid.
    pub max_deviation: f64,
    /// `max_deviation` relative to the peak of the solver density.
    pub relative_deviation: f64,
    /// `E[b(X)]` of the solver law.
    pub cost: f64,
    /// Whether `|E[b(X)] − E[Y]| ≤ 1e-4`.
    pub cost_ok: bool,
}

/// Fits `(k₁, k₂)` to the continuous part of a [`pe_capacity`] result by
/// least squares over its support and reports how well the form matches.
pub fn kt_density_check(
    result: &CapacityResult,
    ey: f64,
    ez: f64,
    channel: &AwgnChannel,
) -> Result<KtReport> {
    let p = result.dist.zero_atom();
    let grid = match result.dist.density() {
        Some(g) if p < 1.0 => g,
        _ => return Err(Error::FitFailure { support_points: 0 }),
    };
    let on = 1.0 - p;
    let a = grid.amplitudes();
    let f: Vec<f64> = grid.density().iter().map(|v| v / on).collect();
    let peak = f.iter().copied().fold(0.0, f64::max);
    let norm = 1.0 / (2.0 * PI * channel.sigma2()).sqrt();
    let atom_term = |x: f64| p / on * norm * (-0.5 * x * x / channel.sigma2()).exp();

    let support: Vec<(f64, f64)> = a
        .iter()
        .zip(&f)
        .filter(|(_, fi)| **fi > 1e-6 * peak)
        .map(|(&x, &fi)| (x, fi + atom_term(x)))
        .collect();
    if support.len() < 3 {
        return Err(Error::FitFailure { support_points: support.len() });
    }

    // Log-linear weighted least squares for a start, then Gauss-Newton on
    // the absolute residuals.
    let (mut k1, mut k2) = log_linear_fit(&support);
    let sse = |k1: f64, k2: f64| -> f64 {
        support.iter().map(|(x, g)| (k1 * (-k2 * x * x).exp() - g).powi(2)).sum()
    };
    let mut current = sse(k1, k2);
    for _ in 0..50 {
        let (mut j11, mut j12, mut j22, mut r1, mut r2) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for (x, g) in &support {
            let e = (-k2 * x * x).exp();
            let r = k1 * e - g;
            let d1 = e;
            let d2 = -k1 * x * x * e;
            j11 += d1 * d1;
            j12 += d1 * d2;
            j22 += d2 * d2;
            r1 += d1 * r;
            r2 += d2 * r;
        }
        let det = j11 * j22 - j12 * j12;
        if det.abs() < f64::MIN_POSITIVE {
            break;
        }
        let s1 = (j22 * r1 - j12 * r2) / det;
        let s2 = (j11 * r2 - j12 * r1) / det;
        let mut t = 1.0;
        let mut improved = false;
        while t > 1e-6 {
            let (n1, n2) = (k1 - t * s1, k2 - t * s2);
            if n1 > 0.0 && n2 > 0.0 {
                let next = sse(n1, n2);
                if next < current {
                    k1 = n1;
                    k2 = n2;
                    improved = current - next > 1e-14 * current;
                    current = next;
                    break;
                }
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }

    let max_deviation = a
        .iter()
        .zip(&f)
        .map(|(&x, &fi)| (fi - (k1 * (-k2 * x * x).exp() - atom_term(x)).max(0.0)).abs())
        .fold(0.0, f64::max);
    let cost = result.dist.processing_cost(ez);
    Ok(KtReport {
        k1,
        k2,
        sleep_probability: p,
        max_deviation,
        relative_deviation: max_deviation / peak,
        cost,
        cost_ok: (cost - ey).abs() <= 1e-4,
    })
}

fn log_linear_fit(points: &[(f64, f64)]) -> (f64, f64) {
    // ln g = c0 - k2 x², weights g² mimic absolute residuals.
    let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(x, g) in points {
        let w = g * g;
        let u = x * x;
        let v = g.ln();
        sw += w;
        sx += w * u;
        sy += w * v;
        sxx += w * u * u;
        sxy += w * u * v;
    }
    let det = sw * sxx - sx * sx;
    let slope = (sw * sxy - sx * sy) / det;
    let intercept = (sy - slope * sx) / sw;
    (intercept.exp(), (-slope).max(1e-12))
}

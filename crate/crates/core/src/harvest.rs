//! The energy harvest process `{Y_k}`.
//!
//! Models are validated when they are built, so sampling and moment
//! computations never fail afterwards.

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::{erfc, erfc_inv};

use crate::error::{Error, Result};
use crate::quad;
use crate::rng::{CounterRng, Stream};

const PROB_TOLERANCE: f64 = 1e-12;
const CHI2_QUAD_TOL: f64 = 1e-10;

/// Distribution of a single harvest increment.
#[derive(Clone, Debug, PartialEq)]
pub enum HarvestKind {
    /// i.i.d. draws from a finite set of energies.
    DiscreteIid { values: Vec<f64>, probs: Vec<f64> },
    /// The same energy in every slot.
    ConstantIid { y: f64 },
    /// `Y = scale * G^2` with `G` standard normal.
    ChiSquare1 { scale: f64 },
    /// Slot `k` draws from `phases[k % period]`.
    PeriodicMix { phases: Vec<HarvestModel>, period: usize },
}

/// A validated harvest model.
#[derive(Clone, Debug, PartialEq)]
pub struct HarvestModel {
    kind: HarvestKind,
}

impl HarvestModel {
    pub fn discrete(values: Vec<f64>, probs: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidModel("discrete model needs at least one value".into()));
        }
        if values.len() != probs.len() {
            return Err(Error::InvalidModel(format!(
                "{} values but {} probabilities",
                values.len(),
                probs.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::InvalidModel(format!("harvest value {v} is not a finite energy >= 0")));
        }
        if let Some(p) = probs.iter().find(|p| !p.is_finite() || **p < 0.0) {
            return Err(Error::InvalidModel(format!("probability {p} is negative")));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > PROB_TOLERANCE {
            return Err(Error::InvalidModel(format!("probabilities sum to {total}, not 1")));
        }
        Ok(Self { kind: HarvestKind::DiscreteIid { values, probs } })
    }

    /// Equiprobable values.
    pub fn uniform(values: Vec<f64>) -> Result<Self> {
        let n = values.len().max(1);
        let probs = vec![1.0 / n as f64; values.len()];
        // 1/n summed n times can miss 1 by a few ulps.
        let total: f64 = probs.iter().sum();
        let probs = probs.into_iter().map(|p| p / total).collect();
        Self::discrete(values, probs)
    }

    pub fn constant(y: f64) -> Result<Self> {
        if !y.is_finite() || y < 0.0 {
            return Err(Error::InvalidModel(format!("constant harvest {y} must be >= 0")));
        }
        Ok(Self { kind: HarvestKind::ConstantIid { y } })
    }

    pub fn chi_square1(scale: f64) -> Result<Self> {
        if !scale.is_finite() || scale < 0.0 {
            return Err(Error::InvalidModel(format!("chi-square scale {scale} must be >= 0")));
        }
        Ok(Self { kind: HarvestKind::ChiSquare1 { scale } })
    }

    /// Periodic schedule of stationary phases; `period` must equal the number
    /// of phases and phases may not themselves be periodic.
    pub fn periodic(phases: Vec<HarvestModel>, period: usize) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::InvalidModel("periodic model needs at least one phase".into()));
        }
        if period != phases.len() {
            return Err(Error::InvalidModel(format!(
                "period {period} does not match {} phases",
                phases.len()
            )));
        }
        if phases.iter().any(|p| matches!(p.kind, HarvestKind::PeriodicMix { .. })) {
            return Err(Error::InvalidModel("periodic phases cannot be periodic".into()));
        }
        Ok(Self { kind: HarvestKind::PeriodicMix { phases, period } })
    }

    /// i.i.d. uniform on {0.25, 0.5, 0.75, 1}.
    pub fn example1() -> Self {
        Self::discrete(vec![0.25, 0.5, 0.75, 1.0], vec![0.25; 4]).expect("valid model")
    }

    pub fn kind(&self) -> &HarvestKind {
        &self.kind
    }

    /// Exact `E[Y]` (phase average for periodic models).
    pub fn mean(&self) -> f64 {
        match &self.kind {
            HarvestKind::DiscreteIid { values, probs } => values.iter().zip(probs).map(|(v, p)| v * p).sum(),
            HarvestKind::ConstantIid { y } => *y,
            HarvestKind::ChiSquare1 { scale } => *scale,
            HarvestKind::PeriodicMix { phases, .. } => {
                phases.iter().map(HarvestModel::mean).sum::<f64>() / phases.len() as f64
            }
        }
    }

    /// Largest value `Y` can take (infinite for the chi-square model).
    pub fn max_support(&self) -> f64 {
        match &self.kind {
            HarvestKind::DiscreteIid { values, .. } => values.iter().copied().fold(0.0, f64::max),
            HarvestKind::ConstantIid { y } => *y,
            HarvestKind::ChiSquare1 { scale } => {
                if *scale == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            HarvestKind::PeriodicMix { phases, .. } => {
                phases.iter().map(HarvestModel::max_support).fold(0.0, f64::max)
            }
        }
    }

    /// Same shape with every energy multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !factor.is_finite() || factor < 0.0 {
            return Err(Error::InvalidParameter(format!("scale factor {factor} must be >= 0")));
        }
        Ok(match &self.kind {
            HarvestKind::DiscreteIid { values, probs } => Self {
                kind: HarvestKind::DiscreteIid {
                    values: values.iter().map(|v| v * factor).collect(),
                    probs: probs.clone(),
                },
            },
            HarvestKind::ConstantIid { y } => Self::constant(y * factor)?,
            HarvestKind::ChiSquare1 { scale } => Self::chi_square1(scale * factor)?,
            HarvestKind::PeriodicMix { phases, period } => Self {
                kind: HarvestKind::PeriodicMix {
                    phases: phases.iter().map(|p| p.scaled(factor)).collect::<Result<_>>()?,
                    period: *period,
                },
            },
        })
    }

    /// Draw `Y_k` for slot `k` from `rng`.
    pub fn sample_with<R: Rng + ?Sized>(&self, rng: &mut R, k: u64) -> f64 {
        match &self.kind {
            HarvestKind::DiscreteIid { values, probs } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                for (v, p) in values.iter().zip(probs) {
                    acc += p;
                    if u < acc {
                        return *v;
                    }
                }
                // u landed in the rounding slack above the last cumulative sum.
                let last = probs.iter().rposition(|p| *p > 0.0).unwrap_or(values.len() - 1);
                values[last]
            }
            HarvestKind::ConstantIid { y } => *y,
            HarvestKind::ChiSquare1 { scale } => {
                let g: f64 = rng.sample(StandardNormal);
                scale * g * g
            }
            HarvestKind::PeriodicMix { phases, period } => {
                phases[(k % *period as u64) as usize].sample_with(rng, k)
            }
        }
    }

    /// `Y_k` of the path identified by `seed`.
    pub fn sample_at(&self, seed: u64, k: u64) -> f64 {
        self.sample_with(&mut CounterRng::new(seed, Stream::Harvest, k), k)
    }

    pub fn sample_path(&self, n: usize, seed: u64) -> Vec<f64> {
        (0..n as u64).map(|k| self.sample_at(seed, k)).collect()
    }

    /// `(E[(Y - c)^+], E[(c - Y)^+])`.
    pub fn pos_part_moments(&self, c: f64) -> (f64, f64) {
        match &self.kind {
            HarvestKind::DiscreteIid { values, probs } => {
                values.iter().zip(probs).fold((0.0, 0.0), |(up, down), (v, p)| {
                    (up + p * (v - c).max(0.0), down + p * (c - v).max(0.0))
                })
            }
            HarvestKind::ConstantIid { y } => ((y - c).max(0.0), (c - y).max(0.0)),
            HarvestKind::ChiSquare1 { scale } => chi2_pos_parts(*scale, c),
            HarvestKind::PeriodicMix { phases, .. } => {
                let n = phases.len() as f64;
                let (up, down) = phases.iter().fold((0.0, 0.0), |(u, d), p| {
                    let (pu, pd) = p.pos_part_moments(c);
                    (u + pu, d + pd)
                });
                (up / n, down / n)
            }
        }
    }

    /// Finite `(value, probability)` description of the stationary marginal.
    ///
    /// The chi-square model is split into `quantile_atoms` equiprobable bins,
    /// each represented by its conditional mean, so the mean is preserved.
    pub fn atoms(&self, quantile_atoms: usize) -> Vec<(f64, f64)> {
        match &self.kind {
            HarvestKind::DiscreteIid { values, probs } => {
                values.iter().zip(probs).filter(|(_, p)| **p > 0.0).map(|(v, p)| (*v, *p)).collect()
            }
            HarvestKind::ConstantIid { y } => vec![(*y, 1.0)],
            HarvestKind::ChiSquare1 { scale } => chi2_atoms(*scale, quantile_atoms.max(1)),
            HarvestKind::PeriodicMix { phases, .. } => {
                let w = 1.0 / phases.len() as f64;
                phases.iter().flat_map(|p| p.atoms(quantile_atoms)).map(|(v, p)| (v, p * w)).collect()
            }
        }
    }
}

fn std_normal_pdf(g: f64) -> f64 {
    (-0.5 * g * g).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

fn chi2_pos_parts(scale: f64, c: f64) -> (f64, f64) {
    if scale == 0.0 {
        return (0.0, c.max(0.0));
    }
    // Y > c  <=>  |G| > t
    let t = (c.max(0.0) / scale).sqrt();
    let up = quad::integrate(|g| 2.0 * (scale * g * g - c) * std_normal_pdf(g), t, t + 16.0, CHI2_QUAD_TOL)
        .expect("smooth integrand on a finite interval");
    let down = quad::integrate(|g| 2.0 * (c - scale * g * g) * std_normal_pdf(g), 0.0, t, CHI2_QUAD_TOL)
        .expect("smooth integrand on a finite interval");
    (up, down)
}

/// Quantile of `|G|` at level `q`.
fn half_normal_quantile(q: f64) -> f64 {
    if q >= 1.0 {
        return f64::INFINITY;
    }
    // P(|G| <= g) = erf(g / sqrt 2) = 1 - erfc(g / sqrt 2)
    std::f64::consts::SQRT_2 * erfc_inv(1.0 - q)
}

/// `E[G^2 ; a < |G| < b]` for `0 <= a < b <= inf`.
fn half_normal_second_moment(a: f64, b: f64) -> f64 {
    let tail = |g: f64| {
        if g.is_infinite() {
            0.0
        } else {
            // E[G^2; |G| > g] = 2 (g phi(g) + Q(g))
            2.0 * (g * std_normal_pdf(g) + 0.5 * erfc(g / std::f64::consts::SQRT_2))
        }
    };
    tail(a) - tail(b)
}

fn chi2_atoms(scale: f64, m: usize) -> Vec<(f64, f64)> {
    if scale == 0.0 {
        return vec![(0.0, 1.0)];
    }
    let p = 1.0 / m as f64;
    (0..m)
        .map(|i| {
            let a = half_normal_quantile(i as f64 * p);
            let b = half_normal_quantile((i + 1) as f64 * p);
            (scale * half_normal_second_moment(a, b) / p, p)
        })
        .collect()
}

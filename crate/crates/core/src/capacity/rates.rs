//! Closed-form achievable rates for each buffer architecture.

use super::{awgn_capacity, peak_average_capacity, AwgnChannel, SolverOptions};
use crate::error::{Error, Result};
use crate::harvest::HarvestModel;

const BUDGET_TOL: f64 = 1e-9;

/// Largest `c` with `β₁ E[(Y - c)⁺] ≥ E[(c - Y)⁺] + β₂`: the average transmit
/// energy a harvest-use-store buffer can sustain.
///
/// `g(c) = β₁ E[(Y - c)⁺] - E[(c - Y)⁺] - β₂` is strictly decreasing and
/// `g(E[Y]) ≤ 0`, so the root is bracketed by `[0, E[Y]]`.
pub fn hus_budget(model: &HarvestModel, beta1: f64, beta2: f64) -> Result<f64> {
    if !(beta1 > 0.0 && beta1 <= 1.0) || !(beta2 >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "beta1 = {beta1} must lie in (0, 1] and beta2 = {beta2} must be >= 0"
        )));
    }
    let g = |c: f64| {
        let (up, down) = model.pos_part_moments(c);
        beta1 * up - down - beta2
    };
    if g(0.0) <= 0.0 {
        return Ok(0.0);
    }
    let (mut lo, mut hi) = (0.0, model.mean());
    if g(hi) >= 0.0 {
        return Ok(hi);
    }
    while hi - lo > BUDGET_TOL * 0.5 {
        let mid = 0.5 * (lo + hi);
        if g(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Which achievable rate to evaluate. The `ε` back-off is taken to 0.
#[derive(Clone, Debug, PartialEq)]
pub enum RateQuery<'a> {
    /// Infinite lossless buffer: `0.5 ln(1 + E[Y]/σ²)`.
    Ideal { ey: f64 },
    /// Processing energy without sleep: `0.5 ln(1 + (E[Y] - E[Z])/σ²)`.
    ProcessingEnergy { ey: f64, ez: f64 },
    /// Lossy store-first buffer: `0.5 ln(1 + (β₁E[Y] - β₂)/σ²)`.
    Hsu { ey: f64, beta1: f64, beta2: f64 },
    /// Use-first buffer: `0.5 ln(1 + c/σ²)` with `c` from [`hus_budget`].
    Hus { model: &'a HarvestModel, beta1: f64, beta2: f64 },
    /// Buffer of size `γ`: the peak `√γ`, power `E[Y]` capacity.
    FiniteBufferBound { ey: f64, gamma: f64 },
}

pub fn rate_table(query: &RateQuery<'_>, channel: &AwgnChannel, opts: &SolverOptions) -> Result<f64> {
    Ok(match *query {
        RateQuery::Ideal { ey } => awgn_capacity(ey, channel),
        RateQuery::ProcessingEnergy { ey, ez } => awgn_capacity(ey - ez, channel),
        RateQuery::Hsu { ey, beta1, beta2 } => awgn_capacity(beta1 * ey - beta2, channel),
        RateQuery::Hus { model, beta1, beta2 } => awgn_capacity(hus_budget(model, beta1, beta2)?, channel),
        RateQuery::FiniteBufferBound { ey, gamma } => {
            peak_average_capacity(gamma.sqrt(), ey, channel, opts)?.rate
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> AwgnChannel {
        AwgnChannel::new(1.0).unwrap()
    }

    #[test]
    fn lossless_budget_is_the_mean() {
        for m in [
            HarvestModel::example1(),
            HarvestModel::chi_square1(1.7).unwrap(),
            HarvestModel::constant(0.3).unwrap(),
        ] {
            let c = hus_budget(&m, 1.0, 0.0).unwrap();
            assert!((c - m.mean()).abs() < 1e-9, "{c}");
        }
    }

    #[test]
    fn example1_budget_at_seventy_percent() {
        let c = hus_budget(&HarvestModel::example1(), 0.7, 0.0).unwrap();
        assert!((c - 1.975 / 3.4).abs() < 1e-9, "{c}");
    }

    #[test]
    fn leakage_beyond_harvest_gives_zero() {
        let m = HarvestModel::example1();
        assert_eq!(hus_budget(&m, 0.5, 0.5).unwrap(), 0.0);
    }

    #[test]
    fn table_examples() {
        let ch = unit();
        let opts = SolverOptions::default();
        let m = HarvestModel::example1();
        let hsu = rate_table(&RateQuery::Hsu { ey: 0.625, beta1: 1.0, beta2: 0.0 }, &ch, &opts).unwrap();
        assert!((hsu - 0.5 * 1.625f64.ln()).abs() < 1e-15);
        assert!((hsu - 0.2428).abs() < 1e-4);
        let hus = rate_table(&RateQuery::Hus { model: &m, beta1: 0.7, beta2: 0.0 }, &ch, &opts).unwrap();
        assert!((hus - 0.5 * (1.0 + 1.975 / 3.4f64).ln()).abs() < 1e-9);
        assert!((hus - 0.2290).abs() < 1e-4);
        let clamp = rate_table(&RateQuery::Hsu { ey: 0.1, beta1: 0.5, beta2: 0.2 }, &ch, &opts).unwrap();
        assert_eq!(clamp, 0.0);
        let pe = rate_table(&RateQuery::ProcessingEnergy { ey: 1.0, ez: 1.0 }, &ch, &opts).unwrap();
        assert_eq!(pe, 0.0);
    }
}

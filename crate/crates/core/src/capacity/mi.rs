//! Mutual information of a scalar input through the AWGN channel, by
//! quadrature of the output density.

use std::f64::consts::{E, PI};

use super::{AwgnChannel, InputDistribution};
use crate::error::Result;
use crate::quad::trapezoid_refine;

/// Output tails are integrated this many noise standard deviations past the
/// outermost input amplitude.
const TAIL_SIGMAS: f64 = 8.0;
const QUAD_TOL: f64 = 1e-7;
const MAX_INTERVALS: usize = 1 << 20;

/// Gaussian-mixture output density `q(w) = Σ p_i φ_σ(w - a_i)`.
struct OutputDensity {
    atoms: Vec<(f64, f64)>,
    inv_two_var: f64,
    norm: f64,
}

impl OutputDensity {
    fn new(atoms: Vec<(f64, f64)>, channel: &AwgnChannel) -> Self {
        Self { atoms, inv_two_var: 0.5 / channel.sigma2(), norm: 1.0 / (2.0 * PI * channel.sigma2()).sqrt() }
    }

    fn eval(&self, w: f64) -> f64 {
        self.norm
            * self
                .atoms
                .iter()
                .map(|(a, p)| {
                    let d = w - a;
                    p * (-d * d * self.inv_two_var).exp()
                })
                .sum::<f64>()
    }

    fn span(&self, sigma: f64) -> (f64, f64) {
        let lo = self.atoms.iter().map(|(a, _)| *a).fold(f64::INFINITY, f64::min);
        let hi = self.atoms.iter().map(|(a, _)| *a).fold(f64::NEG_INFINITY, f64::max);
        (lo - TAIL_SIGMAS * sigma, hi + TAIL_SIGMAS * sigma)
    }
}

fn xlnx(x: f64) -> f64 {
    if x > 0.0 {
        x * x.ln()
    } else {
        0.0
    }
}

/// Differential entropy of the noise, `0.5 ln(2πeσ²)`.
pub(crate) fn noise_entropy(channel: &AwgnChannel) -> f64 {
    0.5 * (2.0 * PI * E * channel.sigma2()).ln()
}

/// `I(X; X + N) = h(W) - h(N)` in nats, clamped to be non-negative.
pub fn mutual_information(dist: &InputDistribution, channel: &AwgnChannel) -> Result<f64> {
    let atoms = dist.atoms();
    if atoms.len() <= 1 {
        return Ok(0.0);
    }
    let q = OutputDensity::new(atoms, channel);
    let (lo, hi) = q.span(channel.sigma());
    let h_out = trapezoid_refine(|w| -xlnx(q.eval(w)), lo, hi, QUAD_TOL, MAX_INTERVALS)?;
    Ok((h_out - noise_entropy(channel)).max(0.0))
}

/// `∫ f ln(f / g)` over `[lo, hi]`.
fn kl_quadrature(f: &OutputDensity, g: &OutputDensity, lo: f64, hi: f64) -> Result<f64> {
    trapezoid_refine(
        |w| {
            let fw = f.eval(w);
            if fw > 0.0 {
                fw * (fw / g.eval(w)).ln()
            } else {
                0.0
            }
        },
        lo,
        hi,
        QUAD_TOL,
        MAX_INTERVALS,
    )
}

/// The three terms of the ON-OFF split `X = B·G`, `P(B = 0) = p`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OnOffParts {
    /// `I(X; X + N)`.
    pub total: f64,
    /// `I(B; BG + N)`.
    pub on_off: f64,
    /// `I(G; G + N)`.
    pub on_part: f64,
    /// `p`.
    pub sleep_probability: f64,
}

impl OnOffParts {
    /// `I(B; BG + N) + (1 - p) I(G; G + N)`, which equals `total` by the chain
    /// rule.
    pub fn recombined(&self) -> f64 {
        self.on_off + (1.0 - self.sleep_probability) * self.on_part
    }
}

/// Evaluates each term of the ON-OFF split by its own quadrature.
///
/// `I(B; BG + N)` is computed directly as
/// `p·D(φ_σ ‖ q) + (1 - p)·D(q_G ‖ q)`, not as a difference of the other two.
pub fn onoff_decomposition(dist: &InputDistribution, channel: &AwgnChannel) -> Result<OnOffParts> {
    let p = dist.zero_atom();
    let total = mutual_information(dist, channel)?;
    let Some(on) = dist.off_zero_part() else {
        return Ok(OnOffParts { total, on_off: 0.0, on_part: 0.0, sleep_probability: p });
    };
    let on_part = mutual_information(&on, channel)?;
    if p <= 0.0 {
        return Ok(OnOffParts { total, on_off: 0.0, on_part, sleep_probability: 0.0 });
    }
    let off_out = OutputDensity::new(vec![(0.0, 1.0)], channel);
    let on_out = OutputDensity::new(on.atoms(), channel);
    let mix_out = OutputDensity::new(dist.atoms(), channel);
    let (lo, hi) = mix_out.span(channel.sigma());
    let on_off = p * kl_quadrature(&off_out, &mix_out, lo, hi)?
        + (1.0 - p) * kl_quadrature(&on_out, &mix_out, lo, hi)?;
    Ok(OnOffParts { total, on_off: on_off.max(0.0), on_part, sleep_probability: p })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::awgn_capacity;

    #[test]
    fn deterministic_input_carries_nothing() {
        let ch = AwgnChannel::new(1.0).unwrap();
        assert_eq!(mutual_information(&InputDistribution::zero(), &ch).unwrap(), 0.0);
        let shifted = InputDistribution::from_atoms(&[(3.0, 1.0)]).unwrap();
        assert_eq!(mutual_information(&shifted, &ch).unwrap(), 0.0);
    }

    #[test]
    fn gaussian_input_reaches_awgn_capacity() {
        for &(p, s2) in &[(1.0, 1.0), (3.0, 1.0), (0.2, 0.5), (10.0, 2.0)] {
            let ch = AwgnChannel::new(s2).unwrap();
            let g = InputDistribution::gaussian(p, 801).unwrap();
            let mi = mutual_information(&g, &ch).unwrap();
            assert!((mi - awgn_capacity(p, &ch)).abs() < 1e-4, "P={p}: {mi}");
        }
    }

    #[test]
    fn widely_separated_points_approach_log_count() {
        let ch = AwgnChannel::new(1.0).unwrap();
        let d = InputDistribution::from_atoms(&[(-40.0, 1.0), (0.0, 1.0), (40.0, 1.0)]).unwrap();
        let mi = mutual_information(&d, &ch).unwrap();
        assert!((mi - 3f64.ln()).abs() < 1e-6, "{mi}");
    }

    #[test]
    fn onoff_degenerate_cases() {
        let ch = AwgnChannel::new(1.0).unwrap();
        let g = InputDistribution::gaussian(1.0, 401).unwrap();
        let parts = onoff_decomposition(&g, &ch).unwrap();
        assert_eq!(parts.on_off, 0.0);
        assert!((parts.total - parts.on_part).abs() < 1e-12);
        let parts = onoff_decomposition(&InputDistribution::zero(), &ch).unwrap();
        assert_eq!((parts.total, parts.on_off, parts.on_part), (0.0, 0.0, 0.0));
    }
}

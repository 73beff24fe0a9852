use crate::error::{Error, Result};

const MASS_TOLERANCE: f64 = 1e-9;

/// Continuous part of an input law, stored as density values on a set of
/// nodes together with their quadrature weights.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityGrid {
    amplitudes: Vec<f64>,
    density: Vec<f64>,
    weights: Vec<f64>,
}

impl DensityGrid {
    /// Trapezoid weights on sorted, strictly increasing nodes.
    pub fn trapezoid(amplitudes: Vec<f64>, density: Vec<f64>) -> Result<Self> {
        let n = amplitudes.len();
        if n < 2 {
            return Err(Error::InvalidParameter("density grid needs at least 2 nodes".into()));
        }
        if amplitudes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("density grid nodes must increase".into()));
        }
        let mut weights = vec![0.0; n];
        for i in 0..n - 1 {
            let h = 0.5 * (amplitudes[i + 1] - amplitudes[i]);
            weights[i] += h;
            weights[i + 1] += h;
        }
        Self::with_weights(amplitudes, density, weights)
    }

    /// Explicit quadrature weights, e.g. cell widths of a midpoint grid.
    pub fn with_weights(amplitudes: Vec<f64>, density: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if amplitudes.len() != density.len() || amplitudes.len() != weights.len() {
            return Err(Error::InvalidParameter("density grid arrays differ in length".into()));
        }
        if amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(Error::InvalidParameter("density grid amplitudes must be finite".into()));
        }
        if density.iter().chain(&weights).any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::InvalidParameter("density values and weights must be >= 0".into()));
        }
        Ok(Self { amplitudes, density, weights })
    }

    pub fn amplitudes(&self) -> &[f64] {
        &self.amplitudes
    }

    pub fn density(&self) -> &[f64] {
        &self.density
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn mass(&self) -> f64 {
        self.density.iter().zip(&self.weights).map(|(f, w)| f * w).sum()
    }

    fn scaled(&self, factor: f64) -> Self {
        Self {
            amplitudes: self.amplitudes.clone(),
            density: self.density.iter().map(|f| f * factor).collect(),
            weights: self.weights.clone(),
        }
    }
}

/// A channel-input law: an optional atom at 0, discrete mass points and an
/// optional continuous part.
#[derive(Clone, Debug, PartialEq)]
pub struct InputDistribution {
    zero_atom: f64,
    mass_points: Vec<(f64, f64)>,
    density: Option<DensityGrid>,
}

impl InputDistribution {
    pub fn new(zero_atom: f64, mass_points: Vec<(f64, f64)>, density: Option<DensityGrid>) -> Result<Self> {
        if !(0.0..=1.0).contains(&zero_atom) {
            return Err(Error::InvalidParameter(format!("zero atom {zero_atom} outside [0, 1]")));
        }
        if mass_points.iter().any(|(a, p)| !a.is_finite() || !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidParameter(
                "mass points need finite amplitudes and probabilities >= 0".into(),
            ));
        }
        let total = zero_atom
            + mass_points.iter().map(|(_, p)| p).sum::<f64>()
            + density.as_ref().map_or(0.0, DensityGrid::mass);
        if (total - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidParameter(format!("input law has total mass {total}")));
        }
        Ok(Self { zero_atom, mass_points, density })
    }

    /// Deterministic input `X = 0`.
    pub fn zero() -> Self {
        Self { zero_atom: 1.0, mass_points: Vec::new(), density: None }
    }

    /// Equiprobable `±a`.
    pub fn symmetric_two_point(a: f64) -> Self {
        if a == 0.0 {
            return Self::zero();
        }
        Self { zero_atom: 0.0, mass_points: vec![(-a, 0.5), (a, 0.5)], density: None }
    }

    /// Discrete law from `(amplitude, probability)` pairs; probabilities are
    /// renormalised and amplitudes exactly 0 go to the zero atom.
    pub fn from_atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        let total: f64 = atoms.iter().map(|(_, p)| p).sum();
        if !(total > 0.0) {
            return Err(Error::InvalidParameter("atoms carry no probability".into()));
        }
        let mut zero = 0.0;
        let mut points = Vec::with_capacity(atoms.len());
        for &(a, p) in atoms {
            if a == 0.0 {
                zero += p / total;
            } else {
                points.push((a, p / total));
            }
        }
        Self::new(zero.min(1.0), points, None)
    }

    /// Zero-mean Gaussian with variance `variance`, sampled on a trapezoid
    /// grid of `nodes` points over ±8 standard deviations and renormalised.
    pub fn gaussian(variance: f64, nodes: usize) -> Result<Self> {
        if !(variance > 0.0) {
            return Ok(Self::zero());
        }
        let nodes = nodes.max(3);
        let sd = variance.sqrt();
        let half = 8.0 * sd;
        let step = 2.0 * half / (nodes - 1) as f64;
        let amplitudes: Vec<f64> = (0..nodes).map(|i| -half + i as f64 * step).collect();
        let norm = 1.0 / (2.0 * std::f64::consts::PI * variance).sqrt();
        let density: Vec<f64> = amplitudes.iter().map(|a| norm * (-0.5 * a * a / variance).exp()).collect();
        let grid = DensityGrid::trapezoid(amplitudes, density)?;
        let mass = grid.mass();
        Self::new(0.0, Vec::new(), Some(grid.scaled(1.0 / mass)))
    }

    /// Law of `B·G` where `P(B = 0) = p` and `G` has law `on`.
    pub fn with_sleep(p: f64, on: &InputDistribution) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter(format!("sleep probability {p} outside [0, 1]")));
        }
        let keep = 1.0 - p;
        Self::new(
            p + keep * on.zero_atom,
            on.mass_points.iter().map(|&(a, q)| (a, q * keep)).collect(),
            on.density.as_ref().map(|d| d.scaled(keep)),
        )
    }

    pub fn zero_atom(&self) -> f64 {
        self.zero_atom
    }

    pub fn mass_points(&self) -> &[(f64, f64)] {
        &self.mass_points
    }

    pub fn density(&self) -> Option<&DensityGrid> {
        self.density.as_ref()
    }

    /// Every `(amplitude, probability)` pair, with density nodes carrying
    /// their quadrature mass. Zero-probability entries are skipped.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::with_capacity(
            1 + self.mass_points.len() + self.density.as_ref().map_or(0, |d| d.amplitudes.len()),
        );
        if self.zero_atom > 0.0 {
            out.push((0.0, self.zero_atom));
        }
        out.extend(self.mass_points.iter().copied().filter(|(_, p)| *p > 0.0));
        if let Some(d) = &self.density {
            out.extend(
                d.amplitudes
                    .iter()
                    .zip(d.density.iter().zip(&d.weights))
                    .map(|(a, (f, w))| (*a, f * w))
                    .filter(|(_, p)| *p > 0.0),
            );
        }
        out
    }

    /// `E[X^2]`.
    pub fn second_moment(&self) -> f64 {
        self.atoms().iter().map(|(a, p)| a * a * p).sum()
    }

    /// `E[b(X)]` with `b(x) = x² + alpha` for `x ≠ 0` and `b(0) = 0`.
    pub fn processing_cost(&self, alpha: f64) -> f64 {
        self.atoms().iter().map(|&(a, p)| if a == 0.0 { 0.0 } else { p * (a * a + alpha) }).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.atoms().iter().map(|(a, _)| a.abs()).fold(0.0, f64::max)
    }

    /// The off-zero part renormalised to a probability law, or `None` when
    /// the law is the zero atom alone.
    pub fn off_zero_part(&self) -> Option<Self> {
        let keep = 1.0 - self.zero_atom;
        if keep <= MASS_TOLERANCE {
            return None;
        }
        let points: Vec<(f64, f64)> = self.mass_points.iter().map(|&(a, p)| (a, p / keep)).collect();
        let density = self.density.as_ref().map(|d| d.scaled(1.0 / keep));
        // Re-derive the zero atom from the remaining mass so rounding cannot
        // push the total off 1.
        let mass: f64 =
            points.iter().map(|(_, p)| p).sum::<f64>() + density.as_ref().map_or(0.0, DensityGrid::mass);
        Some(Self { zero_atom: (1.0 - mass).clamp(0.0, 1.0), mass_points: points, density })
    }

    /// Inverse-CDF draw from a uniform `u` in [0, 1); density nodes are
    /// treated as atoms.
    pub fn sample(&self, u: f64) -> f64 {
        let atoms = self.atoms();
        let mut acc = 0.0;
        for &(a, p) in &atoms {
            acc += p;
            if u < acc {
                return a;
            }
        }
        atoms.last().map_or(0.0, |(a, _)| *a)
    }

    /// `Some(a)` when the law is the equiprobable pair `±a`.
    pub fn as_symmetric_two_point(&self) -> Option<f64> {
        match (self.zero_atom, self.mass_points.as_slice(), &self.density) {
            (z, [(a, p), (b, q)], None) if z == 0.0 && *a == -*b && (p - q).abs() < 1e-12 && *a != 0.0 => {
                Some(a.abs())
            }
            _ => None,
        }
    }
}

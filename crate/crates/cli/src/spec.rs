//! Parsing of harvest descriptions and sweep axes.

use std::fmt;
use std::str::FromStr;

use ehcap_core::HarvestModel;

use crate::CliError;

/// Parses a harvest description:
///
/// - `example1`: uniform on {0.25, 0.5, 0.75, 1}
/// - `const:Y`
/// - `discrete:v1,v2,...` (equiprobable) or `discrete:v1@p1,v2@p2,...`
/// - `chi2:S`: `S·G²` with `G` standard normal
/// - `periodic:A|B|...`: slot `k` uses phase `k mod n`
pub fn parse_harvest(s: &str) -> Result<HarvestModel, CliError> {
    let s = s.trim();
    let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
    let model = match kind {
        "example1" if rest.is_empty() => HarvestModel::example1(),
        "const" => HarvestModel::constant(number(rest)?)?,
        "chi2" => HarvestModel::chi_square1(number(rest)?)?,
        "discrete" => {
            let mut values = Vec::new();
            let mut probs = Vec::new();
            for item in rest.split(',') {
                match item.split_once('@') {
                    Some((v, p)) => {
                        values.push(number(v)?);
                        probs.push(number(p)?);
                    }
                    None => values.push(number(item)?),
                }
            }
            if probs.is_empty() {
                HarvestModel::uniform(values)?
            } else if probs.len() == values.len() {
                HarvestModel::discrete(values, probs)?
            } else {
                return Err(CliError::Spec(format!("mix of weighted and unweighted values in {s:?}")));
            }
        }
        "periodic" => {
            let phases = rest.split('|').map(parse_harvest).collect::<Result<Vec<_>, _>>()?;
            let n = phases.len();
            HarvestModel::periodic(phases, n)?
        }
        _ => return Err(CliError::Spec(format!("unknown harvest description {s:?}"))),
    };
    Ok(model)
}

fn number(s: &str) -> Result<f64, CliError> {
    let s = s.trim();
    let v: f64 = s.parse().map_err(|_| CliError::Spec(format!("{s:?} is not a number")))?;
    if v.is_nan() {
        return Err(CliError::Spec("NaN is not allowed".into()));
    }
    Ok(v)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SweepVar {
    Ey,
    Ez,
    Sigma2,
    Gamma,
    Beta1,
    Beta2,
}

impl SweepVar {
    pub fn name(self) -> &'static str {
        match self {
            SweepVar::Ey => "ey",
            SweepVar::Ez => "ez",
            SweepVar::Sigma2 => "sigma2",
            SweepVar::Gamma => "gamma",
            SweepVar::Beta1 => "beta1",
            SweepVar::Beta2 => "beta2",
        }
    }
}

impl fmt::Display for SweepVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepVar {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        Ok(match s {
            "ey" => SweepVar::Ey,
            "ez" => SweepVar::Ez,
            "sigma2" => SweepVar::Sigma2,
            "gamma" => SweepVar::Gamma,
            "beta1" => SweepVar::Beta1,
            "beta2" => SweepVar::Beta2,
            _ => return Err(CliError::Spec(format!("unknown sweep variable {s:?}"))),
        })
    }
}

/// `var:min:max:steps[:log]`
#[derive(Clone, Debug, PartialEq)]
pub struct Sweep {
    pub var: SweepVar,
    pub min: f64,
    pub max: f64,
    pub steps: usize,
    pub log: bool,
}

impl Sweep {
    pub fn points(&self) -> Vec<f64> {
        let n = self.steps;
        (0..n)
            .map(|i| {
                let f = i as f64 / (n - 1) as f64;
                if i == n - 1 {
                    self.max
                } else if self.log {
                    (self.min.ln() + f * (self.max.ln() - self.min.ln())).exp()
                } else {
                    self.min + f * (self.max - self.min)
                }
            })
            .collect()
    }
}

impl FromStr for Sweep {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let parts: Vec<&str> = s.split(':').collect();
        let log = match parts.len() {
            4 => false,
            5 if parts[4] == "log" => true,
            5 if parts[4] == "lin" => false,
            _ => return Err(CliError::Spec(format!("sweep {s:?} is not var:min:max:steps[:log]"))),
        };
        let var: SweepVar = parts[0].parse()?;
        let min = number(parts[1])?;
        let max = number(parts[2])?;
        let steps: usize =
            parts[3].parse().map_err(|_| CliError::Spec(format!("bad step count in {s:?}")))?;
        if !(min.is_finite() && max.is_finite()) || min > max {
            return Err(CliError::Spec(format!("sweep bounds in {s:?} must be finite with min <= max")));
        }
        if steps < 2 {
            return Err(CliError::Spec("a sweep needs at least 2 steps".into()));
        }
        if log && min <= 0.0 {
            return Err(CliError::Spec("a log sweep needs min > 0".into()));
        }
        Ok(Sweep { var, min, max, steps, log })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn harvest_strings() {
        assert_eq!(parse_harvest("example1").unwrap(), HarvestModel::example1());
        assert_eq!(parse_harvest("discrete:0.25,0.5,0.75,1").unwrap().mean(), 0.625);
        assert_eq!(parse_harvest("discrete:1@0.25,3@0.75").unwrap().mean(), 2.5);
        assert_eq!(parse_harvest("const:2").unwrap().mean(), 2.0);
        assert_eq!(parse_harvest("chi2:1.5").unwrap().mean(), 1.5);
        assert!((parse_harvest("periodic:const:1|const:3").unwrap().mean() - 2.0).abs() < 1e-15);
        for bad in ["", "const:", "const:-1", "discrete:1@0.5,2", "gauss:1", "chi2:x", "example1:2"] {
            assert!(parse_harvest(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn sweeps() {
        let s: Sweep = "ey:0.1:10:3:log".parse().unwrap();
        let p = s.points();
        assert!((p[1] - 1.0).abs() < 1e-12 && p[2] == 10.0);
        let s: Sweep = "beta1:0.05:1:20".parse().unwrap();
        assert_eq!(s.points().len(), 20);
        assert_eq!(s.points()[0], 0.05);
        for bad in ["ey:1:2", "ey:2:1:5", "ey:0:1:5:log", "foo:1:2:3", "ey:1:2:1", "ey:1:inf:3"] {
            assert!(bad.parse::<Sweep>().is_err(), "{bad}");
        }
    }
}

//! Per-cell wall likelihood along a ray part and uncertainty-weighted fusion.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::CellIndex;

/// Shape of the wall likelihood along a subsegment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WallMode {
    /// Gaussian bump(s) peaked where the walls are expected, unit peak.
    #[default]
    GaussianMidpoint,
    /// `exp(-(1/M)^2) * d_j / L`, which grows away from the midpoint.
    LiteralEq4,
}

impl std::str::FromStr for WallMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian-midpoint" => Ok(Self::GaussianMidpoint),
            "literal-eq4" => Ok(Self::LiteralEq4),
            other => Err(Error::Config(format!(
                "unknown wall mode {other:?} (expected gaussian-midpoint or literal-eq4)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MapperConfig {
    /// Belief increment for one free-space observation.
    pub sigma_step: f64,
    /// Variance of a free-space observation, and the scale of wall variances.
    pub base_variance: f64,
    pub wall_mode: WallMode,
    /// Largest trusted wall count; larger classifications are clamped.
    pub k_max: u32,
    /// Largest Chebyshev pose gap that still counts as continuous motion.
    pub max_step: usize,
}

impl Default for MapperConfig {
    fn default() -> Self {
        Self {
            sigma_step: 0.1,
            base_variance: 1.0,
            wall_mode: WallMode::GaussianMidpoint,
            k_max: 2,
            max_step: 2,
        }
    }
}

impl MapperConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_step > 0.0 && self.sigma_step <= 0.5) {
            return Err(Error::Config(format!(
                "sigma_step must lie in (0, 0.5], got {}",
                self.sigma_step
            )));
        }
        if !(self.base_variance > 0.0 && self.base_variance.is_finite()) {
            return Err(Error::Config(format!(
                "base_variance must be positive, got {}",
                self.base_variance
            )));
        }
        if self.k_max == 0 {
            return Err(Error::Config("k_max must be at least 1".into()));
        }
        Ok(())
    }
}

/// Part of a ray between two consecutive trajectory intersections.
#[derive(Debug, Clone, PartialEq)]
pub struct Subsegment {
    /// Cell path from start to end inclusive.
    pub cells: Vec<CellIndex>,
    pub start_k: u32,
    pub end_k: u32,
}

impl Subsegment {
    pub fn start(&self) -> CellIndex {
        self.cells[0]
    }

    pub fn end(&self) -> CellIndex {
        self.cells[self.cells.len() - 1]
    }

    /// Walls inside the part.
    pub fn delta_k(&self) -> u32 {
        self.end_k.saturating_sub(self.start_k)
    }

    /// Cells strictly between the endpoints (M).
    pub fn intermediate_count(&self) -> usize {
        self.cells.len().saturating_sub(2)
    }

    /// Steps from start to end (L).
    pub fn length(&self) -> usize {
        self.cells.len().saturating_sub(1)
    }

    pub fn intermediate(&self) -> &[CellIndex] {
        if self.cells.len() < 2 {
            &[]
        } else {
            &self.cells[1..self.cells.len() - 1]
        }
    }
}

/// Wall probability for each intermediate cell, sharing one variance.
#[derive(Debug, Clone, PartialEq)]
pub struct WallEvidence {
    pub mu: Vec<f64>,
    pub variance: f64,
}

/// Ray parts longer than this many intermediate cells are less certain than a
/// single free observation.
const REFERENCE_LENGTH: f64 = 10.0;

pub fn wall_probability(sub: &Subsegment, cfg: &MapperConfig) -> WallEvidence {
    let m = sub.intermediate_count();
    let l = sub.length() as f64;
    let variance = cfg.base_variance * (m.max(1) as f64 / REFERENCE_LENGTH).powi(2);
    let walls = sub.delta_k().min(cfg.k_max);
    if walls == 0 || m == 0 {
        return WallEvidence {
            mu: vec![0.0; m],
            variance,
        };
    }
    let positions = (1..=m).map(|i| i as f64);
    let mu = match cfg.wall_mode {
        WallMode::GaussianMidpoint => {
            let c = f64::from(walls);
            let width = l / (2.0 * (c + 1.0));
            let raw: Vec<f64> = positions
                .map(|i| {
                    (1..=walls)
                        .map(|j| {
                            let center = l * f64::from(j) / (c + 1.0);
                            (-((i - center) / width).powi(2)).exp()
                        })
                        .sum()
                })
                .collect();
            let peak = raw.iter().copied().fold(0.0, f64::max);
            raw.into_iter().map(|v| v / peak).collect()
        }
        WallMode::LiteralEq4 => {
            let prefactor = (-(1.0 / m as f64).powi(2)).exp();
            positions
                .map(|i| prefactor * (i - l / 2.0).abs() / l)
                .collect()
        }
    };
    WallEvidence { mu, variance }
}

/// A belief with its variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub variance: f64,
}

impl Estimate {
    pub const fn new(mean: f64, variance: f64) -> Self {
        Self { mean, variance }
    }
}

/// Inverse-variance combination of a prior estimate and a new observation.
///
/// The mean weights each side by the other's variance; the variance is the
/// harmonic combination `(1/v1 + 1/v2)^-1`.
pub fn fuse(prior: Estimate, obs: Estimate) -> Result<Estimate> {
    let (v1, v2) = (prior.variance, obs.variance);
    if !(v1 > 0.0 && v2 > 0.0) {
        return Err(Error::Domain(format!(
            "fusion needs positive variances, got {v1} and {v2}"
        )));
    }
    let total = v1 + v2;
    let mean = v1 / total * obs.mean + v2 / total * prior.mean;
    let variance = v1 * v2 / total;
    Ok(Estimate { mean, variance })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn straight(len: usize, start_k: u32, end_k: u32) -> Subsegment {
        Subsegment {
            cells: (0..len).map(|x| CellIndex::new(x, 0)).collect(),
            start_k,
            end_k,
        }
    }

    #[test]
    fn free_part_carries_no_wall_mass() {
        let ev = wall_probability(&straight(8, 1, 1), &MapperConfig::default());
        assert_eq!(ev.mu, vec![0.0; 6]);
    }

    #[test]
    fn gaussian_peaks_at_midpoint() {
        for len in [3, 4, 7, 11, 30] {
            let sub = straight(len, 0, 1);
            let ev = wall_probability(&sub, &MapperConfig::default());
            let argmax = ev
                .mu
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .unwrap()
                .0;
            // intermediate index i sits at path position i + 1
            let pos = (argmax + 1) as f64;
            assert!((pos - sub.length() as f64 / 2.0).abs() <= 0.5, "len {len}: {:?}", ev.mu);
            assert!((ev.mu[argmax] - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn multiple_walls_are_multimodal() {
        let sub = straight(31, 0, 2);
        let ev = wall_probability(&sub, &MapperConfig::default());
        // path positions 10 and 20 are the modes; 15 is a trough
        let at = |p: usize| ev.mu[p - 1];
        assert!(at(10) > at(15) && at(20) > at(15));
        assert!((at(10) - at(20)).abs() < 1e-12);
    }

    #[test]
    fn literal_mode_substitution() {
        let cfg = MapperConfig {
            wall_mode: WallMode::LiteralEq4,
            ..Default::default()
        };
        let sub = straight(11, 0, 1);
        assert_eq!((sub.intermediate_count(), sub.length()), (9, 10));
        let ev = wall_probability(&sub, &cfg);
        // path position 3 is two cells from the midpoint at 5
        let mu = ev.mu[2];
        let expected = (-(1.0f64 / 9.0).powi(2)).exp() * 2.0 / 10.0;
        assert!((mu - expected).abs() < 1e-15);
        assert!((mu - 0.1975).abs() < 1e-4);
    }

    #[test]
    fn variance_grows_with_length() {
        let cfg = MapperConfig::default();
        let short = wall_probability(&straight(3, 0, 1), &cfg).variance;
        let long = wall_probability(&straight(22, 0, 1), &cfg).variance;
        assert!(short < long);
        assert!((long - 4.0).abs() < 1e-12);
    }

    #[test]
    fn adjacent_endpoints_have_nothing_to_mark() {
        let ev = wall_probability(&straight(2, 0, 1), &MapperConfig::default());
        assert!(ev.mu.is_empty());
    }

    #[test]
    fn fuse_examples() {
        let a = Estimate::new(0.2, 0.5);
        let b = Estimate::new(0.8, 0.5);
        assert!((fuse(a, b).unwrap().mean - 0.5).abs() < 1e-15);

        let sharp = Estimate::new(0.3, 1e-12);
        let vague = Estimate::new(0.9, 1.0);
        assert!((fuse(sharp, vague).unwrap().mean - 0.3).abs() < 1e-9);

        let same = fuse(Estimate::new(0.7, 0.4), Estimate::new(0.7, 0.4)).unwrap();
        assert!((same.mean - 0.7).abs() < 1e-15);
        assert!(same.variance < 0.4);

        assert!(fuse(Estimate::new(0.5, 0.0), vague).is_err());
        assert!(fuse(vague, Estimate::new(0.5, -1.0)).is_err());
    }

    #[test]
    fn mode_parses() {
        assert_eq!("literal-eq4".parse::<WallMode>().unwrap(), WallMode::LiteralEq4);
        assert!("midpoint".parse::<WallMode>().is_err());
    }
}

//! Experiment description loaded from JSON.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use kvis::{CellIndex, MapperConfig, RssiModelParams, RssiThresholds};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Pattern {
    /// One wall-following loop around the largest free region.
    Perimeter,
    /// A wall-following loop in every free region, concatenated.
    Rooms,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TrajectorySource {
    Pattern(Pattern),
    /// Pose log in the RSSI CSV layout; its readings are ignored.
    File { file: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ThresholdSource {
    /// K-Means on each router's own filtered readings.
    Fit,
    /// Fixed descending bounds, one list per router, or a single list shared
    /// by all routers.
    Bounds(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub floorplan: PathBuf,
    /// Meters per cell.
    pub resolution: f64,
    /// Router cells as `[x, y]`.
    pub routers: Vec<[usize; 2]>,
    pub trajectory: TrajectorySource,
    /// Seconds between samples.
    #[serde(default = "default_period")]
    pub sample_period: f64,
    #[serde(default)]
    pub rssi: RssiModelParams,
    /// Median window; 1 disables filtering.
    #[serde(default = "default_window")]
    pub filter_window: usize,
    #[serde(default = "default_thresholds")]
    pub thresholds: ThresholdSource,
    /// Mapper settings; its `k_max` is also the number of fitted bounds.
    #[serde(default)]
    pub mapper: MapperConfig,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    pub seed: u64,
}

fn default_period() -> f64 {
    0.5
}

fn default_window() -> usize {
    5
}

fn default_thresholds() -> ThresholdSource {
    ThresholdSource::Fit
}

fn default_output() -> PathBuf {
    PathBuf::from("out")
}

impl ExperimentConfig {
    /// Reads a config file. Relative paths inside it are resolved against the
    /// file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg: Self = serde_json::from_str(&text)
            .with_context(|| format!("parsing config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.resolve_paths(base);
        cfg.validate()
            .with_context(|| format!("invalid config {}", path.display()))?;
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.floorplan);
        fix(&mut self.output_dir);
        if let TrajectorySource::File { file } = &mut self.trajectory {
            fix(file);
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.routers.is_empty() {
            bail!("at least one router is required");
        }
        if !self.floorplan.exists() {
            bail!("floorplan {} does not exist", self.floorplan.display());
        }
        if let TrajectorySource::File { file } = &self.trajectory {
            if !file.exists() {
                bail!("trajectory file {} does not exist", file.display());
            }
        }
        if !(self.sample_period > 0.0) {
            bail!("sample_period must be positive");
        }
        if self.filter_window % 2 == 0 {
            bail!("filter_window must be odd, got {}", self.filter_window);
        }
        self.rssi.validate()?;
        self.mapper.validate()?;
        if let ThresholdSource::Bounds(b) = &self.thresholds {
            if b.len() != 1 && b.len() != self.routers.len() {
                bail!(
                    "{} threshold lists for {} routers (give one shared list or one per router)",
                    b.len(),
                    self.routers.len()
                );
            }
        }
        Ok(())
    }

    pub fn router_cells(&self) -> Vec<CellIndex> {
        self.routers.iter().map(|&[x, y]| CellIndex::new(x, y)).collect()
    }

    /// Explicit thresholds expanded to one set per router.
    pub fn explicit_thresholds(&self) -> Result<Option<Vec<RssiThresholds>>> {
        let ThresholdSource::Bounds(lists) = &self.thresholds else {
            return Ok(None);
        };
        let sets = lists
            .iter()
            .map(|b| RssiThresholds::from_bounds(b.clone()))
            .collect::<kvis::Result<Vec<_>>>()?;
        Ok(Some(if sets.len() == 1 {
            vec![sets[0].clone(); self.routers.len()]
        } else {
            sets
        }))
    }
}

//! The experiment stages and the end-to-end run.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use kvis::grid::io::{export_grayscale, import_grayscale, read_floorplan};
use kvis::metrics::focused_k_pairs;
use kvis::raycast::supercover;
use kvis::{
    fit_thresholds, iou, k_accuracy, k_field, mse, run_mapper, simulate_rssi, BeliefMap,
    EvalReport, Floorplan, KAccuracy, MapOutcome, RssiThresholds, Trajectory,
};
use log::info;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{ExperimentConfig, TrajectorySource};
use crate::trajectory::generate_trajectory;

/// Runs `f` with its error prefixed by the stage name.
fn stage<T>(name: &str, f: impl FnOnce() -> Result<T>) -> Result<T> {
    info!("stage {name}");
    f().with_context(|| format!("stage `{name}` failed"))
}

/// Reads a floorplan raster and attaches the routers.
pub fn load_floorplan(
    path: &Path,
    resolution: f64,
    routers: Vec<kvis::CellIndex>,
) -> Result<Floorplan> {
    let plan = read_floorplan(path, resolution)?;
    plan.with_routers(routers)
        .with_context(|| format!("routers do not fit floorplan {}", path.display()))
}

/// Poses from the configured source, without readings.
pub fn trajectory_poses(cfg: &ExperimentConfig, plan: &Floorplan) -> Result<Vec<kvis::CellIndex>> {
    match &cfg.trajectory {
        TrajectorySource::Pattern(p) => generate_trajectory(plan, *p, cfg.seed),
        TrajectorySource::File { file } => {
            let f = fs::File::open(file).with_context(|| format!("opening {}", file.display()))?;
            Ok(Trajectory::read_csv(&plan.spec(), f)?.poses().collect())
        }
    }
}

/// Noisy readings from every router at every pose, drawn in sample-major
/// order from one generator seeded by the experiment seed.
pub fn simulate(cfg: &ExperimentConfig, plan: &Floorplan) -> Result<Trajectory> {
    let poses = trajectory_poses(cfg, plan)?;
    for (i, &p) in poses.iter().enumerate() {
        if plan.is_wall(p) {
            anyhow::bail!("pose {i} at ({}, {}) is on a wall cell", p.x, p.y);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut traj = Trajectory::from_poses(&poses, cfg.sample_period, plan.routers().len());
    for s in traj.samples_mut() {
        for (r, &router) in plan.routers().iter().enumerate() {
            s.rssi[r] = Some(simulate_rssi(plan, router, s.pose, &cfg.rssi, &mut rng)?);
        }
    }
    Ok(traj)
}

/// Thresholds per router, fitted on the (filtered) readings or taken from
/// the config.
pub fn thresholds(cfg: &ExperimentConfig, traj: &Trajectory) -> Result<Vec<RssiThresholds>> {
    if let Some(explicit) = cfg.explicit_thresholds()? {
        return Ok(explicit);
    }
    (0..traj.router_count())
        .map(|r| {
            fit_thresholds(&traj.readings(r), cfg.mapper.k_max as usize, cfg.seed)
                .with_context(|| format!("fitting thresholds for router {r}"))
        })
        .collect()
}

/// Classifies a filtered copy of the readings and maps it.
pub fn map(
    cfg: &ExperimentConfig,
    plan: &Floorplan,
    raw: &Trajectory,
    th: Option<&[RssiThresholds]>,
) -> Result<(Trajectory, Vec<RssiThresholds>, MapOutcome)> {
    let mut traj = raw.filtered(cfg.filter_window)?;
    let th = match th {
        Some(t) => t.to_vec(),
        None => thresholds(cfg, &traj)?,
    };
    traj.classify(&th)?;
    let out = run_mapper(&traj, plan.routers(), None, &cfg.mapper, plan.spec())?;
    Ok((traj, th, out))
}

/// Evaluation report. Without a classified trajectory the k-value rows
/// are empty.
pub fn evaluate(
    plan: &Floorplan,
    belief: &BeliefMap,
    classified: Option<&Trajectory>,
) -> Result<EvalReport> {
    let acc = match classified {
        Some(t) => {
            let (est, gt) = focused_k_pairs(t, plan)?;
            k_accuracy(&est, &gt)?
        }
        None => KAccuracy::from_counts(0, 0),
    };
    let report = EvalReport::new(
        plan.free_area_m2(),
        plan.routers().len(),
        acc,
        iou(belief, plan)?,
        mse(belief, plan)?,
    );
    report.check()?;
    Ok(report)
}

/// Cells of k = 0 rays that are walls in the plan. Zero whenever the
/// classification was exact.
pub fn free_ray_wall_hits(plan: &Floorplan, out: &MapOutcome) -> usize {
    out.free_rays
        .iter()
        .flat_map(|&(r, p)| supercover(r, p).into_cells())
        .filter(|&c| plan.is_wall(c))
        .count()
}

/// Files written by one command, removed again if a later write fails.
pub struct Outputs {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Outputs {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(Self {
            dir: dir.to_owned(),
            written: Vec::new(),
        })
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    pub fn write(&mut self, name: &str, f: impl FnOnce(&Path) -> Result<()>) -> Result<PathBuf> {
        let path = self.path(name);
        self.written.push(path.clone());
        f(&path).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }

    pub fn text(&mut self, name: &str, text: &str) -> Result<PathBuf> {
        self.write(name, |p| Ok(fs::write(p, text)?))
    }

    /// Keeps the files. Dropping without calling this deletes them.
    pub fn commit(mut self) -> Vec<PathBuf> {
        std::mem::take(&mut self.written)
    }
}

impl Drop for Outputs {
    fn drop(&mut self) {
        for p in &self.written {
            let _ = fs::remove_file(p);
        }
    }
}

pub fn write_trajectory(out: &mut Outputs, name: &str, plan: &Floorplan, t: &Trajectory) -> Result<PathBuf> {
    out.write(name, |p| {
        let f = fs::File::create(p)?;
        Ok(t.write_csv(&plan.spec(), std::io::BufWriter::new(f))?)
    })
}

pub fn thresholds_json(th: &[RssiThresholds]) -> Result<String> {
    Ok(serde_json::to_string_pretty(th)? + "\n")
}

pub fn report_json(r: &EvalReport) -> Result<String> {
    Ok(serde_json::to_string_pretty(r)? + "\n")
}

pub fn read_thresholds(path: &Path) -> Result<Vec<RssiThresholds>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let th: Vec<RssiThresholds> = serde_json::from_str(&text)
        .with_context(|| format!("parsing thresholds {}", path.display()))?;
    for t in &th {
        t.validate()?;
    }
    Ok(th)
}

pub fn read_trajectory(path: &Path, plan: &Floorplan) -> Result<Trajectory> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Trajectory::read_csv(&plan.spec(), f).with_context(|| format!("reading {}", path.display()))
}

pub fn read_map(path: &Path) -> Result<BeliefMap> {
    Ok(import_grayscale(path)?)
}

/// Everything an end-to-end run produced.
pub struct PipelineOutput {
    pub plan: Floorplan,
    /// Raw simulated readings.
    pub raw: Trajectory,
    /// Filtered and classified readings the mapper consumed.
    pub classified: Trajectory,
    pub thresholds: Vec<RssiThresholds>,
    pub outcome: MapOutcome,
    pub report: EvalReport,
    /// See [`free_ray_wall_hits`].
    pub free_ray_wall_hits: usize,
    pub files: Vec<PathBuf>,
}

/// Simulate, filter, fit, classify, map and evaluate, then write
/// `map.pgm`, `rssi.csv`, `kfield_<r>.csv`, `thresholds.json`, `report.json`
/// and `report.txt` into the output directory.
pub fn run_pipeline(cfg: &ExperimentConfig) -> Result<PipelineOutput> {
    let plan = stage("load", || {
        load_floorplan(&cfg.floorplan, cfg.resolution, cfg.router_cells())
    })?;
    let raw = stage("simulate", || simulate(cfg, &plan))?;
    let (classified, th, outcome) = stage("map", || map(cfg, &plan, &raw, None))?;
    let report = stage("eval", || evaluate(&plan, &outcome.belief, Some(&classified)))?;
    let hits = free_ray_wall_hits(&plan, &outcome);
    let files = stage("write", || {
        let mut out = Outputs::new(&cfg.output_dir)?;
        out.write("map.pgm", |p| Ok(export_grayscale(&outcome.belief, p)?))?;
        write_trajectory(&mut out, "rssi.csv", &plan, &raw)?;
        for (r, &router) in plan.routers().iter().enumerate() {
            let field = k_field(&plan, router)?;
            out.write(&format!("kfield_{r}.csv"), |p| {
                Ok(field.write_csv(std::io::BufWriter::new(fs::File::create(p)?))?)
            })?;
        }
        out.text("thresholds.json", &thresholds_json(&th)?)?;
        out.text("report.json", &report_json(&report)?)?;
        out.text("report.txt", &report.to_string())?;
        Ok(out.commit())
    })?;
    Ok(PipelineOutput {
        plan,
        raw,
        classified,
        thresholds: th,
        outcome,
        report,
        free_ray_wall_hits: hits,
        files,
    })
}

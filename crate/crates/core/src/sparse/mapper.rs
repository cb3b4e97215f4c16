use std::collections::HashMap;

use log::debug;

use super::evidence::{fuse, wall_probability, Estimate, MapperConfig, Subsegment};
use super::trajectory::{Sample, Trajectory};
use crate::error::{Error, Result};
use crate::grid::{bounding_box, BeliefMap, CellIndex, GridSpec};
use crate::raycast::{supercover, RayPath};
use crate::rssi::RssiThresholds;

/// Contiguous samples sharing one k-value for a router.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Run {
    pub k: u32,
    /// Sample index range, end exclusive.
    pub start: usize,
    pub end: usize,
}

impl Run {
    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end == self.start
    }
}

/// Splits the trajectory into maximal runs of equal k for one router. A run
/// also ends where consecutive poses are more than `max_step` cells apart.
/// Samples with no k for the router belong to no run.
pub fn segment_trajectory(traj: &Trajectory, router: usize, max_step: usize) -> Vec<Run> {
    let mut runs: Vec<Run> = Vec::new();
    let mut prev: Option<&Sample> = None;
    for (i, s) in traj.samples().iter().enumerate() {
        let Some(k) = s.k.get(router).copied().flatten() else {
            prev = None;
            continue;
        };
        let extends = match (prev, runs.last_mut()) {
            (Some(p), Some(run)) => run.k == k && run.end == i && p.pose.chebyshev(s.pose) <= max_step,
            _ => false,
        };
        if extends {
            runs.last_mut().unwrap().end = i + 1;
        } else {
            runs.push(Run {
                k,
                start: i,
                end: i + 1,
            });
        }
        prev = Some(s);
    }
    runs
}

/// Router with the strongest reading; ties go to the lower index.
pub fn select_focused_router(sample: &Sample) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, r) in sample.rssi.iter().enumerate() {
        if let Some(v) = *r {
            if best.is_none_or(|(_, b)| v > b) {
                best = Some((i, v));
            }
        }
    }
    best.map(|(i, _)| i)
}

/// Known k at each visited cell, per router. A cell visited several times
/// takes its most frequent k, the smaller one on ties.
#[derive(Debug, Clone)]
pub struct PoseIndex {
    spec: GridSpec,
    on_trajectory: Vec<bool>,
    k: Vec<Vec<Option<u32>>>,
}

impl PoseIndex {
    pub fn build(traj: &Trajectory, spec: GridSpec) -> Result<Self> {
        let routers = traj.router_count();
        let mut on_trajectory = vec![false; spec.len()];
        let mut votes: Vec<HashMap<usize, Vec<u32>>> = vec![HashMap::new(); routers];
        for s in traj.samples() {
            spec.check(s.pose)?;
            let i = spec.index(s.pose);
            on_trajectory[i] = true;
            for (r, k) in s.k.iter().enumerate() {
                if let Some(k) = *k {
                    let counts = votes[r].entry(i).or_default();
                    if counts.len() <= k as usize {
                        counts.resize(k as usize + 1, 0);
                    }
                    counts[k as usize] += 1;
                }
            }
        }
        let k = votes
            .into_iter()
            .map(|per_cell| {
                let mut grid = vec![None; spec.len()];
                for (i, counts) in per_cell {
                    let (mut best_k, mut best_n) = (0usize, 0u32);
                    for (k, &n) in counts.iter().enumerate() {
                        if n > best_n {
                            (best_k, best_n) = (k, n);
                        }
                    }
                    grid[i] = Some(best_k as u32);
                }
                grid
            })
            .collect();
        Ok(Self {
            spec,
            on_trajectory,
            k,
        })
    }

    pub fn on_trajectory(&self, c: CellIndex) -> bool {
        self.on_trajectory[self.spec.index(c)]
    }

    pub fn k(&self, router: usize, c: CellIndex) -> Option<u32> {
        self.k[router][self.spec.index(c)]
    }
}

/// A router-to-pose ray narrowed to the stretch known to hold its walls.
#[derive(Debug, Clone, PartialEq)]
pub struct RefinedRay {
    pub lower: CellIndex,
    pub upper: CellIndex,
    pub k_lower: u32,
    pub k_upper: u32,
    /// Cells from `lower` to `upper` inclusive.
    pub cells: RayPath,
    /// Known-k trajectory cells strictly between the endpoints, as
    /// `(position in cells, k)`.
    pub crossings: Vec<(usize, u32)>,
}

/// Trajectory cells met along a ray, excluding both ends, with their k.
fn intersections(ray: &RayPath, router: usize, index: &PoseIndex) -> Vec<(usize, u32)> {
    let cells = ray.cells();
    if cells.len() < 3 {
        return Vec::new();
    }
    (1..cells.len() - 1)
        .filter(|&i| index.on_trajectory(cells[i]))
        .filter_map(|i| index.k(router, cells[i]).map(|k| (i, k)))
        .collect()
}

/// Moves the lower end of the ray out to the farthest on-ray trajectory cell
/// with k = 0, and the upper end back to the nearest on-ray trajectory cell
/// beyond it carrying the smallest k >= 1 seen there (the target included).
fn refine_on(ray: &RayPath, target_k: u32, hits: &[(usize, u32)]) -> RefinedRay {
    let last = ray.len() - 1;
    let lower = hits
        .iter()
        .filter(|h| h.1 == 0)
        .map(|h| h.0)
        .max()
        .unwrap_or(0);
    let candidates = hits
        .iter()
        .copied()
        .filter(|&(i, k)| i > lower && k >= 1)
        .chain(std::iter::once((last, target_k)));
    let k_min = candidates.clone().map(|c| c.1).min().unwrap_or(target_k);
    let upper = candidates
        .filter(|c| c.1 == k_min)
        .map(|c| c.0)
        .min()
        .unwrap_or(last);
    let cells = ray.slice(lower, upper);
    let crossings = hits
        .iter()
        .filter(|h| h.0 > lower && h.0 < upper)
        .map(|&(i, k)| (i - lower, k))
        .collect();
    RefinedRay {
        lower: ray.cells()[lower],
        upper: ray.cells()[upper],
        k_lower: 0,
        k_upper: k_min,
        cells,
        crossings,
    }
}

/// Endpoint refinement for the ray from `router_cell` to `target`, using
/// every other trajectory pose as a potential intersection.
pub fn refine_endpoints(
    router: usize,
    router_cell: CellIndex,
    target: &Sample,
    traj: &Trajectory,
    spec: GridSpec,
) -> Result<RefinedRay> {
    let index = PoseIndex::build(traj, spec)?;
    let target_k = target.k.get(router).copied().flatten().ok_or_else(|| {
        Error::Domain(format!("target sample has no k for router {router}"))
    })?;
    if target_k == 0 {
        return Err(Error::Domain("endpoint refinement needs k >= 1".into()));
    }
    let ray = supercover(router_cell, target.pose);
    let hits = intersections(&ray, router, &index);
    Ok(refine_on(&ray, target_k, &hits))
}

/// Partitions a refined ray at its trajectory crossings. Crossings are kept
/// only while their k stays within `[k_lower, k_upper]` and never decreases,
/// so every part has a non-negative wall count.
pub fn subsegment_deltas(ray: &RefinedRay) -> Vec<Subsegment> {
    let cells = ray.cells.cells();
    let mut cuts = vec![(0usize, ray.k_lower)];
    for &(i, k) in &ray.crossings {
        let last_k = cuts.last().unwrap().1;
        if k >= last_k && k <= ray.k_upper {
            cuts.push((i, k));
        }
    }
    cuts.push((cells.len() - 1, ray.k_upper));
    cuts.windows(2)
        .map(|w| Subsegment {
            cells: cells[w[0].0..=w[1].0].to_vec(),
            start_k: w[0].1,
            end_k: w[1].1,
        })
        .collect()
}

/// Mapper output: the belief plus the k = 0 rays that were marked free.
#[derive(Debug, Clone)]
pub struct MapOutcome {
    pub belief: BeliefMap,
    /// `(router cell, pose)` of every ray treated as wall-free.
    pub free_rays: Vec<(CellIndex, CellIndex)>,
    /// Samples that had no usable reading.
    pub skipped: usize,
}

struct BeliefUpdater<'a> {
    belief: BeliefMap,
    cfg: &'a MapperConfig,
}

impl BeliefUpdater<'_> {
    fn free(&mut self, c: CellIndex) {
        let p = self.belief.prob_free(c);
        let target = (p + self.cfg.sigma_step).min(1.0);
        self.observe(c, Estimate::new(target, self.cfg.base_variance));
    }

    fn wall(&mut self, c: CellIndex, mu: f64, variance: f64) {
        self.observe(c, Estimate::new(1.0 - mu, variance));
    }

    fn observe(&mut self, c: CellIndex, obs: Estimate) {
        let next = match self.belief.variance(c) {
            None => obs,
            Some(v) => fuse(Estimate::new(self.belief.prob_free(c), v), obs)
                .expect("variances are positive by construction"),
        };
        self.belief.set(c, next.mean, Some(next.variance));
    }
}

/// Builds a free-space belief from a trajectory with per-router readings.
///
/// Samples missing `k` are classified with `thresholds` (one set per router)
/// when given. Processing is sequential in trajectory order:
///
/// * the pose is free;
/// * the focused router is the one heard loudest;
/// * k = 0: every cell on the router-pose ray is free;
/// * k >= 1: cells between two on-ray trajectory crossings with equal k are
///   free, and the refined ray spreads wall likelihood over each part that
///   gains walls;
///
/// and afterwards a rectangle one cell outside every touched cell is stamped
/// as wall wherever the belief is still unknown.
pub fn run_mapper(
    traj: &Trajectory,
    routers: &[CellIndex],
    thresholds: Option<&[RssiThresholds]>,
    cfg: &MapperConfig,
    spec: GridSpec,
) -> Result<MapOutcome> {
    cfg.validate()?;
    for (i, &r) in routers.iter().enumerate() {
        if !spec.contains(r) {
            return Err(Error::Config(format!(
                "router {i} at ({}, {}) lies outside the {}x{} grid",
                r.x, r.y, spec.width, spec.height
            )));
        }
    }
    let mut outcome = MapOutcome {
        belief: BeliefMap::unknown(spec.width, spec.height),
        free_rays: Vec::new(),
        skipped: 0,
    };
    if traj.is_empty() {
        return Ok(outcome);
    }
    if traj.router_count() != routers.len() {
        return Err(Error::Config(format!(
            "trajectory carries {} routers, {} positions given",
            traj.router_count(),
            routers.len()
        )));
    }

    let mut traj = traj.clone();
    if let Some(th) = thresholds {
        if th.len() != routers.len() {
            return Err(Error::Config(format!(
                "{} threshold sets for {} routers",
                th.len(),
                routers.len()
            )));
        }
        for s in traj.samples_mut() {
            for (r, t) in th.iter().enumerate() {
                if s.k[r].is_none() {
                    s.k[r] = s.rssi[r].map(|v| crate::rssi::classify_k(v, t));
                }
            }
        }
    }
    for s in traj.samples_mut() {
        for k in s.k.iter_mut().flatten() {
            *k = (*k).min(cfg.k_max);
        }
    }

    let index = PoseIndex::build(&traj, spec)?;
    for r in 0..routers.len() {
        debug!(
            "router {r}: {} runs",
            segment_trajectory(&traj, r, cfg.max_step).len()
        );
    }

    let mut up = BeliefUpdater {
        belief: std::mem::replace(&mut outcome.belief, BeliefMap::unknown(0, 0)),
        cfg,
    };
    let mut touched: Vec<CellIndex> = Vec::with_capacity(traj.len() + routers.len());

    for sample in traj.samples() {
        up.free(sample.pose);
        touched.push(sample.pose);

        let Some(focus) = select_focused_router(sample) else {
            outcome.skipped += 1;
            continue;
        };
        let Some(k) = sample.k[focus] else {
            outcome.skipped += 1;
            continue;
        };
        let router = routers[focus];
        touched.push(router);
        let ray = supercover(router, sample.pose);

        if k == 0 {
            for &c in ray.cells() {
                up.free(c);
            }
            outcome.free_rays.push((router, sample.pose));
            continue;
        }

        let hits = intersections(&ray, focus, &index);
        let cells = ray.cells();
        // router (k = 0), crossings, then the pose itself
        let chain: Vec<(usize, u32)> = std::iter::once((0, 0))
            .chain(hits.iter().copied())
            .chain(std::iter::once((cells.len() - 1, k)))
            .collect();
        for w in chain.windows(2) {
            if w[0].1 == w[1].1 {
                for &c in &cells[w[0].0 + 1..w[1].0] {
                    up.free(c);
                }
            }
        }

        let refined = refine_on(&ray, k, &hits);
        for sub in subsegment_deltas(&refined) {
            if sub.delta_k() == 0 {
                for &c in sub.intermediate() {
                    up.free(c);
                }
                continue;
            }
            let ev = wall_probability(&sub, cfg);
            for (&c, &mu) in sub.intermediate().iter().zip(&ev.mu) {
                if !index.on_trajectory(c) {
                    up.wall(c, mu, ev.variance);
                }
            }
        }
    }

    let mut belief = up.belief;
    if let Ok(rect) = bounding_box(touched.iter().copied()) {
        for c in rect.expand(1, &spec).outline() {
            if belief.is_unknown(c) {
                belief.set(c, 0.0, Some(cfg.base_variance));
            }
        }
    }
    outcome.belief = belief;
    Ok(outcome)
}

//! Map quality against ground truth: k-value accuracy over trajectory
//! samples, masked free-space IOU and mean squared intensity error.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::io::ternary_intensity;
use crate::grid::{BeliefMap, Floorplan, UNKNOWN};
use crate::raycast::count_wall_crossings;
use crate::sparse::{select_focused_router, Trajectory};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KAccuracy {
    pub true_count: usize,
    pub false_count: usize,
    pub pct: f64,
}

/// Exact-match rate of estimated against ground-truth k, in percent of the
/// evaluated points.
pub fn k_accuracy(est: &[u32], gt: &[u32]) -> Result<KAccuracy> {
    if est.len() != gt.len() {
        return Err(Error::Domain(format!(
            "{} estimated k-values against {} ground-truth values",
            est.len(),
            gt.len()
        )));
    }
    let true_count = est.iter().zip(gt).filter(|(a, b)| a == b).count();
    Ok(KAccuracy::from_counts(true_count, est.len() - true_count))
}

/// Classified against true k of the focused router at every sample that has
/// one, as `(estimated, ground truth)` lists. Routers come from the plan.
pub fn focused_k_pairs(traj: &Trajectory, plan: &Floorplan) -> Result<(Vec<u32>, Vec<u32>)> {
    if traj.router_count() != plan.routers().len() {
        return Err(Error::DimensionMismatch(format!(
            "trajectory carries {} routers, plan has {}",
            traj.router_count(),
            plan.routers().len()
        )));
    }
    let (mut est, mut gt) = (Vec::new(), Vec::new());
    for s in traj.samples() {
        let Some(r) = select_focused_router(s) else { continue };
        let Some(k) = s.k[r] else { continue };
        est.push(k);
        gt.push(count_wall_crossings(plan, plan.routers()[r], s.pose)?);
    }
    Ok((est, gt))
}

impl KAccuracy {
    pub fn from_counts(true_count: usize, false_count: usize) -> Self {
        let n = true_count + false_count;
        let pct = if n == 0 {
            0.0
        } else {
            100.0 * true_count as f64 / n as f64
        };
        Self {
            true_count,
            false_count,
            pct,
        }
    }
}

fn check_dims(est: &BeliefMap, gt: &Floorplan) -> Result<()> {
    if est.matches(gt) {
        Ok(())
    } else {
        Err(Error::DimensionMismatch(format!(
            "estimate is {}x{}, ground truth {}x{}",
            est.width(),
            est.height(),
            gt.width(),
            gt.height()
        )))
    }
}

/// Free-space IOU over cells known in both maps. Ground truth is binary, so
/// only estimate cells at exactly 0.5 drop out of the mask.
pub fn iou(est: &BeliefMap, gt: &Floorplan) -> Result<f64> {
    check_dims(est, gt)?;
    let (mut inter, mut union) = (0usize, 0usize);
    for (&p, &wall) in est.probabilities().iter().zip(gt.walls()) {
        if p == UNKNOWN {
            continue;
        }
        let est_free = p > UNKNOWN;
        let gt_free = !wall;
        inter += usize::from(est_free && gt_free);
        union += usize::from(est_free || gt_free);
    }
    if union == 0 {
        return Err(Error::UndefinedScore("IOU union is empty"));
    }
    Ok(inter as f64 / union as f64)
}

/// Mean squared difference of the 0/127/255 encodings, on two scales.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MseScore {
    /// Intensities scaled to [0, 1].
    pub normalized: f64,
    /// Raw 8-bit intensities.
    pub raw: f64,
}

pub fn mse(est: &BeliefMap, gt: &Floorplan) -> Result<MseScore> {
    check_dims(est, gt)?;
    let n = est.probabilities().len();
    let sum: f64 = est
        .probabilities()
        .iter()
        .zip(gt.walls())
        .map(|(&p, &wall)| {
            let e = f64::from(ternary_intensity(p));
            let g = if wall { 0.0 } else { 255.0 };
            (e - g).powi(2)
        })
        .sum();
    let raw = sum / n as f64;
    Ok(MseScore {
        normalized: raw / (255.0 * 255.0),
        raw,
    })
}

/// One column of a results table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub area_m2: f64,
    pub n_routers: usize,
    pub n_points: usize,
    pub k_true: usize,
    pub k_false: usize,
    pub k_accuracy_pct: f64,
    pub iou: f64,
    /// MSE on the normalized intensity scale.
    pub mse: f64,
    /// MSE on the raw 8-bit scale.
    pub mse_raw: f64,
}

impl EvalReport {
    pub fn new(area_m2: f64, n_routers: usize, acc: KAccuracy, iou: f64, mse: MseScore) -> Self {
        Self {
            area_m2,
            n_routers,
            n_points: acc.true_count + acc.false_count,
            k_true: acc.true_count,
            k_false: acc.false_count,
            k_accuracy_pct: acc.pct,
            iou,
            mse: mse.normalized,
            mse_raw: mse.raw,
        }
    }

    pub fn check(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Domain(format!("report invariant: {m}")));
        if self.k_true + self.k_false != self.n_points {
            return fail(format!(
                "{} + {} != {}",
                self.k_true, self.k_false, self.n_points
            ));
        }
        if self.n_points > 0 {
            let pct = 100.0 * self.k_true as f64 / self.n_points as f64;
            if (pct - self.k_accuracy_pct).abs() > 1e-9 {
                return fail(format!("accuracy {} != {pct}", self.k_accuracy_pct));
            }
        }
        if !(0.0..=1.0).contains(&self.iou) {
            return fail(format!("iou {} outside [0, 1]", self.iou));
        }
        if self.mse < 0.0 || self.mse_raw < 0.0 {
            return fail("negative mse".into());
        }
        Ok(())
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: [(&str, String); 9] = [
            ("Area of Map", format!("{:.1} m^2", self.area_m2)),
            ("#Router", self.n_routers.to_string()),
            ("#Data points", self.n_points.to_string()),
            ("k-value Prediction True", self.k_true.to_string()),
            ("k-value Prediction False", self.k_false.to_string()),
            ("k-value Accuracy %", format!("{:.2}", self.k_accuracy_pct)),
            ("IOU Score", format!("{:.4}", self.iou)),
            ("MSE Score", format!("{:.4}", self.mse)),
            ("MSE Score (8-bit px^2)", format!("{:.4}", self.mse_raw)),
        ];
        let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
        for (name, value) in rows {
            writeln!(f, "{name:<width$}  {value:>12}")?;
        }
        Ok(())
    }
}

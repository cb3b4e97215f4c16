//! Signal strength to wall count.
//!
//! A log-distance path-loss model with a fixed attenuation per crossed wall
//! generates synthetic readings. Readings map to a wall count `k` through
//! descending bounds `t_1 > t_2 > ... > t_K`, each bound the midpoint of two
//! adjacent K-Means centroids.

mod kmeans;

pub use kmeans::kmeans_1d;

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{CellIndex, Floorplan};
use crate::raycast::count_wall_crossings;

/// Forward model parameters. Powers in dBm, attenuations in dB.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RssiModelParams {
    /// Received power at the reference distance.
    pub p0: f64,
    /// Reference distance in meters.
    pub d0: f64,
    pub path_loss_exponent: f64,
    /// Loss per crossed wall.
    pub wall_attenuation: f64,
    /// Standard deviation of additive Gaussian noise.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for RssiModelParams {
    fn default() -> Self {
        Self {
            p0: -40.0,
            d0: 1.0,
            path_loss_exponent: 2.2,
            wall_attenuation: 8.0,
            noise_sigma: 0.0,
            seed: 0,
        }
    }
}

impl RssiModelParams {
    pub fn validate(&self) -> Result<()> {
        let fail = |what: &str| Err(Error::Config(format!("rssi model: {what}")));
        if !(self.path_loss_exponent > 0.0) {
            return fail("path_loss_exponent must be > 0");
        }
        if !(self.wall_attenuation >= 0.0) {
            return fail("wall_attenuation must be >= 0");
        }
        if !(self.noise_sigma >= 0.0) {
            return fail("noise_sigma must be >= 0");
        }
        if !(self.d0 > 0.0) {
            return fail("d0 must be > 0");
        }
        if !self.p0.is_finite() {
            return fail("p0 must be finite");
        }
        Ok(())
    }

    /// Noise-free reading for a given metric distance and wall count.
    pub fn mean_rssi(&self, distance_m: f64, walls: u32) -> f64 {
        let d = distance_m.max(self.d0);
        self.p0
            - 10.0 * self.path_loss_exponent * (d / self.d0).log10()
            - self.wall_attenuation * f64::from(walls)
    }
}

/// One synthetic reading at `pose` from `router`.
///
/// With `noise_sigma == 0` the generator is never drawn from.
pub fn simulate_rssi<R: Rng + ?Sized>(
    plan: &Floorplan,
    router: CellIndex,
    pose: CellIndex,
    params: &RssiModelParams,
    rng: &mut R,
) -> Result<f64> {
    params.validate()?;
    let walls = count_wall_crossings(plan, router, pose)?;
    let distance = router.center_distance(pose) * plan.resolution();
    let mut rssi = params.mean_rssi(distance, walls);
    if params.noise_sigma > 0.0 {
        let noise = Normal::new(0.0, params.noise_sigma)
            .map_err(|e| Error::Config(format!("rssi noise: {e}")))?;
        rssi += noise.sample(rng);
    }
    Ok(rssi)
}

/// Descending RSSI bounds and, when fitted, the centroids they came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RssiThresholds {
    /// `C_0 > C_1 > ... > C_K`; absent when bounds were given directly.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub centroids: Option<Vec<f64>>,
    /// `t_1 > t_2 > ... > t_K`.
    pub bounds: Vec<f64>,
}

impl RssiThresholds {
    pub fn from_centroids(centroids: Vec<f64>) -> Result<Self> {
        if centroids.len() < 2 {
            return Err(Error::Domain(format!(
                "need at least two centroids, got {}",
                centroids.len()
            )));
        }
        strictly_decreasing(&centroids, "centroids")?;
        let bounds = centroids.windows(2).map(|w| (w[0] + w[1]) / 2.0).collect();
        Ok(Self {
            centroids: Some(centroids),
            bounds,
        })
    }

    pub fn from_bounds(bounds: Vec<f64>) -> Result<Self> {
        let th = Self {
            centroids: None,
            bounds,
        };
        th.validate()?;
        Ok(th)
    }

    pub fn validate(&self) -> Result<()> {
        if self.bounds.is_empty() {
            return Err(Error::Domain("thresholds need K >= 1 bounds".into()));
        }
        strictly_decreasing(&self.bounds, "bounds")?;
        if let Some(c) = &self.centroids {
            if c.len() != self.bounds.len() + 1 {
                return Err(Error::Domain(format!(
                    "{} centroids for {} bounds",
                    c.len(),
                    self.bounds.len()
                )));
            }
            strictly_decreasing(c, "centroids")?;
        }
        Ok(())
    }

    /// Largest wall count the bounds can express.
    pub fn k_max(&self) -> u32 {
        self.bounds.len() as u32
    }
}

fn strictly_decreasing(v: &[f64], what: &str) -> Result<()> {
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Domain(format!("{what} must be finite: {v:?}")));
    }
    if let Some(w) = v.windows(2).find(|w| w[0] <= w[1]) {
        return Err(Error::Domain(format!(
            "{what} must be strictly decreasing, found {} then {}",
            w[0], w[1]
        )));
    }
    Ok(())
}

/// Clusters the readings into `k_max + 1` levels and places a bound halfway
/// between each adjacent pair.
pub fn fit_thresholds(samples: &[f64], k_max: usize, seed: u64) -> Result<RssiThresholds> {
    if k_max == 0 {
        return Err(Error::Config("k_max must be at least 1".into()));
    }
    let centroids = kmeans_1d(samples, k_max + 1, seed)?;
    RssiThresholds::from_centroids(centroids)
}

/// Wall count for one reading.
///
/// A reading exactly on a bound `t_k` maps to `k`, the side with more walls.
pub fn classify_k(rssi: f64, th: &RssiThresholds) -> u32 {
    // Bounds are descending, so the qualifying ones form a suffix.
    th.bounds.iter().filter(|&&t| rssi <= t).count() as u32
}

/// Centered moving median; near the ends the window is truncated.
pub fn sliding_filter(series: &[f64], window: usize) -> Result<Vec<f64>> {
    if window == 0 || window % 2 == 0 {
        return Err(Error::Config(format!(
            "filter window must be odd and positive, got {window}"
        )));
    }
    let half = window / 2;
    let n = series.len();
    let mut buf = Vec::with_capacity(window);
    Ok((0..n)
        .map(|i| {
            buf.clear();
            buf.extend_from_slice(&series[i.saturating_sub(half)..(i + half + 1).min(n)]);
            median(&mut buf)
        })
        .collect())
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn open_plan(res: f64) -> Floorplan {
        Floorplan::from_fn(400, 10, res, |_| false).unwrap()
    }

    #[test]
    fn simulate_examples() {
        let params = RssiModelParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let plan = open_plan(0.05);
        let r = CellIndex::new(0, 5);
        assert_eq!(simulate_rssi(&plan, r, r, &params, &mut rng).unwrap(), -40.0);
        // 200 cells at 5 cm = 10 m
        let v = simulate_rssi(&plan, r, CellIndex::new(200, 5), &params, &mut rng).unwrap();
        assert!((v + 62.0).abs() < 1e-9, "{v}");

        let walled = Floorplan::from_fn(21, 3, 0.05, |c| c.x == 5 || c.x == 15).unwrap();
        let v = simulate_rssi(&walled, CellIndex::new(0, 1), CellIndex::new(20, 1), &params, &mut rng)
            .unwrap();
        assert!((v + 56.0).abs() < 1e-9, "{v}");
    }

    #[test]
    fn simulate_rejects_wall_pose_and_bad_params() {
        let walled = Floorplan::from_fn(10, 3, 1.0, |c| c.x == 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = RssiModelParams::default();
        assert!(simulate_rssi(&walled, CellIndex::new(0, 0), CellIndex::new(5, 0), &p, &mut rng).is_err());
        let bad = RssiModelParams {
            path_loss_exponent: 0.0,
            ..p
        };
        assert!(simulate_rssi(&walled, CellIndex::new(0, 0), CellIndex::new(1, 0), &bad, &mut rng).is_err());
    }

    #[test]
    fn noisy_simulation_reproducible() {
        let plan = open_plan(0.1);
        let p = RssiModelParams {
            noise_sigma: 3.0,
            ..Default::default()
        };
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..20)
                .map(|i| simulate_rssi(&plan, CellIndex::new(0, 0), CellIndex::new(i * 7, 3), &p, &mut rng).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(5), draw(5));
        assert_ne!(draw(5), draw(6));
    }

    #[test]
    fn threshold_midpoints() {
        let th = RssiThresholds::from_centroids(vec![-40.0, -55.0, -70.0]).unwrap();
        assert_eq!(th.bounds, vec![-47.5, -62.5]);
        let th = RssiThresholds::from_centroids(vec![-45.0, -65.0]).unwrap();
        assert_eq!(th.bounds, vec![-55.0]);
        assert_eq!(th.k_max(), 1);
    }

    #[test]
    fn non_monotone_thresholds_fail_loudly() {
        assert!(RssiThresholds::from_centroids(vec![-40.0, -40.0]).is_err());
        assert!(RssiThresholds::from_bounds(vec![-60.0, -50.0]).is_err());
        assert!(RssiThresholds::from_bounds(vec![]).is_err());
    }

    #[test]
    fn fit_propagates_degenerate_input() {
        assert!(matches!(
            fit_thresholds(&[-50.0; 10], 1, 0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn classify_examples() {
        let th = RssiThresholds::from_bounds(vec![-50.0, -60.0]).unwrap();
        assert_eq!(classify_k(-45.0, &th), 0);
        assert_eq!(classify_k(-55.0, &th), 1);
        assert_eq!(classify_k(-65.0, &th), 2);
        // equality sits on the larger-k side of each bound
        assert_eq!(classify_k(-50.0, &th), 1);
        assert_eq!(classify_k(-60.0, &th), 2);
    }

    #[test]
    fn filter_examples() {
        let s = [-50.0, -52.0, -90.0, -49.0, -51.0];
        assert_eq!(sliding_filter(&s, 1).unwrap(), s.to_vec());
        assert_eq!(
            sliding_filter(&[-50.0, -50.0, -90.0, -50.0, -50.0], 3).unwrap(),
            vec![-50.0; 5]
        );
        assert!(sliding_filter(&[], 5).unwrap().is_empty());
        assert!(matches!(sliding_filter(&s, 4), Err(Error::Config(_))));
        // truncated edge window of two
        assert_eq!(sliding_filter(&[-40.0, -50.0], 3).unwrap(), vec![-45.0, -45.0]);
    }

    proptest! {
        #[test]
        fn classify_monotone(a in -120.0f64..0.0, b in -120.0f64..0.0, c0 in -60.0f64..-30.0, gaps in prop::collection::vec(1.0f64..20.0, 1..4)) {
            let mut centroids = vec![c0];
            for g in gaps { let last = *centroids.last().unwrap(); centroids.push(last - g); }
            let th = RssiThresholds::from_centroids(centroids.clone()).unwrap();
            let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
            prop_assert!(classify_k(hi, &th) <= classify_k(lo, &th));
            for (j, &c) in centroids.iter().enumerate() {
                prop_assert_eq!(classify_k(c, &th), j as u32);
            }
        }

        #[test]
        fn fitted_bounds_strictly_decreasing(samples in prop::collection::vec(-100.0f64..-30.0, 6..60), k in 1usize..4, seed in any::<u64>()) {
            if let Ok(th) = fit_thresholds(&samples, k, seed) {
                prop_assert!(th.bounds.windows(2).all(|w| w[0] > w[1]));
                prop_assert_eq!(th.bounds.len(), k);
            }
        }

        #[test]
        fn noiseless_decreasing_in_walls(d in 0.0f64..30.0, k in 0u32..5) {
            let p = RssiModelParams::default();
            prop_assert!(p.mean_rssi(d, k + 1) < p.mean_rssi(d, k));
        }

        #[test]
        fn filter_preserves_length(s in prop::collection::vec(-90.0f64..-30.0, 0..40), half in 0usize..4) {
            let out = sliding_filter(&s, 2 * half + 1).unwrap();
            prop_assert_eq!(out.len(), s.len());
        }
    }
}

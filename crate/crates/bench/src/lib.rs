//! Inputs shared by the benchmarks.

use kvis::{count_wall_crossings, simulate_rssi, CellIndex, Floorplan, RssiModelParams, Trajectory};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Serpentine walk over every other free row, with noiseless readings and
/// true k for every router.
pub fn classified_walk(plan: &Floorplan) -> Trajectory {
    let mut poses = Vec::new();
    for y in (1..plan.height() - 1).step_by(2) {
        let row = (1..plan.width() - 1)
            .map(|x| CellIndex::new(x, y))
            .filter(|&c| !plan.is_wall(c));
        if y % 4 == 1 {
            poses.extend(row);
        } else {
            poses.extend(row.collect::<Vec<_>>().into_iter().rev());
        }
    }
    let params = RssiModelParams::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let mut traj = Trajectory::from_poses(&poses, 0.5, plan.routers().len());
    for s in traj.samples_mut() {
        for (r, &router) in plan.routers().iter().enumerate() {
            s.rssi[r] = Some(simulate_rssi(plan, router, s.pose, &params, &mut rng).unwrap());
            s.k[r] = Some(count_wall_crossings(plan, router, s.pose).unwrap());
        }
    }
    traj
}

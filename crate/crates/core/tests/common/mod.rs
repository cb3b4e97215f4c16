//! Independent oracles shared by the integration and acceptance suites.

#![allow(dead_code)]

use kvis::scenes::random_plan;
use kvis::{CellIndex, Floorplan};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Cells whose closed unit square contains the point
/// `(num_x / den, num_y / den)`.
fn touched(num_x: i64, num_y: i64, den: i64) -> Vec<(i64, i64)> {
    let axis = |n: i64| {
        let base = n.div_euclid(den);
        if n.rem_euclid(den) == 0 {
            vec![base - 1, base]
        } else {
            vec![base]
        }
    };
    let mut out = Vec::new();
    for x in axis(num_x) {
        for y in axis(num_y) {
            out.push((x, y));
        }
    }
    out
}

/// Samples the segment between the centers of `a` and `b` at steps of at most
/// 1/64 cell per axis, with the step count chosen so that every grid-line
/// crossing lands exactly on a sample. Returns, per sample, the in-grid cells
/// touching the sample point.
pub fn sample_cells(
    width: usize,
    height: usize,
    a: CellIndex,
    b: CellIndex,
) -> Vec<Vec<CellIndex>> {
    let (ax, ay) = (a.x as i64, a.y as i64);
    let (dx, dy) = (b.x as i64 - ax, b.y as i64 - ay);
    // crossings sit at odd multiples of 1/(2|d|) along the segment
    let l = {
        let (p, q) = (2 * dx.abs().max(1), 2 * dy.abs().max(1));
        p / gcd(p, q) * q
    };
    let need = 64 * dx.abs().max(dy.abs()).max(1);
    let steps = l * ((need + l - 1) / l);
    // point = center(a) + d * s / steps; numerators over den = 2 * steps
    let den = 2 * steps;
    (0..=steps)
        .map(|s| {
            let nx = (2 * ax + 1) * steps + 2 * dx * s;
            let ny = (2 * ay + 1) * steps + 2 * dy * s;
            touched(nx, ny, den)
                .into_iter()
                .filter(|&(x, y)| x >= 0 && y >= 0 && (x as usize) < width && (y as usize) < height)
                .map(|(x, y)| CellIndex::new(x as usize, y as usize))
                .collect()
        })
        .collect()
}

/// Brute-force wall-crossing count: the number of maximal runs of samples
/// that touch a wall cell other than the two endpoint cells.
pub fn brute_force_crossings(plan: &Floorplan, a: CellIndex, b: CellIndex) -> u32 {
    let mut runs = 0;
    let mut inside = false;
    for cells in sample_cells(plan.width(), plan.height(), a, b) {
        let wall = cells
            .iter()
            .any(|&c| c != a && c != b && plan.is_wall(c));
        if wall && !inside {
            runs += 1;
        }
        inside = wall;
    }
    runs
}

/// Random plan with interior walls plus scattered wall blobs, which exercise
/// corner contacts. The router is a random free cell.
pub fn cluttered_plan(width: usize, height: usize, seed: u64) -> Floorplan {
    let base = random_plan(width, height, 6, seed).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let mut walls = base.walls().to_vec();
    for _ in 0..(width * height / 60) {
        let x = rng.random_range(1..width - 1);
        let y = rng.random_range(1..height - 1);
        walls[y * width + x] = true;
        if rng.random_bool(0.5) {
            let x2 = (x + 1).min(width - 2);
            let y2 = (y + 1).min(height - 2);
            walls[y2 * width + x2] = true;
        }
    }
    let plan = Floorplan::new(width, height, base.resolution(), walls, vec![]).unwrap();
    let free: Vec<CellIndex> = plan.free_cells().collect();
    let router = free[rng.random_range(0..free.len())];
    plan.with_routers(vec![router]).unwrap()
}

/// Random pair of distinct free cells.
pub fn free_pair(plan: &Floorplan, rng: &mut impl Rng) -> (CellIndex, CellIndex) {
    let free: Vec<CellIndex> = plan.free_cells().collect();
    loop {
        let a = free[rng.random_range(0..free.len())];
        let b = free[rng.random_range(0..free.len())];
        if a != b {
            return (a, b);
        }
    }
}

/// Closed 4-connected loop around the rectangle `[x0, x1] x [y0, y1]`.
pub fn ring(x0: usize, y0: usize, x1: usize, y1: usize) -> Vec<CellIndex> {
    let mut out = Vec::new();
    out.extend((x0..x1).map(|x| CellIndex::new(x, y0)));
    out.extend((y0..y1).map(|y| CellIndex::new(x1, y)));
    out.extend((x0 + 1..=x1).rev().map(|x| CellIndex::new(x, y1)));
    out.extend((y0 + 1..=y1).rev().map(|y| CellIndex::new(x0, y)));
    out
}

/// Readings from every router of the plan at every pose.
pub fn simulate(
    plan: &Floorplan,
    poses: &[CellIndex],
    params: &kvis::RssiModelParams,
    seed: u64,
) -> kvis::Trajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut traj = kvis::Trajectory::from_poses(poses, 0.5, plan.routers().len());
    for s in traj.samples_mut() {
        for (r, &router) in plan.routers().iter().enumerate() {
            s.rssi[r] = Some(kvis::simulate_rssi(plan, router, s.pose, params, &mut rng).unwrap());
        }
    }
    traj
}

/// Fills every k with the true wall count from the plan.
pub fn true_k(plan: &Floorplan, traj: &mut kvis::Trajectory) {
    for s in traj.samples_mut() {
        for (r, &router) in plan.routers().iter().enumerate() {
            s.k[r] = Some(kvis::count_wall_crossings(plan, router, s.pose).unwrap());
        }
    }
}

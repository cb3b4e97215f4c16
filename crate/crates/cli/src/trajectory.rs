//! Wall-following trajectories over the free space of a plan.

use std::collections::VecDeque;

use anyhow::{bail, Result};
use kvis::{CellIndex, Floorplan};
use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::config::Pattern;

/// 4-connected free regions, each listed in row-major order, largest first
/// (ties keep row-major order of their first cell).
pub fn free_regions(plan: &Floorplan) -> Vec<Vec<CellIndex>> {
    let spec = plan.spec();
    let mut label = vec![usize::MAX; spec.len()];
    let mut regions = Vec::new();
    for start in plan.free_cells() {
        if label[spec.index(start)] != usize::MAX {
            continue;
        }
        let id = regions.len();
        let mut cells = Vec::new();
        let mut queue = VecDeque::from([start]);
        label[spec.index(start)] = id;
        while let Some(c) = queue.pop_front() {
            cells.push(c);
            for n in neighbors(c, plan) {
                let i = spec.index(n);
                if label[i] == usize::MAX {
                    label[i] = id;
                    queue.push_back(n);
                }
            }
        }
        cells.sort_by_key(|c| (c.y, c.x));
        regions.push(cells);
    }
    regions.sort_by_key(|r| std::cmp::Reverse(r.len()));
    regions
}

fn neighbors(c: CellIndex, plan: &Floorplan) -> impl Iterator<Item = CellIndex> + '_ {
    (0..4).filter_map(move |h| step(c, h, plan))
}

/// Headings: 0 east, 1 south, 2 west, 3 north (y grows downward).
fn step(c: CellIndex, heading: usize, plan: &Floorplan) -> Option<CellIndex> {
    let (dx, dy) = [(1i64, 0i64), (0, 1), (-1, 0), (0, -1)][heading];
    let x = c.x as i64 + dx;
    let y = c.y as i64 + dy;
    if x < 0 || y < 0 {
        return None;
    }
    let n = CellIndex::new(x as usize, y as usize);
    (plan.contains(n) && !plan.is_wall(n)).then_some(n)
}

/// Left-hand wall follower starting at the region's first cell heading east.
/// Stops when the first move is about to repeat, so the loop is closed and
/// its last pose is adjacent to its first.
pub fn wall_follow(plan: &Floorplan, start: CellIndex) -> Vec<CellIndex> {
    let first_move = |c: CellIndex, heading: usize| {
        [3, 0, 1, 2]
            .into_iter()
            .map(|turn| (heading + turn) % 4)
            .find_map(|h| step(c, h, plan).map(|n| (n, h)))
    };
    let Some(first) = first_move(start, 0) else {
        return vec![start];
    };
    let mut poses = vec![start];
    let (mut cell, mut heading) = first;
    // each (cell, heading) state occurs at most once per loop
    let limit = 4 * plan.spec().len() + 4;
    for _ in 0..limit {
        let next = first_move(cell, heading).expect("a cell reached by a move can move back");
        if cell == start && next == first {
            break;
        }
        poses.push(cell);
        (cell, heading) = next;
    }
    poses
}

/// Poses for the pattern. The seed rotates where each loop starts.
pub fn generate_trajectory(plan: &Floorplan, pattern: Pattern, seed: u64) -> Result<Vec<CellIndex>> {
    let regions = free_regions(plan);
    if regions.is_empty() {
        bail!("the plan has no free cell to walk");
    }
    let chosen: Vec<&Vec<CellIndex>> = match pattern {
        Pattern::Perimeter => {
            let skipped: usize = regions[1..].iter().map(Vec::len).sum();
            if skipped > 0 {
                warn!(
                    "{} free regions ({skipped} cells) are unreachable from the largest one and are skipped",
                    regions.len() - 1
                );
            }
            vec![&regions[0]]
        }
        Pattern::Rooms => regions.iter().collect(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut poses = Vec::new();
    for region in chosen {
        let mut lap = wall_follow(plan, region[0]);
        let shift = rng.random_range(0..lap.len());
        lap.rotate_left(shift);
        poses.extend(lap);
    }
    Ok(poses)
}

#[cfg(test)]
mod tests {
    use super::*;
    use kvis::scenes::{empty_room, room_row, two_rooms_with_door};

    fn adjacent(a: CellIndex, b: CellIndex) -> bool {
        a.chebyshev(b) == 1
    }

    #[test]
    fn square_room_loop() {
        let plan = empty_room(8, 8, 0.1).unwrap();
        let lap = generate_trajectory(&plan, Pattern::Perimeter, 0).unwrap();
        assert_eq!(lap.len(), 20);
        let mut ring: Vec<_> = (1..=6)
            .flat_map(|y| (1..=6).map(move |x| CellIndex::new(x, y)))
            .filter(|c| c.x == 1 || c.x == 6 || c.y == 1 || c.y == 6)
            .collect();
        let mut got = lap.clone();
        ring.sort_by_key(|c| (c.y, c.x));
        got.sort_by_key(|c| (c.y, c.x));
        assert_eq!(got, ring);
        for i in 0..lap.len() {
            assert!(adjacent(lap[i], lap[(i + 1) % lap.len()]), "{i}");
        }
    }

    #[test]
    fn single_free_cell() {
        let plan = Floorplan::from_fn(3, 3, 1.0, |c| c != CellIndex::new(1, 1)).unwrap();
        assert_eq!(generate_trajectory(&plan, Pattern::Rooms, 9).unwrap(), vec![CellIndex::new(1, 1)]);
    }

    #[test]
    fn door_connects_both_rooms() {
        let plan = two_rooms_with_door(6, 8, 2, 0.1).unwrap();
        let lap = generate_trajectory(&plan, Pattern::Rooms, 1).unwrap();
        assert!(lap.iter().any(|c| c.x < 7) && lap.iter().any(|c| c.x > 7));
        for w in lap.windows(2) {
            assert!(adjacent(w[0], w[1]));
        }
    }

    #[test]
    fn rooms_visits_every_region_and_perimeter_one() {
        let plan = room_row(3, 4, 6, 0.1).unwrap();
        let rooms = generate_trajectory(&plan, Pattern::Rooms, 0).unwrap();
        for wall_x in [0usize, 5, 10] {
            assert!(rooms.iter().any(|c| c.x > wall_x && c.x < wall_x + 5));
        }
        let perimeter = generate_trajectory(&plan, Pattern::Perimeter, 0).unwrap();
        assert!(perimeter.iter().all(|c| c.x < 5));
    }

    #[test]
    fn seed_only_rotates_the_loop() {
        let plan = empty_room(9, 7, 0.1).unwrap();
        let a = generate_trajectory(&plan, Pattern::Perimeter, 1).unwrap();
        let b = generate_trajectory(&plan, Pattern::Perimeter, 2).unwrap();
        let offset = b.iter().position(|&c| c == a[0]).unwrap();
        let mut r = b.clone();
        r.rotate_left(offset);
        assert_eq!(r, a);
    }

    #[test]
    fn all_wall_plan_rejected() {
        let plan = Floorplan::from_fn(2, 2, 1.0, |_| true).unwrap();
        assert!(generate_trajectory(&plan, Pattern::Perimeter, 0).is_err());
    }
}

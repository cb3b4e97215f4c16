//! Synthetic floorplans for tests, benches and demos. Every scene has a
//! one-cell wall border.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::grid::{CellIndex, Floorplan};

fn on_border(c: CellIndex, w: usize, h: usize) -> bool {
    c.x == 0 || c.y == 0 || c.x + 1 == w || c.y + 1 == h
}

/// A single room with the router at its center.
pub fn empty_room(width: usize, height: usize, resolution: f64) -> Result<Floorplan> {
    Floorplan::from_fn(width, height, resolution, |c| on_border(c, width, height))?
        .with_routers(vec![CellIndex::new(width / 2, height / 2)])
}

/// `rooms` rooms of `room_width` free columns each, side by side and separated
/// by full-height one-cell walls. The router sits in the middle of room 0.
pub fn room_row(
    rooms: usize,
    room_width: usize,
    height: usize,
    resolution: f64,
) -> Result<Floorplan> {
    let width = rooms * (room_width + 1) + 1;
    Floorplan::from_fn(width, height, resolution, |c| {
        on_border(c, width, height) || c.x % (room_width + 1) == 0
    })?
    .with_routers(vec![CellIndex::new(1 + room_width / 2, height / 2)])
}

/// Two rooms split by a vertical wall with a door of `door` cells centered on
/// it. Routers: one in each room, each at the room center.
pub fn two_rooms_with_door(
    room_width: usize,
    height: usize,
    door: usize,
    resolution: f64,
) -> Result<Floorplan> {
    let width = 2 * room_width + 3;
    let split = room_width + 1;
    let door_lo = height.saturating_sub(door) / 2;
    let door_hi = door_lo + door;
    let plan = Floorplan::from_fn(width, height, resolution, |c| {
        on_border(c, width, height) || (c.x == split && !(door_lo..door_hi).contains(&c.y))
    })?;
    let cy = height / 2;
    plan.with_routers(vec![
        CellIndex::new(1 + room_width / 2, cy),
        CellIndex::new(split + 1 + room_width / 2, cy),
    ])
}

/// Border plus `segments` axis-aligned interior walls, each with a door, and
/// one router on a free cell. Deterministic in `seed`.
pub fn random_plan(width: usize, height: usize, segments: usize, seed: u64) -> Result<Floorplan> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut walls: Vec<bool> = (0..width * height)
        .map(|i| on_border(CellIndex::new(i % width, i / width), width, height))
        .collect();
    if width > 4 && height > 4 {
        for _ in 0..segments {
            if rng.random_bool(0.5) {
                let x = rng.random_range(2..width - 2);
                let door = rng.random_range(1..height - 1);
                for y in 1..height - 1 {
                    walls[y * width + x] = y != door;
                }
            } else {
                let y = rng.random_range(2..height - 2);
                let door = rng.random_range(1..width - 1);
                for x in 1..width - 1 {
                    walls[y * width + x] = x != door;
                }
            }
        }
    }
    let plan = Floorplan::new(width, height, 1.0, walls, Vec::new())?;
    let free: Vec<CellIndex> = plan.free_cells().collect();
    let router = free[rng.random_range(0..free.len())];
    plan.with_routers(vec![router])
}

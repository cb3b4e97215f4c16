//! Wall recovery from a complete k-field.
//!
//! Rays run from the router to every cell on the grid border. Walking a ray
//! outward, whenever the k-value rises between two consecutive known cells,
//! the cells separating them are where the two k-regions meet and are marked
//! as wall. Cells without a value (wall sentinels) are skipped; decreases are
//! ignored.

use crate::error::{Error, Result};
use crate::grid::CellIndex;
use crate::raycast::{supercover, KField};

/// Boolean wall mask, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WallGrid {
    pub width: usize,
    pub height: usize,
    pub walls: Vec<bool>,
}

impl WallGrid {
    pub fn is_wall(&self, c: CellIndex) -> bool {
        self.walls[c.y * self.width + c.x]
    }

    pub fn count(&self) -> usize {
        self.walls.iter().filter(|&&w| w).count()
    }

    pub fn wall_cells(&self) -> impl Iterator<Item = CellIndex> + '_ {
        self.walls
            .iter()
            .enumerate()
            .filter(|(_, &w)| w)
            .map(|(i, _)| CellIndex::new(i % self.width, i / self.width))
    }
}

pub fn dense_inverse(field: &KField) -> Result<WallGrid> {
    let router = field.router();
    match field.get(router) {
        Some(0) => {}
        other => {
            return Err(Error::InconsistentField(format!(
                "router cell ({}, {}) holds {other:?}, expected k = 0",
                router.x, router.y
            )))
        }
    }
    let spec = field.spec();
    let mut walls = vec![false; spec.len()];
    for target in spec.perimeter() {
        let ray = supercover(router, target);
        let cells = ray.cells();
        let mut prev = (0usize, 0u32);
        for (i, &c) in cells.iter().enumerate().skip(1) {
            let Some(k) = field.get(c) else { continue };
            if k > prev.1 {
                for &between in &cells[prev.0 + 1..i] {
                    walls[spec.index(between)] = true;
                }
            }
            prev = (i, k);
        }
    }
    Ok(WallGrid {
        width: spec.width,
        height: spec.height,
        walls,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Floorplan;
    use crate::raycast::k_field;

    #[test]
    fn all_zero_field_has_no_walls() {
        let f = KField::new(6, 4, CellIndex::new(2, 2), vec![Some(0); 24]).unwrap();
        assert_eq!(dense_inverse(&f).unwrap().count(), 0);
    }

    #[test]
    fn single_wall_column_recovered_exactly() {
        let plan = Floorplan::from_fn(10, 10, 1.0, |c| c.x == 5).unwrap();
        let field = k_field(&plan, CellIndex::new(2, 2)).unwrap();
        let walls = dense_inverse(&field).unwrap();
        // Cells a ray passes through on its way to a free cell beyond.
        let mut covered = vec![false; 100];
        for t in plan.spec().perimeter() {
            let ray = supercover(CellIndex::new(2, 2), t);
            let last_free = ray.cells().iter().rposition(|&c| !plan.is_wall(c)).unwrap();
            for &c in &ray.cells()[..last_free] {
                covered[c.y * 10 + c.x] = true;
            }
        }
        for c in plan.spec().cells() {
            let expected = c.x == 5 && covered[c.y * 10 + c.x];
            assert_eq!(walls.is_wall(c), expected, "{c:?}");
        }
        assert!(walls.count() >= 8);
    }

    #[test]
    fn router_must_be_zero() {
        let mut values = vec![Some(0); 9];
        values[4] = Some(1);
        let f = KField::new(3, 3, CellIndex::new(1, 1), values).unwrap();
        assert!(matches!(dense_inverse(&f), Err(Error::InconsistentField(_))));
        let mut values = vec![Some(0); 9];
        values[4] = None;
        let f = KField::new(3, 3, CellIndex::new(1, 1), values).unwrap();
        assert!(dense_inverse(&f).is_err());
    }

    #[test]
    fn decreases_ignored() {
        // 1-row field: 0 0 - 1 1 0 0 ; the drop back to 0 is not an error
        let v = vec![Some(0), Some(0), None, Some(1), Some(1), Some(0), Some(0)];
        let f = KField::new(7, 1, CellIndex::new(0, 0), v).unwrap();
        let walls = dense_inverse(&f).unwrap();
        assert_eq!(walls.walls, vec![false, false, true, false, false, false, false]);
    }
}

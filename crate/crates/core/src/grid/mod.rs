//! Grid types shared by every stage: ground-truth floorplans, belief maps and
//! the coordinate transforms between cells and metric points.
//!
//! Storage is row-major with the origin at the top-left cell and `y` growing
//! downward, the same layout as the grayscale rasters floorplans ship in.

pub mod io;

use serde::{Deserialize, Serialize};

use crate::error::{Axis, Error, Result};

/// Integer cell coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct CellIndex {
    pub x: usize,
    pub y: usize,
}

impl CellIndex {
    pub const fn new(x: usize, y: usize) -> Self {
        Self { x, y }
    }

    /// Chebyshev distance, i.e. the number of 8-connected steps between cells.
    pub fn chebyshev(self, other: CellIndex) -> usize {
        self.x.abs_diff(other.x).max(self.y.abs_diff(other.y))
    }

    /// Euclidean distance between cell centers, in cells.
    pub fn center_distance(self, other: CellIndex) -> f64 {
        let dx = self.x as f64 - other.x as f64;
        let dy = self.y as f64 - other.y as f64;
        dx.hypot(dy)
    }
}

impl From<(usize, usize)> for CellIndex {
    fn from((x, y): (usize, usize)) -> Self {
        Self { x, y }
    }
}

/// Metric point in the map frame, meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorldPoint {
    pub x: f64,
    pub y: f64,
}

impl WorldPoint {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Grid dimensions and cell size, without any cell contents.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub width: usize,
    pub height: usize,
    /// Meters per cell.
    pub resolution: f64,
}

impl GridSpec {
    pub fn new(width: usize, height: usize, resolution: f64) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::Domain(format!(
                "grid must be at least 1x1, got {width}x{height}"
            )));
        }
        if !(resolution > 0.0 && resolution.is_finite()) {
            return Err(Error::Domain(format!(
                "resolution must be positive and finite, got {resolution}"
            )));
        }
        Ok(Self {
            width,
            height,
            resolution,
        })
    }

    pub fn contains(&self, c: CellIndex) -> bool {
        c.x < self.width && c.y < self.height
    }

    pub fn check(&self, c: CellIndex) -> Result<()> {
        if self.contains(c) {
            Ok(())
        } else {
            Err(Error::CellOutOfBounds {
                x: c.x,
                y: c.y,
                width: self.width,
                height: self.height,
            })
        }
    }

    #[inline]
    pub fn index(&self, c: CellIndex) -> usize {
        c.y * self.width + c.x
    }

    #[inline]
    pub fn cell_at(&self, index: usize) -> CellIndex {
        CellIndex::new(index % self.width, index / self.width)
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cells(&self) -> impl Iterator<Item = CellIndex> + '_ {
        (0..self.len()).map(move |i| self.cell_at(i))
    }

    /// Cells on the outer ring of the grid, each listed once.
    pub fn perimeter(&self) -> Vec<CellIndex> {
        let (w, h) = (self.width, self.height);
        let mut out = Vec::with_capacity(2 * (w + h));
        for x in 0..w {
            out.push(CellIndex::new(x, 0));
        }
        for y in 1..h {
            out.push(CellIndex::new(w - 1, y));
        }
        if h > 1 {
            for x in (0..w.saturating_sub(1)).rev() {
                out.push(CellIndex::new(x, h - 1));
            }
        }
        if w > 1 {
            for y in (1..h.saturating_sub(1)).rev() {
                out.push(CellIndex::new(0, y));
            }
        }
        out
    }

    /// Maps a metric point to the cell containing it.
    pub fn world_to_cell(&self, p: WorldPoint) -> Result<CellIndex> {
        let x = axis_to_cell(p.x, self.width, self.resolution, Axis::X)?;
        let y = axis_to_cell(p.y, self.height, self.resolution, Axis::Y)?;
        Ok(CellIndex::new(x, y))
    }

    /// Center of a cell in meters.
    pub fn cell_to_world(&self, c: CellIndex) -> WorldPoint {
        WorldPoint::new(
            (c.x as f64 + 0.5) * self.resolution,
            (c.y as f64 + 0.5) * self.resolution,
        )
    }
}

fn axis_to_cell(v: f64, cells: usize, resolution: f64, axis: Axis) -> Result<usize> {
    let extent = cells as f64 * resolution;
    if !v.is_finite() || v < 0.0 || v >= extent {
        return Err(Error::OutOfExtent {
            axis,
            value: v,
            extent,
        });
    }
    // Guard against floor() landing on `cells` through rounding just below the extent.
    Ok(((v / resolution).floor() as usize).min(cells - 1))
}

/// Binary ground-truth map with router positions.
#[derive(Debug, Clone, PartialEq)]
pub struct Floorplan {
    spec: GridSpec,
    walls: Vec<bool>,
    routers: Vec<CellIndex>,
}

impl Floorplan {
    /// Builds a plan from a row-major wall mask.
    pub fn new(
        width: usize,
        height: usize,
        resolution: f64,
        walls: Vec<bool>,
        routers: Vec<CellIndex>,
    ) -> Result<Self> {
        let spec = GridSpec::new(width, height, resolution)?;
        if walls.len() != spec.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} wall flags for a {width}x{height} grid",
                walls.len()
            )));
        }
        let plan = Self {
            spec,
            walls,
            routers: Vec::new(),
        };
        plan.with_routers(routers)
    }

    pub fn from_fn(
        width: usize,
        height: usize,
        resolution: f64,
        mut is_wall: impl FnMut(CellIndex) -> bool,
    ) -> Result<Self> {
        let spec = GridSpec::new(width, height, resolution)?;
        let walls = spec.cells().map(&mut is_wall).collect();
        Self::new(width, height, resolution, walls, Vec::new())
    }

    /// Replaces the router list, validating each position.
    pub fn with_routers(mut self, routers: Vec<CellIndex>) -> Result<Self> {
        for (i, &r) in routers.iter().enumerate() {
            if !self.spec.contains(r) {
                return Err(Error::Domain(format!(
                    "router {i} at ({}, {}) lies outside the {}x{} grid",
                    r.x, r.y, self.spec.width, self.spec.height
                )));
            }
            if self.is_wall(r) {
                return Err(Error::Domain(format!(
                    "router {i} at ({}, {}) sits on a wall cell",
                    r.x, r.y
                )));
            }
        }
        self.routers = routers;
        Ok(self)
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn width(&self) -> usize {
        self.spec.width
    }

    pub fn height(&self) -> usize {
        self.spec.height
    }

    pub fn resolution(&self) -> f64 {
        self.spec.resolution
    }

    pub fn routers(&self) -> &[CellIndex] {
        &self.routers
    }

    pub fn walls(&self) -> &[bool] {
        &self.walls
    }

    pub fn contains(&self, c: CellIndex) -> bool {
        self.spec.contains(c)
    }

    /// Panics when `c` is out of bounds.
    #[inline]
    pub fn is_wall(&self, c: CellIndex) -> bool {
        self.walls[self.spec.index(c)]
    }

    pub fn free_cells(&self) -> impl Iterator<Item = CellIndex> + '_ {
        self.spec.cells().filter(|&c| !self.is_wall(c))
    }

    pub fn wall_count(&self) -> usize {
        self.walls.iter().filter(|&&w| w).count()
    }

    /// Free floor area in square meters.
    pub fn free_area_m2(&self) -> f64 {
        let n = self.walls.len() - self.wall_count();
        n as f64 * self.spec.resolution * self.spec.resolution
    }

    pub fn world_to_cell(&self, p: WorldPoint) -> Result<CellIndex> {
        self.spec.world_to_cell(p)
    }

    pub fn cell_to_world(&self, c: CellIndex) -> WorldPoint {
        self.spec.cell_to_world(c)
    }
}

/// Convenience wrapper over [`GridSpec::world_to_cell`].
pub fn world_to_cell(p: WorldPoint, plan: &Floorplan) -> Result<CellIndex> {
    plan.world_to_cell(p)
}

/// Inclusive axis-aligned cell rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CellRect {
    pub min: CellIndex,
    pub max: CellIndex,
}

impl CellRect {
    /// Grows the rectangle by `margin` cells on every side, clipped to the grid.
    pub fn expand(self, margin: usize, spec: &GridSpec) -> CellRect {
        CellRect {
            min: CellIndex::new(
                self.min.x.saturating_sub(margin),
                self.min.y.saturating_sub(margin),
            ),
            max: CellIndex::new(
                (self.max.x + margin).min(spec.width - 1),
                (self.max.y + margin).min(spec.height - 1),
            ),
        }
    }

    /// Cells on the rectangle outline, each listed once.
    pub fn outline(self) -> Vec<CellIndex> {
        let mut out = Vec::new();
        for x in self.min.x..=self.max.x {
            out.push(CellIndex::new(x, self.min.y));
            if self.max.y != self.min.y {
                out.push(CellIndex::new(x, self.max.y));
            }
        }
        for y in self.min.y + 1..self.max.y {
            out.push(CellIndex::new(self.min.x, y));
            if self.max.x != self.min.x {
                out.push(CellIndex::new(self.max.x, y));
            }
        }
        out
    }

    pub fn contains(&self, c: CellIndex) -> bool {
        (self.min.x..=self.max.x).contains(&c.x) && (self.min.y..=self.max.y).contains(&c.y)
    }
}

/// Smallest rectangle containing every point.
pub fn bounding_box<I>(points: I) -> Result<CellRect>
where
    I: IntoIterator<Item = CellIndex>,
{
    let mut it = points.into_iter();
    let first = it
        .next()
        .ok_or_else(|| Error::Domain("bounding box of an empty point set".into()))?;
    let rect = it.fold(
        CellRect {
            min: first,
            max: first,
        },
        |r, p| CellRect {
            min: CellIndex::new(r.min.x.min(p.x), r.min.y.min(p.y)),
            max: CellIndex::new(r.max.x.max(p.x), r.max.y.max(p.y)),
        },
    );
    Ok(rect)
}

/// Belief value of a cell nobody has observed.
pub const UNKNOWN: f64 = 0.5;

/// Per-cell probability of free space plus the variance of that estimate.
///
/// Unobserved cells hold exactly [`UNKNOWN`] and no variance.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefMap {
    width: usize,
    height: usize,
    prob_free: Vec<f64>,
    variance: Vec<Option<f64>>,
}

impl BeliefMap {
    pub fn unknown(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            prob_free: vec![UNKNOWN; width * height],
            variance: vec![None; width * height],
        }
    }

    /// Builds a map from raw probabilities; variances start unset.
    pub fn from_probabilities(width: usize, height: usize, prob_free: Vec<f64>) -> Result<Self> {
        if prob_free.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} probabilities for a {width}x{height} grid",
                prob_free.len()
            )));
        }
        if let Some(bad) = prob_free.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::Domain(format!("probability {bad} outside [0, 1]")));
        }
        Ok(Self {
            width,
            height,
            variance: vec![None; prob_free.len()],
            prob_free,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    fn index(&self, c: CellIndex) -> usize {
        debug_assert!(c.x < self.width && c.y < self.height);
        c.y * self.width + c.x
    }

    pub fn prob_free(&self, c: CellIndex) -> f64 {
        self.prob_free[self.index(c)]
    }

    pub fn variance(&self, c: CellIndex) -> Option<f64> {
        self.variance[self.index(c)]
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.prob_free
    }

    pub fn is_unknown(&self, c: CellIndex) -> bool {
        self.prob_free(c) == UNKNOWN
    }

    /// Stores a belief, clamping the probability into [0, 1].
    pub fn set(&mut self, c: CellIndex, prob_free: f64, variance: Option<f64>) {
        let i = self.index(c);
        self.prob_free[i] = prob_free.clamp(0.0, 1.0);
        self.variance[i] = variance;
    }

    pub fn matches(&self, plan: &Floorplan) -> bool {
        self.width == plan.width() && self.height == plan.height()
    }
}

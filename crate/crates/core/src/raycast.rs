//! Grid ray traversal and the forward k-visibility computation.
//!
//! Rays join cell centers. Traversal is a supercover: every cell whose
//! interior the segment enters is visited, so a ray cannot slip diagonally
//! between two wall cells that share only a corner. When the segment passes
//! exactly through a lattice corner both side cells are emitted, the one
//! reached by the x step first.

use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::grid::{CellIndex, Floorplan, GridSpec};

/// Ordered cells from `a` to `b` inclusive.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RayPath {
    cells: Vec<CellIndex>,
}

impl RayPath {
    pub fn cells(&self) -> &[CellIndex] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn first(&self) -> CellIndex {
        self.cells[0]
    }

    pub fn last(&self) -> CellIndex {
        self.cells[self.cells.len() - 1]
    }

    pub fn position(&self, c: CellIndex) -> Option<usize> {
        self.cells.iter().position(|&p| p == c)
    }

    /// Sub-path between two indices, inclusive.
    pub fn slice(&self, from: usize, to: usize) -> RayPath {
        RayPath {
            cells: self.cells[from..=to].to_vec(),
        }
    }

    pub fn into_cells(self) -> Vec<CellIndex> {
        self.cells
    }
}

/// Supercover of the segment between the centers of `a` and `b`, without
/// bounds checks.
pub fn supercover(a: CellIndex, b: CellIndex) -> RayPath {
    let dx = b.x as i64 - a.x as i64;
    let dy = b.y as i64 - a.y as i64;
    let (nx, ny) = (dx.abs(), dy.abs());
    let (sx, sy) = (dx.signum(), dy.signum());
    let (mut x, mut y) = (a.x as i64, a.y as i64);
    let mut cells = Vec::with_capacity((nx + ny + 1) as usize);
    cells.push(a);
    let (mut ix, mut iy) = (0i64, 0i64);
    let at = |x: i64, y: i64| CellIndex::new(x as usize, y as usize);
    while ix < nx || iy < ny {
        // Compare the parameters of the next vertical and horizontal grid
        // line crossings, (0.5 + ix) / nx against (0.5 + iy) / ny.
        let decision = (1 + 2 * ix) * ny - (1 + 2 * iy) * nx;
        if decision == 0 {
            cells.push(at(x + sx, y));
            cells.push(at(x, y + sy));
            x += sx;
            y += sy;
            ix += 1;
            iy += 1;
        } else if decision < 0 {
            x += sx;
            ix += 1;
        } else {
            y += sy;
            iy += 1;
        }
        cells.push(at(x, y));
    }
    RayPath { cells }
}

pub fn traverse(spec: &GridSpec, a: CellIndex, b: CellIndex) -> Result<RayPath> {
    spec.check(a)?;
    spec.check(b)?;
    Ok(supercover(a, b))
}

/// Number of maximal runs of wall along the path, ignoring the two endpoint
/// cells. Cells are closed, so where the path passes exactly through a grid
/// corner the four cells meeting there touch each other and a wall at that
/// corner joins or forms a run.
pub fn count_runs(cells: &[CellIndex], mut is_wall: impl FnMut(CellIndex) -> bool) -> u32 {
    let n = cells.len();
    if n < 3 {
        return 0;
    }
    let mut wall = |i: usize| i != 0 && i != n - 1 && is_wall(cells[i]);
    let diagonal = |a: CellIndex, b: CellIndex| a.x != b.x && a.y != b.y;
    let mut runs = 0;
    let mut inside = false;
    let mut i = 0;
    while i + 1 < n {
        // A corner group is emitted as current, x-side, y-side, diagonal.
        let (corner, next) = if i + 3 < n && diagonal(cells[i + 1], cells[i + 2]) {
            let touched = (i..=i + 3).fold(false, |acc, j| wall(j) || acc);
            (Some(touched), i + 3)
        } else {
            (None, i + 1)
        };
        for w in corner.into_iter().chain([wall(next)]) {
            if w && !inside {
                runs += 1;
            }
            inside = w;
        }
        i = next;
    }
    runs
}

/// Walls crossed by the segment between two free cells. A thick wall that
/// rasterizes to several consecutive cells counts once.
pub fn count_wall_crossings(plan: &Floorplan, a: CellIndex, b: CellIndex) -> Result<u32> {
    let path = traverse(&plan.spec(), a, b)?;
    for (name, c) in [("start", a), ("end", b)] {
        if plan.is_wall(c) {
            return Err(Error::Domain(format!(
                "{name} cell ({}, {}) is a wall; k is undefined there",
                c.x, c.y
            )));
        }
    }
    Ok(count_runs(path.cells(), |c| plan.is_wall(c)))
}

/// Per-cell wall-crossing counts relative to one router. Wall cells carry no
/// value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KField {
    width: usize,
    height: usize,
    router: CellIndex,
    values: Vec<Option<u32>>,
}

impl KField {
    pub fn new(
        width: usize,
        height: usize,
        router: CellIndex,
        values: Vec<Option<u32>>,
    ) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} k-values for a {width}x{height} grid",
                values.len()
            )));
        }
        if router.x >= width || router.y >= height {
            return Err(Error::InconsistentField(format!(
                "router ({}, {}) outside the {width}x{height} field",
                router.x, router.y
            )));
        }
        Ok(Self {
            width,
            height,
            router,
            values,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn router(&self) -> CellIndex {
        self.router
    }

    pub fn values(&self) -> &[Option<u32>] {
        &self.values
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            width: self.width,
            height: self.height,
            resolution: 1.0,
        }
    }

    pub fn get(&self, c: CellIndex) -> Option<u32> {
        self.values[c.y * self.width + c.x]
    }

    /// Grid of integers, one row per line, `-1` for wall cells.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
        for row in self.values.chunks(self.width) {
            w.write_record(
                row.iter()
                    .map(|v| v.map_or_else(|| "-1".to_string(), |k| k.to_string())),
            )?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(input: R, router: CellIndex) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(input);
        let mut width = None;
        let mut values = Vec::new();
        for (line, record) in r.records().enumerate() {
            let record = record?;
            match width {
                None => width = Some(record.len()),
                Some(w) if w != record.len() => {
                    return Err(Error::DimensionMismatch(format!(
                        "k-field row {} has {} columns, expected {w}",
                        line + 1,
                        record.len()
                    )))
                }
                _ => {}
            }
            for field in record.iter() {
                let v: i64 = field.parse().map_err(|_| {
                    Error::Domain(format!("k-field row {}: bad value {field:?}", line + 1))
                })?;
                values.push(match v {
                    -1 => None,
                    k if k >= 0 => Some(k as u32),
                    k => {
                        return Err(Error::Domain(format!(
                            "k-field row {}: negative value {k}",
                            line + 1
                        )))
                    }
                });
            }
        }
        let width = width.ok_or_else(|| Error::Domain("empty k-field".into()))?;
        let height = values.len() / width;
        Self::new(width, height, router, values)
    }
}

pub fn k_field(plan: &Floorplan, router: CellIndex) -> Result<KField> {
    plan.spec().check(router)?;
    if plan.is_wall(router) {
        return Err(Error::Domain(format!(
            "router ({}, {}) is on a wall cell",
            router.x, router.y
        )));
    }
    let spec = plan.spec();
    let values = spec
        .cells()
        .map(|c| {
            if plan.is_wall(c) {
                None
            } else {
                Some(count_runs(supercover(router, c).cells(), |p| plan.is_wall(p)))
            }
        })
        .collect();
    KField::new(plan.width(), plan.height(), router, values)
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Bounds, Point};

/// Column (`x`) and row (`y`) index of a grid cell.
pub type Cell = (usize, usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellState {
    Free,
    Occupied,
    Unknown,
}

/// Size, resolution and placement shared by every grid layer.
///
/// `origin` is the world position of the lower-left corner of cell (0, 0);
/// cell centers sit half a cell inside it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridGeometry {
    pub width: usize,
    pub height: usize,
    pub resolution: f64,
    pub origin: Point,
}

impl GridGeometry {
    pub fn new(width: usize, height: usize, resolution: f64, origin: Point) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::InvalidConfig(format!(
                "grid must be at least 1x1, got {width}x{height}"
            )));
        }
        if !(resolution > 0.0 && resolution.is_finite()) || !origin.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "grid resolution must be positive and origin finite (resolution {resolution})"
            )));
        }
        Ok(GridGeometry {
            width,
            height,
            resolution,
            origin,
        })
    }

    /// Smallest grid at `resolution` that covers `bounds`.
    pub fn covering(bounds: &Bounds, resolution: f64) -> Result<Self> {
        let cells = |extent: f64| (extent / resolution - 1e-9).ceil().max(1.0) as usize;
        GridGeometry::new(
            cells(bounds.width()),
            cells(bounds.height()),
            resolution,
            Point::new(bounds.x_min, bounds.y_min),
        )
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, (x, y): Cell) -> usize {
        y * self.width + x
    }

    pub fn contains(&self, (x, y): Cell) -> bool {
        x < self.width && y < self.height
    }

    pub fn cell_center(&self, (x, y): Cell) -> Point {
        Point::new(
            self.origin.x + (x as f64 + 0.5) * self.resolution,
            self.origin.y + (y as f64 + 0.5) * self.resolution,
        )
    }

    pub fn world_to_cell(&self, p: Point) -> Option<Cell> {
        let fx = ((p.x - self.origin.x) / self.resolution).floor();
        let fy = ((p.y - self.origin.y) / self.resolution).floor();
        if fx < 0.0 || fy < 0.0 || !fx.is_finite() || !fy.is_finite() {
            return None;
        }
        let cell = (fx as usize, fy as usize);
        self.contains(cell).then_some(cell)
    }

    pub(crate) fn check_same(&self, other: &GridGeometry) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GeometryMismatch(format!("{self:?} vs {other:?}")))
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OccupancyGrid {
    geometry: GridGeometry,
    cells: Vec<CellState>,
}

impl OccupancyGrid {
    pub fn filled(geometry: GridGeometry, state: CellState) -> Self {
        OccupancyGrid {
            geometry,
            cells: vec![state; geometry.len()],
        }
    }

    /// Row-major cells, row 0 first.
    pub fn from_cells(geometry: GridGeometry, cells: Vec<CellState>) -> Result<Self> {
        if cells.len() != geometry.len() {
            return Err(Error::LengthMismatch {
                what: "occupancy cells",
                expected: geometry.len(),
                actual: cells.len(),
            });
        }
        Ok(OccupancyGrid { geometry, cells })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn cells(&self) -> &[CellState] {
        &self.cells
    }

    pub fn get(&self, cell: Cell) -> Option<CellState> {
        self.geometry
            .contains(cell)
            .then(|| self.cells[self.geometry.index(cell)])
    }

    pub fn set(&mut self, cell: Cell, state: CellState) {
        assert!(self.geometry.contains(cell), "cell {cell:?} outside grid");
        let i = self.geometry.index(cell);
        self.cells[i] = state;
    }
}

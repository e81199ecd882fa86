use super::grid::{Cell, CellState, GridGeometry, OccupancyGrid};
use super::potential::PotentialField;
use crate::error::{Error, Result};

/// Per-cell traversal multiplier; `None` marks an impassable cell.
#[derive(Clone, Debug, PartialEq)]
pub struct CostGrid {
    geometry: GridGeometry,
    multipliers: Vec<Option<f64>>,
}

impl CostGrid {
    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn multiplier(&self, cell: Cell) -> Option<f64> {
        if !self.geometry.contains(cell) {
            return None;
        }
        self.multipliers[self.geometry.index(cell)]
    }

    pub fn is_passable(&self, cell: Cell) -> bool {
        self.multiplier(cell).is_some()
    }

    pub fn multipliers(&self) -> &[Option<f64>] {
        &self.multipliers
    }
}

/// Free cells cost `1 + weight * potential`; occupied and unknown cells are
/// impassable whatever their potential.
pub fn combine_costs(grid: &OccupancyGrid, field: &PotentialField, weight: f64) -> Result<CostGrid> {
    grid.geometry().check_same(field.geometry())?;
    if !(weight >= 0.0 && weight.is_finite()) {
        return Err(Error::InvalidConfig(format!("potential weight must be >= 0, got {weight}")));
    }
    let multipliers = grid
        .cells()
        .iter()
        .zip(field.values())
        .map(|(state, p)| match state {
            CellState::Free => Some(1.0 + weight * p),
            CellState::Occupied | CellState::Unknown => None,
        })
        .collect();
    Ok(CostGrid {
        geometry: *grid.geometry(),
        multipliers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point;

    #[test]
    fn combination_rules() {
        let g = GridGeometry::new(2, 2, 1.0, Point::new(0.0, 0.0)).unwrap();
        let grid = OccupancyGrid::from_cells(
            g,
            vec![CellState::Free, CellState::Occupied, CellState::Unknown, CellState::Free],
        )
        .unwrap();

        let zero = PotentialField::zeros(g, 5.0);
        let c = combine_costs(&grid, &zero, 10.0).unwrap();
        assert_eq!(c.multiplier((0, 0)), Some(1.0));
        assert_eq!(c.multiplier((1, 0)), None);
        assert_eq!(c.multiplier((0, 1)), None);
        assert_eq!(c.multiplier((1, 1)), Some(1.0));

        let field = PotentialField::from_values(g, 5.0, vec![1.0, 0.0, 1.0, 0.5]).unwrap();
        let c = combine_costs(&grid, &field, 2.0).unwrap();
        assert_eq!(c.multiplier((0, 0)), Some(3.0));
        assert_eq!(c.multiplier((1, 1)), Some(2.0));
        assert_eq!(c.multiplier((1, 0)), None);
    }

    #[test]
    fn geometry_must_match() {
        let a = GridGeometry::new(2, 2, 1.0, Point::new(0.0, 0.0)).unwrap();
        let b = GridGeometry::new(3, 2, 1.0, Point::new(0.0, 0.0)).unwrap();
        let grid = OccupancyGrid::filled(a, CellState::Free);
        let field = PotentialField::zeros(b, 5.0);
        assert!(matches!(combine_costs(&grid, &field, 1.0), Err(Error::GeometryMismatch(_))));
    }
}

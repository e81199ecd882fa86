use std::cmp::Reverse;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::cost::CostGrid;
use super::grid::Cell;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Fixed-point units per unit step at multiplier 1.
///
/// Edge costs are rounded to integers once, so every search over the same
/// cost grid sums identical integers and optimal costs compare exactly.
pub const COST_SCALE: f64 = (1u64 << 20) as f64;

const NEIGHBORS: [(isize, isize); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Path {
    pub cells: Vec<Cell>,
    pub poses: Vec<Point>,
    /// Total cost in cell-step units.
    pub cost: f64,
    /// Total cost in fixed-point units of [`COST_SCALE`].
    pub cost_units: u64,
}

impl Path {
    pub fn length_m(&self) -> f64 {
        self.poses.windows(2).map(|w| w[0].distance(&w[1])).sum()
    }
}

/// Cost of moving between two adjacent cells: step length (1 or sqrt 2)
/// times the mean of the two multipliers, in fixed-point units.
pub fn edge_cost_units(cost: &CostGrid, from: Cell, to: Cell) -> Option<u64> {
    let a = cost.multiplier(from)?;
    let b = cost.multiplier(to)?;
    let diagonal = from.0 != to.0 && from.1 != to.1;
    let len = if diagonal { std::f64::consts::SQRT_2 } else { 1.0 };
    Some((len * 0.5 * (a + b) * COST_SCALE).round() as u64)
}

/// Neighbors reachable in one move. Diagonal moves may not cut the corner
/// of an impassable cell.
pub fn successors(cost: &CostGrid, cell: Cell) -> impl Iterator<Item = Cell> + '_ {
    let g = *cost.geometry();
    NEIGHBORS.iter().filter_map(move |&(dx, dy)| {
        let nx = cell.0.checked_add_signed(dx)?;
        let ny = cell.1.checked_add_signed(dy)?;
        let next = (nx, ny);
        if !g.contains(next) || !cost.is_passable(next) {
            return None;
        }
        if dx != 0 && dy != 0 && !(cost.is_passable((nx, cell.1)) && cost.is_passable((cell.0, ny))) {
            return None;
        }
        Some(next)
    })
}

fn octile_units(a: Cell, b: Cell) -> u64 {
    let straight = COST_SCALE.round() as u64;
    let diagonal = (std::f64::consts::SQRT_2 * COST_SCALE).round() as u64;
    let dx = a.0.abs_diff(b.0) as u64;
    let dy = a.1.abs_diff(b.1) as u64;
    let (lo, hi) = if dx < dy { (dx, dy) } else { (dy, dx) };
    diagonal * lo + straight * (hi - lo)
}

/// A* over the 8-connected cost grid with the octile heuristic.
///
/// Returns `Ok(None)` when the goal is unreachable.
pub fn plan_path(cost: &CostGrid, start: Cell, goal: Cell) -> Result<Option<Path>> {
    for c in [start, goal] {
        if !cost.is_passable(c) {
            return Err(Error::ImpassableCell { x: c.0, y: c.1 });
        }
    }
    let g = *cost.geometry();
    let mut best = vec![u64::MAX; g.len()];
    let mut parent = vec![usize::MAX; g.len()];
    let mut closed = vec![false; g.len()];
    let mut open = BinaryHeap::new();

    let si = g.index(start);
    best[si] = 0;
    open.push(Reverse((octile_units(start, goal), 0u64, start.1, start.0)));

    while let Some(Reverse((_, g_cost, y, x))) = open.pop() {
        let cell = (x, y);
        let ci = g.index(cell);
        if closed[ci] {
            continue;
        }
        closed[ci] = true;
        if cell == goal {
            return Ok(Some(reconstruct(cost, &parent, goal, g_cost)));
        }
        for next in successors(cost, cell) {
            let ni = g.index(next);
            if closed[ni] {
                continue;
            }
            let step = edge_cost_units(cost, cell, next).expect("successor is passable");
            let tentative = g_cost + step;
            if tentative < best[ni] {
                best[ni] = tentative;
                parent[ni] = ci;
                open.push(Reverse((tentative + octile_units(next, goal), tentative, next.1, next.0)));
            }
        }
    }
    Ok(None)
}

fn reconstruct(cost: &CostGrid, parent: &[usize], goal: Cell, units: u64) -> Path {
    let g = cost.geometry();
    let mut cells = vec![goal];
    let mut at = g.index(goal);
    while parent[at] != usize::MAX {
        at = parent[at];
        cells.push((at % g.width, at / g.width));
    }
    cells.reverse();
    let poses = cells.iter().map(|&c| g.cell_center(c)).collect();
    Path {
        cells,
        poses,
        cost: units as f64 / COST_SCALE,
        cost_units: units,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::navigation::{combine_costs, CellState, GridGeometry, OccupancyGrid, PotentialField};

    fn free_grid(w: usize, h: usize) -> OccupancyGrid {
        let g = GridGeometry::new(w, h, 1.0, Point::new(0.0, 0.0)).unwrap();
        OccupancyGrid::filled(g, CellState::Free)
    }

    fn costs(grid: &OccupancyGrid) -> CostGrid {
        combine_costs(grid, &PotentialField::zeros(*grid.geometry(), 5.0), 10.0).unwrap()
    }

    #[test]
    fn diagonal_on_empty_grid() {
        let grid = free_grid(5, 5);
        let path = plan_path(&costs(&grid), (0, 0), (4, 4)).unwrap().unwrap();
        // Within the fixed-point quantum.
        assert!((path.cost - 4.0 * std::f64::consts::SQRT_2).abs() < 4.0 / COST_SCALE);
        assert_eq!(path.cells.len(), 5);
        assert_eq!(path.cells.first(), Some(&(0, 0)));
        assert_eq!(path.cells.last(), Some(&(4, 4)));
    }

    #[test]
    fn passes_through_wall_gap() {
        let mut grid = free_grid(9, 9);
        for y in 0..9 {
            if y != 6 {
                grid.set((4, y), CellState::Occupied);
            }
        }
        let path = plan_path(&costs(&grid), (0, 0), (8, 0)).unwrap().unwrap();
        assert!(path.cells.contains(&(4, 6)));
    }

    #[test]
    fn sealed_goal_is_unreachable() {
        let mut grid = free_grid(5, 5);
        for c in [(3, 3), (3, 4), (4, 3)] {
            grid.set(c, CellState::Occupied);
        }
        assert_eq!(plan_path(&costs(&grid), (0, 0), (4, 4)).unwrap(), None);
    }

    #[test]
    fn blocked_endpoints_are_errors() {
        let mut grid = free_grid(3, 3);
        grid.set((0, 0), CellState::Unknown);
        assert!(matches!(
            plan_path(&costs(&grid), (0, 0), (2, 2)),
            Err(Error::ImpassableCell { x: 0, y: 0 })
        ));
        assert!(plan_path(&costs(&grid), (1, 1), (7, 7)).is_err());
    }

    #[test]
    fn no_corner_cutting() {
        let mut grid = free_grid(2, 2);
        grid.set((1, 0), CellState::Occupied);
        grid.set((0, 1), CellState::Occupied);
        assert_eq!(plan_path(&costs(&grid), (0, 0), (1, 1)).unwrap(), None);
    }

    #[test]
    fn start_equals_goal() {
        let grid = free_grid(3, 3);
        let path = plan_path(&costs(&grid), (1, 1), (1, 1)).unwrap().unwrap();
        assert_eq!(path.cells, vec![(1, 1)]);
        assert_eq!(path.cost_units, 0);
    }
}

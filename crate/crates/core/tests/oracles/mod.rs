//! Independent reference implementations used by integration tests.
//!
//! Nothing here calls into the code under test beyond plain data accessors.

#![allow(dead_code)]

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use nalgebra::DMatrix;
use neuronav::navigation::{CellState, CostGrid, GridGeometry, OccupancyGrid};
use neuronav::Point;
use rand::Rng;

/// Spectral radius from Gelfand's formula, rho = lim ||A^k||^(1/k), with
/// k = 2^squarings reached by repeated squaring. Each square is normalized
/// and its scale tracked in log space so nothing under- or overflows.
pub fn gelfand_radius(a: &DMatrix<f64>, squarings: u32) -> f64 {
    let mut m = a.clone();
    let s0 = m.norm();
    if s0 == 0.0 {
        return 0.0;
    }
    m /= s0;
    let mut log_scale = s0.ln();
    for _ in 0..squarings {
        let sq = &m * &m;
        let s = sq.norm();
        if s == 0.0 {
            return 0.0;
        }
        m = sq / s;
        log_scale = 2.0 * log_scale + s.ln();
    }
    (log_scale / 2f64.powi(squarings as i32)).exp()
}

/// Occupancy grid with each cell occupied with probability `p`.
pub fn random_grid(rng: &mut impl Rng, width: usize, height: usize, p: f64) -> OccupancyGrid {
    let geometry = GridGeometry::new(width, height, 1.0, Point::new(0.0, 0.0)).unwrap();
    let cells = (0..width * height)
        .map(|_| {
            if rng.random::<f64>() < p {
                CellState::Occupied
            } else {
                CellState::Free
            }
        })
        .collect();
    OccupancyGrid::from_cells(geometry, cells).unwrap()
}

const FIXED_POINT: f64 = 1_048_576.0;

/// Plain Dijkstra on the 8-connected grid: straight steps cost 1, diagonal
/// steps sqrt 2, each times the mean multiplier of the two cells and
/// rounded to fixed point. Diagonals need both side cells passable.
pub fn dijkstra_cost_units(cost: &CostGrid, start: (usize, usize), goal: (usize, usize)) -> Option<u64> {
    let g = *cost.geometry();
    let (w, h) = (g.width as i64, g.height as i64);
    let m = |x: i64, y: i64| -> Option<f64> {
        if x < 0 || y < 0 || x >= w || y >= h {
            None
        } else {
            cost.multipliers()[(y * w + x) as usize]
        }
    };
    m(start.0 as i64, start.1 as i64)?;
    m(goal.0 as i64, goal.1 as i64)?;

    let mut dist = vec![u64::MAX; (w * h) as usize];
    let mut heap = BinaryHeap::new();
    let s = (start.1 as i64 * w + start.0 as i64) as usize;
    dist[s] = 0;
    heap.push(Reverse((0u64, s)));
    while let Some(Reverse((d, i))) = heap.pop() {
        if d > dist[i] {
            continue;
        }
        let (x, y) = (i as i64 % w, i as i64 / w);
        if (x as usize, y as usize) == goal {
            return Some(d);
        }
        let here = m(x, y).unwrap();
        for dx in -1..=1i64 {
            for dy in -1..=1i64 {
                if dx == 0 && dy == 0 {
                    continue;
                }
                let Some(there) = m(x + dx, y + dy) else { continue };
                let diagonal = dx != 0 && dy != 0;
                if diagonal && (m(x + dx, y).is_none() || m(x, y + dy).is_none()) {
                    continue;
                }
                let len = if diagonal { 2f64.sqrt() } else { 1.0 };
                let step = (len * (here + there) / 2.0 * FIXED_POINT).round() as u64;
                let j = ((y + dy) * w + x + dx) as usize;
                if d + step < dist[j] {
                    dist[j] = d + step;
                    heap.push(Reverse((d + step, j)));
                }
            }
        }
    }
    None
}

/// First free cell scanning row-major from `from`, then from the start.
pub fn free_cell(grid: &OccupancyGrid, from: usize) -> (usize, usize) {
    let g = grid.geometry();
    let n = g.len();
    let i = (0..n)
        .map(|k| (from + k) % n)
        .find(|&i| grid.cells()[i] == CellState::Free)
        .expect("grid has a free cell");
    (i % g.width, i / g.width)
}

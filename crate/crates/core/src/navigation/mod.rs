//! Occupancy grids, the imaginary potential painted along a predicted
//! trajectory, and path planning on their combination.

mod clearance;
mod cost;
mod grid;
pub mod pgm;
mod planner;
mod potential;

pub use clearance::{min_separation, path_clearance, TimedTrack};
pub use cost::{combine_costs, CostGrid};
pub use grid::{Cell, CellState, GridGeometry, OccupancyGrid};
pub use planner::{plan_path, Path, COST_SCALE};
pub use potential::{stamp_imaginary_potential, PotentialConfig, PotentialField, PredictedPosition};

//! Value-gated event prediction and avoidance navigation.
//!
//! The pipeline mirrors a small brain-inspired control loop:
//!
//! - [`valuation`] judges the value of detected labels and gates them,
//! - [`encoding`] turns a gated detection into a cue/time/place event vector,
//! - [`reservoir`] learns the event time series with an echo state network
//!   and rolls it forward without sensory input,
//! - [`navigation`] paints the predicted trajectory as an imaginary potential
//!   on an occupancy grid and plans around it,
//! - [`sim`] replays a person-crossing scenario end to end with a simulated
//!   detector.

pub mod encoding;
pub mod error;
pub mod geometry;
pub mod navigation;
pub mod reservoir;
pub mod sim;
pub mod valuation;

pub use error::{Error, Result};
pub use geometry::Point;

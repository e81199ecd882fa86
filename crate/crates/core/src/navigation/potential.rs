use serde::{Deserialize, Serialize};

use super::grid::GridGeometry;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// A predicted position `steps_ahead` steps into the future.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictedPosition {
    pub position: Point,
    pub steps_ahead: u32,
}

/// Parameters of the imaginary potential and of its weight in planning.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialConfig {
    pub amplitude: f64,
    pub sigma_m: f64,
    pub decay: f64,
    pub cap: f64,
    pub weight: f64,
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig {
            amplitude: 1.0,
            sigma_m: 0.5,
            decay: 0.95,
            cap: 5.0,
            weight: 10.0,
        }
    }
}

impl PotentialConfig {
    pub fn validate(&self) -> Result<()> {
        let ok = self.amplitude > 0.0
            && self.sigma_m > 0.0
            && self.decay > 0.0
            && self.decay <= 1.0
            && self.cap > 0.0
            && self.weight >= 0.0
            && [self.amplitude, self.sigma_m, self.cap, self.weight]
                .iter()
                .all(|v| v.is_finite());
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidConfig(format!("invalid potential parameters {self:?}")))
        }
    }
}

/// Non-negative potential per cell, capped at `cap`.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialField {
    geometry: GridGeometry,
    cap: f64,
    values: Vec<f64>,
}

impl PotentialField {
    pub fn zeros(geometry: GridGeometry, cap: f64) -> Self {
        PotentialField {
            geometry,
            cap,
            values: vec![0.0; geometry.len()],
        }
    }

    pub fn from_values(geometry: GridGeometry, cap: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() != geometry.len() {
            return Err(Error::LengthMismatch {
                what: "potential values",
                expected: geometry.len(),
                actual: values.len(),
            });
        }
        if values.iter().any(|v| !(0.0..=cap).contains(v)) {
            return Err(Error::InvalidConfig(format!("potential values must lie in [0, {cap}]")));
        }
        Ok(PotentialField {
            geometry,
            cap,
            values,
        })
    }

    pub fn geometry(&self) -> &GridGeometry {
        &self.geometry
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, cell: super::Cell) -> f64 {
        self.values[self.geometry.index(cell)]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }
}

/// Adds `A * decay^k * exp(-d^2 / (2 sigma^2))` for every prediction to each
/// cell whose center is within 3 sigma, then caps the field.
///
/// Predictions with non-finite coordinates are skipped. Predictions outside
/// the grid still reach the cells within range.
pub fn stamp_imaginary_potential(
    field: &mut PotentialField,
    predictions: &[PredictedPosition],
    amplitude: f64,
    sigma: f64,
    decay: f64,
) {
    let g = field.geometry;
    let reach = 3.0 * sigma;
    let cell_range = |lo: f64, hi: f64, origin: f64, n: usize| {
        let a = ((lo - origin) / g.resolution - 0.5).ceil().max(0.0);
        let b = ((hi - origin) / g.resolution - 0.5).floor();
        if b < 0.0 || a > b {
            return 0..0;
        }
        (a as usize)..((b as usize + 1).min(n))
    };

    for pred in predictions {
        let p = pred.position;
        if !p.is_finite() {
            continue;
        }
        let gain = amplitude * decay.powi(pred.steps_ahead as i32);
        for y in cell_range(p.y - reach, p.y + reach, g.origin.y, g.height) {
            for x in cell_range(p.x - reach, p.x + reach, g.origin.x, g.width) {
                let d2 = g.cell_center((x, y)).distance_sq(&p);
                if d2 <= reach * reach {
                    field.values[g.index((x, y))] += gain * (-d2 / (2.0 * sigma * sigma)).exp();
                }
            }
        }
    }
    let cap = field.cap;
    field.values.iter_mut().for_each(|v| *v = v.min(cap));
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn geometry() -> GridGeometry {
        GridGeometry::new(32, 32, 0.25, Point::new(0.0, 0.0)).unwrap()
    }

    #[test]
    fn peak_and_width() {
        let g = geometry();
        let center = g.cell_center((10, 10));
        let mut f = PotentialField::zeros(g, 5.0);
        let pred = PredictedPosition {
            position: center,
            steps_ahead: 0,
        };
        stamp_imaginary_potential(&mut f, &[pred], 1.0, 0.5, 0.95);
        assert_eq!(f.get((10, 10)), 1.0);
        // Two cells away at 0.25 m/cell is exactly sigma.
        assert!((f.get((12, 10)) - (-0.5f64).exp()).abs() < 1e-15);
        // Beyond 3 sigma nothing is added.
        assert_eq!(f.get((17, 10)), 0.0);
    }

    #[test]
    fn cap_applies() {
        let g = geometry();
        let pred = PredictedPosition {
            position: g.cell_center((5, 5)),
            steps_ahead: 0,
        };
        let mut f = PotentialField::zeros(g, 1.5);
        stamp_imaginary_potential(&mut f, &[pred, pred], 1.0, 0.5, 0.95);
        assert_eq!(f.get((5, 5)), 1.5);
    }

    #[test]
    fn decay_with_horizon() {
        let g = geometry();
        let pred = PredictedPosition {
            position: g.cell_center((5, 5)),
            steps_ahead: 3,
        };
        let mut f = PotentialField::zeros(g, 5.0);
        stamp_imaginary_potential(&mut f, &[pred], 2.0, 0.5, 0.5);
        assert_eq!(f.get((5, 5)), 0.25);
    }

    #[test]
    fn outside_predictions_reach_border_cells() {
        let g = geometry();
        let pred = PredictedPosition {
            position: Point::new(-0.25, 1.125),
            steps_ahead: 0,
        };
        let mut f = PotentialField::zeros(g, 5.0);
        stamp_imaginary_potential(&mut f, &[pred], 1.0, 0.5, 0.95);
        let d2: f64 = 0.375 * 0.375;
        assert!((f.get((0, 4)) - (-d2 / 0.5).exp()).abs() < 1e-15);
        assert!(f.values().iter().all(|v| *v >= 0.0));
    }

    proptest! {
        #[test]
        fn adding_predictions_never_lowers_potential(
            first in proptest::collection::vec((0.0f64..8.0, 0.0f64..8.0, 0u32..40), 0..10),
            extra in proptest::collection::vec((-1.0f64..9.0, -1.0f64..9.0, 0u32..40), 1..10),
        ) {
            let to_preds = |v: &[(f64, f64, u32)]| -> Vec<PredictedPosition> {
                v.iter().map(|&(x, y, k)| PredictedPosition { position: Point::new(x, y), steps_ahead: k }).collect()
            };
            let g = geometry();
            let mut a = PotentialField::zeros(g, 5.0);
            stamp_imaginary_potential(&mut a, &to_preds(&first), 1.0, 0.5, 0.95);
            let mut b = a.clone();
            stamp_imaginary_potential(&mut b, &to_preds(&extra), 1.0, 0.5, 0.95);
            for (before, after) in a.values().iter().zip(b.values()) {
                prop_assert!(after >= before);
                prop_assert!(*after <= 5.0);
            }
        }
    }
}

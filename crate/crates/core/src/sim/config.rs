use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::encoding::EncoderConfig;
use crate::error::{Error, Result};
use crate::geometry::{Bounds, Point};
use crate::navigation::PotentialConfig;
use crate::reservoir::EsnConfig;
use crate::valuation::AmygdalaConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PersonConfig {
    pub label: String,
    pub waypoints: Vec<Point>,
    pub speed_mps: f64,
}

/// A static object the detector also reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Distractor {
    pub label: String,
    pub position: Point,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectorConfig {
    pub noise_sigma_m: f64,
    pub period_s: f64,
    #[serde(default)]
    pub dropout: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservationConfig {
    /// Length of each observed crossing, including any time spent standing
    /// at the final waypoint.
    pub duration_s: f64,
    /// How many crossings the robot watches before the live one.
    pub crossings: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RobotConfig {
    pub start: Point,
    pub goal: Point,
    pub speed_mps: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionConfig {
    /// Samples of the live crossing seen before the robot predicts and moves.
    pub primer_steps: usize,
    /// Autonomous prediction steps; defaults to the rest of a crossing.
    #[serde(default)]
    pub horizon_steps: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub resolution_m: f64,
    /// Optional PGM map; without one the arena is an empty free grid.
    #[serde(default)]
    pub map: Option<PathBuf>,
}

/// Declarative person-crossing experiment.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub arena: Bounds,
    /// Sample period of the event series fed to the network.
    pub dt_s: f64,
    pub person: PersonConfig,
    #[serde(default)]
    pub distractors: Vec<Distractor>,
    pub detector: DetectorConfig,
    pub observation: ObservationConfig,
    pub robot: RobotConfig,
    pub prediction: PredictionConfig,
    pub encoder: EncoderConfig,
    pub amygdala: AmygdalaConfig,
    pub esn: EsnConfig,
    pub potential: PotentialConfig,
    pub grid: GridConfig,
}

impl ScenarioConfig {
    /// A person crosses `x` from 1 m to 7 m along `y = 4` at 0.8 m/s while
    /// the robot at (4, 1) wants to reach (4, 7): the direct route cuts
    /// straight through the person's corridor.
    pub fn canonical() -> Self {
        let duration = 10.0;
        ScenarioConfig {
            seed: 1,
            arena: Bounds::new(0.0, 8.0, 0.0, 8.0),
            dt_s: 0.2,
            person: PersonConfig {
                label: "person".into(),
                waypoints: vec![Point::new(1.0, 4.0), Point::new(7.0, 4.0)],
                speed_mps: 0.8,
            },
            distractors: vec![
                Distractor {
                    label: "chair".into(),
                    position: Point::new(2.0, 6.5),
                },
                Distractor {
                    label: "table".into(),
                    position: Point::new(6.5, 1.5),
                },
            ],
            detector: DetectorConfig {
                noise_sigma_m: 0.05,
                period_s: 0.2,
                dropout: 0.0,
            },
            observation: ObservationConfig {
                duration_s: duration,
                crossings: 3,
            },
            robot: RobotConfig {
                start: Point::new(4.0, 1.0),
                goal: Point::new(4.0, 7.0),
                speed_mps: 1.8,
            },
            prediction: PredictionConfig {
                primer_steps: 11,
                horizon_steps: None,
            },
            encoder: EncoderConfig::with_defaults(
                vec!["person".into(), "chair".into(), "table".into()],
                duration,
            ),
            amygdala: AmygdalaConfig::default(),
            // With only a few crossings of training data the module default
            // ridge overfits and the free run drifts off the corridor.
            esn: EsnConfig {
                ridge: 1e-2,
                ..EsnConfig::default()
            },
            potential: PotentialConfig::default(),
            grid: GridConfig {
                resolution_m: 0.25,
                map: None,
            },
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let config: ScenarioConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Loads and validates a config file. A relative `grid.map` is resolved
    /// against the config file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = ScenarioConfig::from_json(&text)?;
        if let (Some(map), Some(dir)) = (&config.grid.map, path.parent()) {
            if map.is_relative() {
                config.grid.map = Some(dir.join(map));
            }
        }
        Ok(config)
    }

    /// Number of event samples per crossing.
    pub fn samples_per_crossing(&self) -> usize {
        (self.observation.duration_s / self.dt_s + 1e-9).floor() as usize
    }

    pub fn horizon_steps(&self) -> usize {
        self.prediction.horizon_steps.unwrap_or_else(|| {
            self.samples_per_crossing()
                .saturating_sub(self.prediction.primer_steps)
        })
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !self.arena.is_valid() {
            return bad(format!("invalid arena {:?}", self.arena));
        }
        if !(self.dt_s > 0.0 && self.dt_s.is_finite()) {
            return bad(format!("dt_s must be positive, got {}", self.dt_s));
        }
        if self.person.waypoints.is_empty() {
            return bad("person needs at least one waypoint".into());
        }
        if let Some(p) = self.person.waypoints.iter().find(|p| !self.arena.contains(p)) {
            return bad(format!("waypoint {p:?} outside the arena"));
        }
        if !(self.person.speed_mps > 0.0 && self.person.speed_mps.is_finite()) {
            return bad(format!("person speed must be positive, got {}", self.person.speed_mps));
        }
        if !(self.robot.speed_mps > 0.0 && self.robot.speed_mps.is_finite()) {
            return bad(format!("robot speed must be positive, got {}", self.robot.speed_mps));
        }
        for (name, p) in [("start", self.robot.start), ("goal", self.robot.goal)] {
            if !self.arena.contains(&p) {
                return bad(format!("robot {name} {p:?} outside the arena"));
            }
        }
        let d = &self.detector;
        if !(d.period_s > 0.0 && d.period_s.is_finite()) {
            return bad(format!("detector period must be positive, got {}", d.period_s));
        }
        if !(d.noise_sigma_m >= 0.0 && d.noise_sigma_m.is_finite()) {
            return bad(format!("detector noise must be >= 0, got {}", d.noise_sigma_m));
        }
        if !(0.0..1.0).contains(&d.dropout) {
            return bad(format!("detector dropout must lie in [0, 1), got {}", d.dropout));
        }
        if !(self.observation.duration_s > 0.0) || self.observation.crossings == 0 {
            return bad("observation needs a positive duration and at least one crossing".into());
        }
        let labels = &self.encoder.labels;
        for label in std::iter::once(&self.person.label).chain(self.distractors.iter().map(|d| &d.label)) {
            if !labels.contains(label) {
                return bad(format!("label '{label}' is not in the encoder label set"));
            }
        }
        if let Some(p) = self.distractors.iter().map(|d| d.position).find(|p| !self.arena.contains(p)) {
            return bad(format!("distractor {p:?} outside the arena"));
        }
        self.esn.validate()?;
        if self.prediction.primer_steps < self.esn.washout.max(1) {
            return bad(format!(
                "primer of {} steps is shorter than the washout of {}",
                self.prediction.primer_steps, self.esn.washout
            ));
        }
        if self.prediction.primer_steps > self.samples_per_crossing() {
            return bad(format!(
                "primer of {} steps exceeds the {} samples of a crossing",
                self.prediction.primer_steps,
                self.samples_per_crossing()
            ));
        }
        self.potential.validate()?;
        if !(self.grid.resolution_m > 0.0 && self.grid.resolution_m.is_finite()) {
            return bad(format!("grid resolution must be positive, got {}", self.grid.resolution_m));
        }
        Ok(())
    }
}

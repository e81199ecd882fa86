//! Deterministic replay of the person-crossing experiment.

mod config;
mod episode;
pub mod export;
mod forecast;
mod world;

pub use config::{
    DetectorConfig, Distractor, GridConfig, ObservationConfig, PersonConfig, PredictionConfig, RobotConfig,
    ScenarioConfig,
};
pub use episode::{
    bin_detections, encode_samples, run_episode, ClearanceLog, DetectionRecord, Episode, EpisodeLog, EventSample,
    GateRecord, GatedDetection, PlanLog, PotentialLog, PotentialMode, PredictedStep, PredictionLog,
    FIDELITY_STEPS,
};
pub use forecast::{forecast, read_detections_csv, DetectionRow, Forecast, ForecastLog, ForecastStep};
pub use world::{crossing_duration, person_position, sense, sense_all, tick_rng, true_track, Detection};

//! Run-directory artifacts for a pair of episodes.

use std::fs;
use std::path::Path as FsPath;

use serde::{Deserialize, Serialize};

use super::episode::{Episode, EpisodeLog, PredictedStep};
use super::world;
use crate::error::{Error, Result};
use crate::navigation::{pgm, Path, TimedTrack};
use crate::reservoir::save_readout;

/// Both runs of one scenario, as stored in `episode.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodePair {
    pub potential_on: EpisodeLog,
    pub potential_off: EpisodeLog,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct TrackRow {
    pub t: f64,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct PredictionRow {
    pub step: usize,
    pub t: f64,
    pub x: Option<f64>,
    pub y: Option<f64>,
}

fn write_rows<T: Serialize>(path: &FsPath, rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Robot poses with arrival times at constant speed.
pub fn write_path_csv(path: &Path, speed: f64, out: &FsPath) -> Result<()> {
    let track = TimedTrack::from_poses(&path.poses, speed)?;
    write_rows(
        out,
        track.samples().iter().map(|(t, p)| TrackRow { t: *t, x: p.x, y: p.y }),
    )
}

pub fn write_prediction_rows(rows: &[PredictionRow], out: &FsPath) -> Result<()> {
    write_rows(out, rows)
}

pub fn write_prediction_csv(steps: &[PredictedStep], out: &FsPath) -> Result<()> {
    write_rows(
        out,
        steps.iter().map(|s| PredictionRow {
            step: s.step,
            t: s.t,
            x: s.position.map(|p| p.x),
            y: s.position.map(|p| p.y),
        }),
    )
}

pub fn read_prediction_csv(path: &FsPath) -> Result<Vec<PredictionRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Writes `episode.json`, the true and predicted trajectories, the
/// potential of the ON run, both planned paths, the map and the readout.
pub fn write_run_dir(dir: &FsPath, on: &Episode, off: &Episode) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let pair = EpisodePair {
        potential_on: on.log.clone(),
        potential_off: off.log.clone(),
    };
    let json = serde_json::to_string_pretty(&pair)? + "\n";
    let episode = dir.join("episode.json");
    fs::write(&episode, json).map_err(|e| Error::io(&episode, e))?;

    let config = &on.log.config;
    let prediction = &on.log.prediction;
    let samples = prediction.primer_steps + prediction.horizon_steps;
    write_rows(
        &dir.join("trajectory_true.csv"),
        (0..samples).map(|i| {
            let t = i as f64 * config.dt_s;
            let p = world::person_position(config, t);
            TrackRow { t, x: p.x, y: p.y }
        }),
    )?;
    write_prediction_csv(&prediction.steps, &dir.join("trajectory_pred.csv"))?;

    pgm::write_potential(&on.field, &dir.join("potential.pgm"))?;
    pgm::write_occupancy(&on.grid, &dir.join("map.pgm"))?;
    write_path_csv(&on.log.plan.path, config.robot.speed_mps, &dir.join("path_on.csv"))?;
    write_path_csv(&off.log.plan.path, config.robot.speed_mps, &dir.join("path_off.csv"))?;
    save_readout(&dir.join("readout.csv"), &on.readout, &on.readout_meta)
}

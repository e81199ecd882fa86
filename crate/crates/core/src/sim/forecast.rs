//! Training and free-running on recorded detections instead of the
//! simulated world.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::episode::{bin_detections, encode_samples, EventSample, GatedDetection};
use crate::encoding::{EventVector, HippocampusEncoder};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::reservoir::{fit_sequences, Drive, EpisodeDataset, ReadoutMeta, ReadoutWeights, Reservoir, TrainingSummary};
use crate::valuation::{Amygdala, GateDecision};

/// One line of a detections CSV. `crossing` groups detections into
/// sequences; times are relative to the start of their crossing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionRow {
    #[serde(default)]
    pub crossing: usize,
    pub t: f64,
    pub label: String,
    pub x: f64,
    pub y: f64,
}

pub fn read_detections_csv(path: &Path) -> Result<Vec<DetectionRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForecastStep {
    pub step: usize,
    pub t: f64,
    pub label: Option<String>,
    pub position: Option<Point>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForecastLog {
    pub gate_decisions: Vec<GateDecision>,
    pub gated: usize,
    pub events: Vec<EventSample>,
    pub training: TrainingSummary,
    /// Crossing whose opening samples primed the free run.
    pub primed_crossing: usize,
    pub primer_steps: usize,
    pub steps: Vec<ForecastStep>,
}

#[derive(Clone, Debug)]
pub struct Forecast {
    pub log: ForecastLog,
    pub readout: ReadoutWeights,
    pub readout_meta: ReadoutMeta,
}

/// Gates and encodes `rows`, trains on every crossing, primes on the first
/// `primer_steps` samples of the last crossing and free-runs `horizon` steps.
pub fn forecast(config: &ScenarioConfig, rows: &[DetectionRow], primer_steps: usize, horizon: usize) -> Result<Forecast> {
    config.validate()?;
    let washout = config.esn.washout;
    let n_bins = config.samples_per_crossing();
    if primer_steps < washout.max(1) || primer_steps > n_bins {
        return Err(Error::InvalidConfig(format!(
            "primer must cover the washout ({washout}) and fit in a crossing ({n_bins} samples), got {primer_steps}"
        )));
    }
    let encoder = HippocampusEncoder::from_config(&config.encoder, config.arena)?;
    let amygdala = Amygdala::from_config(&config.amygdala)?;

    let mut gate_decisions = Vec::with_capacity(rows.len());
    let mut by_crossing: BTreeMap<usize, Vec<GatedDetection>> = BTreeMap::new();
    for (index, row) in rows.iter().enumerate() {
        if !(row.t >= 0.0) {
            return Err(Error::NegativeTime(row.t));
        }
        let label = encoder
            .label_index(&row.label)
            .ok_or_else(|| Error::UnknownLabel(row.label.clone()))?;
        let position = Point::new(row.x, row.y);
        if !config.arena.contains(&position) {
            return Err(Error::OutOfArena { x: row.x, y: row.y });
        }
        let decision = amygdala.judge(label, &row.label)?;
        if decision.passed {
            by_crossing.entry(row.crossing).or_default().push(GatedDetection {
                index,
                label,
                position,
                timestamp: row.t,
            });
        }
        gate_decisions.push(decision);
    }
    let gated: usize = by_crossing.values().map(Vec::len).sum();
    if gated < washout + 2 {
        return Err(Error::InsufficientEvents {
            got: gated,
            needed: washout + 2,
        });
    }

    let dt = config.dt_s;
    let mut events = Vec::new();
    let mut sequences = Vec::new();
    for (&crossing, detections) in &by_crossing {
        let samples = bin_detections(detections, dt, n_bins, crossing);
        if samples.len() > washout {
            sequences.push(EpisodeDataset::new(encode_samples(&encoder, &samples)?, dt, washout)?);
        }
        events.extend(samples);
    }
    let (&primed_crossing, last) = by_crossing.iter().next_back().expect("at least one gated crossing");
    let primer_samples = bin_detections(last, dt, primer_steps, primed_crossing);
    if primer_samples.is_empty() {
        return Err(Error::InsufficientEvents { got: 0, needed: 1 });
    }

    let seed = config.esn.seed.unwrap_or(config.seed);
    let layout = encoder.layout();
    let reservoir = Reservoir::init(&config.esn, layout.len(), seed)?;
    let (readout, training) = fit_sequences(&reservoir, &sequences, config.esn.ridge)?;
    let primer = EpisodeDataset::new(encode_samples(&encoder, &primer_samples)?, dt, washout)?;
    let raw = reservoir.free_run(&readout, &primer, std::iter::empty::<Vec<f64>>(), horizon, Drive::Autonomous)?;

    let mut steps = Vec::with_capacity(raw.len());
    for (step, y) in raw.iter().enumerate() {
        let decoded = encoder.decode(&EventVector::from_prediction(layout, y.as_slice())?)?;
        steps.push(ForecastStep {
            step,
            t: (primer_steps + step) as f64 * dt,
            label: decoded.map(|d| encoder.labels()[d.label].clone()),
            position: decoded.map(|d| d.position),
        });
    }
    let readout_meta = ReadoutMeta {
        rows: readout.output_dim(),
        cols: readout.input_dim(),
        seed,
        input_dim: layout.len(),
        esn: config.esn.clone(),
    };
    Ok(Forecast {
        log: ForecastLog {
            gate_decisions,
            gated,
            events,
            training,
            primed_crossing,
            primer_steps,
            steps,
        },
        readout,
        readout_meta,
    })
}

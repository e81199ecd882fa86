use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use super::world::{self, Detection};
use crate::encoding::{EventVector, HippocampusEncoder};
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::navigation::{
    combine_costs, path_clearance, pgm, plan_path, stamp_imaginary_potential, CellState, GridGeometry,
    OccupancyGrid, Path, PotentialField, PredictedPosition,
};
use crate::reservoir::{
    fit_sequences, Drive, EpisodeDataset, ReadoutMeta, ReadoutWeights, Reservoir, TrainingSummary,
};
use crate::valuation::{Amygdala, GateDecision};

/// Steps over which prediction fidelity is scored.
pub const FIDELITY_STEPS: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PotentialMode {
    PotentialOn,
    PotentialOff,
}

impl PotentialMode {
    pub fn is_on(self) -> bool {
        self == PotentialMode::PotentialOn
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub crossing: usize,
    pub tick: u64,
    #[serde(flatten)]
    pub detection: Detection,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GateRecord {
    /// Index into the detection list.
    pub detection: usize,
    #[serde(flatten)]
    pub decision: GateDecision,
}

/// One sample of the event series handed to the network. `source` is the
/// detection it was encoded from, or `None` when the previous sample was
/// held over a bin without a gated detection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EventSample {
    pub crossing: usize,
    pub bin: usize,
    pub t: f64,
    pub label: usize,
    pub position: Point,
    pub source: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictedStep {
    pub step: usize,
    /// Crossing time the prediction refers to.
    pub t: f64,
    pub label: Option<String>,
    pub position: Option<Point>,
    pub truth: Point,
    pub error_m: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionLog {
    pub primer_steps: usize,
    pub horizon_steps: usize,
    pub depart_time_s: f64,
    pub steps: Vec<PredictedStep>,
    /// Mean decoded error over the first steps; `None` if any of them
    /// could not be decoded.
    pub mean_error_m: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialLog {
    pub applied: bool,
    pub stamped: usize,
    pub max: f64,
    pub sum: f64,
    pub file: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanLog {
    pub start_cell: (usize, usize),
    pub goal_cell: (usize, usize),
    pub length_m: f64,
    pub path: Path,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClearanceLog {
    pub clearance_m: f64,
    pub robot_speed_mps: f64,
    pub travel_time_s: f64,
}

/// Complete audit trail of one episode, fully determined by the config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeLog {
    pub mode: PotentialMode,
    pub config: ScenarioConfig,
    pub detections: Vec<DetectionRecord>,
    pub gate_decisions: Vec<GateRecord>,
    /// Detection indices that passed the gate, in arrival order.
    pub gated_events: Vec<usize>,
    pub events: Vec<EventSample>,
    pub training: TrainingSummary,
    pub prediction: PredictionLog,
    pub potential: PotentialLog,
    pub plan: PlanLog,
    pub clearance: ClearanceLog,
}

impl EpisodeLog {
    /// True if every gated or encoded detection carries a passing decision.
    pub fn gating_is_sound(&self) -> bool {
        let passed = |i: usize| {
            self.gate_decisions
                .iter()
                .any(|g| g.detection == i && g.decision.passed)
        };
        self.gated_events.iter().all(|&i| passed(i))
            && self.events.iter().filter_map(|e| e.source).all(passed)
    }
}

/// Log plus the artifacts needed to write a run directory.
#[derive(Clone, Debug)]
pub struct Episode {
    pub log: EpisodeLog,
    pub grid: OccupancyGrid,
    pub field: PotentialField,
    pub readout: ReadoutWeights,
    pub readout_meta: ReadoutMeta,
}

/// A gated detection waiting to be binned.
#[derive(Clone, Debug)]
pub struct GatedDetection {
    pub index: usize,
    pub label: usize,
    pub position: Point,
    pub timestamp: f64,
}

/// Resamples gated detections onto `n_bins` bins of width `dt`.
///
/// The last detection in a bin wins. Bins without one repeat the previous
/// sample; leading empty bins take the first detection. Returns an empty
/// series when there are no detections at all.
pub fn bin_detections(gated: &[GatedDetection], dt: f64, n_bins: usize, crossing: usize) -> Vec<EventSample> {
    let mut slots: Vec<Option<&GatedDetection>> = vec![None; n_bins];
    for g in gated {
        let bin = (g.timestamp / dt + 1e-9).floor() as usize;
        if bin < n_bins {
            slots[bin] = Some(g);
        }
    }
    let Some(first) = slots.iter().flatten().next().copied() else {
        return Vec::new();
    };
    let mut held = first;
    slots
        .iter()
        .enumerate()
        .map(|(bin, slot)| {
            let source = slot.map(|g| {
                held = g;
                g.index
            });
            EventSample {
                crossing,
                bin,
                t: bin as f64 * dt,
                label: held.label,
                position: held.position,
                source,
            }
        })
        .collect()
}

pub fn encode_samples(encoder: &HippocampusEncoder, samples: &[EventSample]) -> Result<Vec<Vec<f64>>> {
    samples
        .iter()
        .map(|s| Ok(encoder.encode(s.label, s.t, s.position)?.into_values()))
        .collect()
}

fn load_grid(config: &ScenarioConfig) -> Result<OccupancyGrid> {
    match &config.grid.map {
        Some(path) => pgm::read_occupancy(path),
        None => Ok(OccupancyGrid::filled(
            GridGeometry::covering(&config.arena, config.grid.resolution_m)?,
            CellState::Free,
        )),
    }
}

struct Observer<'a> {
    config: &'a ScenarioConfig,
    encoder: &'a HippocampusEncoder,
    amygdala: Amygdala,
    detections: Vec<DetectionRecord>,
    gate_decisions: Vec<GateRecord>,
    gated_events: Vec<usize>,
}

impl Observer<'_> {
    /// Senses, judges and gates every tick of a crossing before `until`.
    fn watch(&mut self, crossing: usize, until: f64) -> Result<Vec<GatedDetection>> {
        let period = self.config.detector.period_s;
        let ticks = (until / period - 1e-9).ceil().max(0.0) as u64;
        let mut gated = Vec::new();
        for tick in 0..ticks {
            for detection in world::sense_all(self.config, crossing as u64, tick)? {
                let label = self
                    .encoder
                    .label_index(&detection.label)
                    .ok_or_else(|| Error::UnknownLabel(detection.label.clone()))?;
                let index = self.detections.len();
                let decision = self.amygdala.judge(label, &detection.label)?;
                if decision.passed {
                    self.gated_events.push(index);
                    gated.push(GatedDetection {
                        index,
                        label,
                        position: detection.position,
                        timestamp: detection.timestamp,
                    });
                }
                self.gate_decisions.push(GateRecord {
                    detection: index,
                    decision,
                });
                self.detections.push(DetectionRecord {
                    crossing,
                    tick,
                    detection,
                });
            }
        }
        Ok(gated)
    }
}

/// Mean decoded error over the first [`FIDELITY_STEPS`] steps.
fn leading_error(steps: &[PredictedStep]) -> Option<f64> {
    let head = &steps[..steps.len().min(FIDELITY_STEPS)];
    if head.is_empty() {
        return None;
    }
    let errors: Option<Vec<f64>> = head.iter().map(|s| s.error_m).collect();
    errors.map(|e| e.iter().sum::<f64>() / e.len() as f64)
}

/// Runs observe, gate, encode, train, predict, stamp and plan in order.
pub fn run_episode(config: &ScenarioConfig, mode: PotentialMode) -> Result<Episode> {
    config.validate()?;
    let encoder = HippocampusEncoder::from_config(&config.encoder, config.arena)?;
    let layout = encoder.layout();
    let dt = config.dt_s;
    let n_bins = config.samples_per_crossing();
    let washout = config.esn.washout;

    let mut observer = Observer {
        config,
        encoder: &encoder,
        amygdala: Amygdala::from_config(&config.amygdala)?,
        detections: Vec::new(),
        gate_decisions: Vec::new(),
        gated_events: Vec::new(),
    };

    // Observation: the robot stands still and watches whole crossings.
    let mut events = Vec::new();
    let mut sequences = Vec::new();
    for crossing in 0..config.observation.crossings {
        let gated = observer.watch(crossing, config.observation.duration_s)?;
        let samples = bin_detections(&gated, dt, n_bins, crossing);
        if samples.is_empty() {
            continue;
        }
        sequences.push(EpisodeDataset::new(encode_samples(&encoder, &samples)?, dt, washout)?);
        events.extend(samples);
    }
    let needed = washout + 2;
    if observer.gated_events.len() < needed {
        return Err(Error::InsufficientEvents {
            got: observer.gated_events.len(),
            needed,
        });
    }

    let seed = config.esn.seed.unwrap_or(config.seed);
    let reservoir = Reservoir::init(&config.esn, layout.len(), seed)?;
    let (readout, training) = fit_sequences(&reservoir, &sequences, config.esn.ridge)?;

    // Live crossing: watch the first few samples, then predict the rest.
    let live = config.observation.crossings;
    let primer_steps = config.prediction.primer_steps;
    let depart = primer_steps as f64 * dt;
    let gated = observer.watch(live, depart)?;
    let primer_samples = bin_detections(&gated, dt, primer_steps, live);
    if primer_samples.is_empty() {
        return Err(Error::InsufficientEvents { got: 0, needed: 1 });
    }
    let primer = EpisodeDataset::new(encode_samples(&encoder, &primer_samples)?, dt, washout)?;
    events.extend(primer_samples);

    let horizon = config.horizon_steps();
    let raw = reservoir.free_run(
        &readout,
        &primer,
        std::iter::empty::<Vec<f64>>(),
        horizon,
        Drive::Autonomous,
    )?;
    let mut steps = Vec::with_capacity(horizon);
    for (step, y) in raw.iter().enumerate() {
        let t = (primer_steps + step) as f64 * dt;
        let event = EventVector::from_prediction(layout, y.as_slice())?;
        let decoded = encoder.decode(&event)?;
        let truth = world::person_position(config, t);
        steps.push(PredictedStep {
            step,
            t,
            label: decoded.map(|d| encoder.labels()[d.label].clone()),
            position: decoded.map(|d| d.position),
            truth,
            error_m: decoded.map(|d| d.position.distance(&truth)),
        });
    }
    let prediction = PredictionLog {
        primer_steps,
        horizon_steps: horizon,
        depart_time_s: depart,
        mean_error_m: leading_error(&steps),
        steps,
    };

    let grid = load_grid(config)?;
    let geometry = *grid.geometry();
    let mut field = PotentialField::zeros(geometry, config.potential.cap);
    let predicted: Vec<PredictedPosition> = prediction
        .steps
        .iter()
        .filter_map(|s| {
            s.position.map(|position| PredictedPosition {
                position,
                steps_ahead: s.step as u32,
            })
        })
        .collect();
    if mode.is_on() {
        let p = &config.potential;
        stamp_imaginary_potential(&mut field, &predicted, p.amplitude, p.sigma_m, p.decay);
    }
    let potential = PotentialLog {
        applied: mode.is_on(),
        stamped: if mode.is_on() { predicted.len() } else { 0 },
        max: field.max(),
        sum: field.sum(),
        file: "potential.pgm".into(),
    };

    let cost = combine_costs(&grid, &field, config.potential.weight)?;
    let cell_of = |p: Point| {
        geometry
            .world_to_cell(p)
            .ok_or(Error::OutOfArena { x: p.x, y: p.y })
    };
    let start_cell = cell_of(config.robot.start)?;
    let goal_cell = cell_of(config.robot.goal)?;
    let path = plan_path(&cost, start_cell, goal_cell)?.ok_or(Error::Unreachable)?;

    let person = world::true_track(config, depart);
    let clearance = ClearanceLog {
        clearance_m: path_clearance(&path, &person, config.robot.speed_mps)?,
        robot_speed_mps: config.robot.speed_mps,
        travel_time_s: path.length_m() / config.robot.speed_mps,
    };
    let plan = PlanLog {
        start_cell,
        goal_cell,
        length_m: path.length_m(),
        path,
    };

    let readout_meta = ReadoutMeta {
        rows: readout.output_dim(),
        cols: readout.input_dim(),
        seed,
        input_dim: layout.len(),
        esn: config.esn.clone(),
    };
    let Observer {
        detections,
        gate_decisions,
        gated_events,
        ..
    } = observer;
    let log = EpisodeLog {
        mode,
        config: config.clone(),
        detections,
        gate_decisions,
        gated_events,
        events,
        training,
        prediction,
        potential,
        plan,
        clearance,
    };
    Ok(Episode {
        log,
        grid,
        field,
        readout,
        readout_meta,
    })
}

//! Hippocampal event coding.
//!
//! A gated detection is described by *what* (cue cells, one per known
//! label), *when* (time cells with Gaussian tuning over the observation
//! window) and *where* (place cells on a regular lattice over the arena).
//! The three populations are concatenated into an [`EventVector`] in the
//! fixed order `[cue | time | place]`.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Bounds, Point};

/// One-hot activation of the cue cells.
#[derive(Clone, Debug, PartialEq)]
pub struct CueCode(Vec<f64>);

impl CueCode {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

pub fn encode_cue(label_index: usize, count: usize) -> Result<CueCode> {
    if label_index >= count {
        return Err(Error::LabelOutOfRange {
            index: label_index,
            count,
        });
    }
    let mut v = vec![0.0; count];
    v[label_index] = 1.0;
    Ok(CueCode(v))
}

#[inline]
fn gaussian(d2: f64, sigma: f64) -> f64 {
    (-d2 / (2.0 * sigma * sigma)).exp()
}

/// Time cells with Gaussian tuning around strictly increasing centers.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeCellBank {
    centers: Vec<f64>,
    sigma: f64,
}

impl TimeCellBank {
    pub fn new(centers: Vec<f64>, sigma: f64) -> Result<Self> {
        if centers.len() < 2 {
            return Err(Error::InvalidConfig(format!(
                "need at least 2 time cells, got {}",
                centers.len()
            )));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "time cell width must be positive, got {sigma}"
            )));
        }
        if centers.iter().any(|c| !c.is_finite()) || centers.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig(
                "time cell centers must be finite and strictly increasing".into(),
            ));
        }
        Ok(TimeCellBank { centers, sigma })
    }

    /// `count` cells spread evenly over `[0, span]`. Without an explicit
    /// width, sigma is half the center spacing.
    pub fn uniform(count: usize, span: f64, sigma: Option<f64>) -> Result<Self> {
        if count < 2 || !(span > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "time cells need count >= 2 and span > 0 (count {count}, span {span})"
            )));
        }
        let spacing = span / (count - 1) as f64;
        let centers = (0..count).map(|k| k as f64 * spacing).collect();
        TimeCellBank::new(centers, sigma.unwrap_or(spacing / 2.0))
    }

    pub fn len(&self) -> usize {
        self.centers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centers.is_empty()
    }

    pub fn centers(&self) -> &[f64] {
        &self.centers
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn encode(&self, t: f64) -> Result<Vec<f64>> {
        if !t.is_finite() {
            return Err(Error::NonFinite("time"));
        }
        if t < 0.0 {
            return Err(Error::NegativeTime(t));
        }
        Ok(self
            .centers
            .iter()
            .map(|c| gaussian((t - c) * (t - c), self.sigma))
            .collect())
    }
}

pub fn encode_time(t: f64, bank: &TimeCellBank) -> Result<Vec<f64>> {
    bank.encode(t)
}

/// Place cells on a regular lattice that covers the arena.
///
/// Centers start at the lower-left corner and step by `pitch`; the lattice
/// extends far enough that the upper-right corner is covered as well.
/// Cells are stored row-major (x fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct PlaceCellGrid {
    bounds: Bounds,
    pitch: f64,
    sigma: f64,
    nx: usize,
    ny: usize,
}

impl PlaceCellGrid {
    pub fn new(bounds: Bounds, pitch: f64, sigma: f64) -> Result<Self> {
        if !bounds.is_valid() {
            return Err(Error::InvalidConfig(format!("invalid arena bounds {bounds:?}")));
        }
        if !(pitch > 0.0 && pitch.is_finite()) || !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "place cell pitch and width must be positive (pitch {pitch}, sigma {sigma})"
            )));
        }
        let cells = |extent: f64| (extent / pitch - 1e-9).ceil().max(0.0) as usize + 1;
        Ok(PlaceCellGrid {
            bounds,
            pitch,
            sigma,
            nx: cells(bounds.width()),
            ny: cells(bounds.height()),
        })
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }

    pub fn pitch(&self) -> f64 {
        self.pitch
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn center(&self, index: usize) -> Point {
        let ix = index % self.nx;
        let iy = index / self.nx;
        Point::new(
            self.bounds.x_min + ix as f64 * self.pitch,
            self.bounds.y_min + iy as f64 * self.pitch,
        )
    }

    pub fn centers(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.len()).map(|i| self.center(i))
    }

    pub fn encode(&self, pos: Point) -> Result<Vec<f64>> {
        if !pos.is_finite() {
            return Err(Error::NonFinite("position"));
        }
        if !self.bounds.contains(&pos) {
            return Err(Error::OutOfArena { x: pos.x, y: pos.y });
        }
        Ok(self
            .centers()
            .map(|c| gaussian(pos.distance_sq(&c), self.sigma))
            .collect())
    }

    /// Population-vector estimate over the `top_m` most active cells above
    /// `floor`. `Ok(None)` means no cell is active enough to call it an event.
    pub fn decode(&self, activations: &[f64], top_m: usize, floor: f64) -> Result<Option<Point>> {
        if activations.len() != self.len() {
            return Err(Error::LengthMismatch {
                what: "place activations",
                expected: self.len(),
                actual: activations.len(),
            });
        }
        let mut active: Vec<(usize, f64)> = activations
            .iter()
            .copied()
            .enumerate()
            .filter(|(_, a)| *a > floor)
            .collect();
        if active.is_empty() {
            return Ok(None);
        }
        active.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap_or(Ordering::Equal).then(a.0.cmp(&b.0)));
        active.truncate(top_m.max(1));

        let (mut sx, mut sy, mut sw) = (0.0, 0.0, 0.0);
        for (i, a) in active {
            let c = self.center(i);
            sx += a * c.x;
            sy += a * c.y;
            sw += a;
        }
        Ok(Some(Point::new(sx / sw, sy / sw)))
    }
}

pub fn encode_place(pos: Point, grid: &PlaceCellGrid) -> Result<Vec<f64>> {
    grid.encode(pos)
}

/// Section sizes of an event vector: L cue, K time and P place cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventLayout {
    pub cues: usize,
    pub times: usize,
    pub places: usize,
}

impl EventLayout {
    pub fn len(&self) -> usize {
        self.cues + self.times + self.places
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Concatenated `[cue | time | place]` activations, every component in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct EventVector {
    layout: EventLayout,
    values: Vec<f64>,
}

impl EventVector {
    pub fn from_values(layout: EventLayout, values: Vec<f64>) -> Result<Self> {
        if values.len() != layout.len() {
            return Err(Error::LengthMismatch {
                what: "event vector",
                expected: layout.len(),
                actual: values.len(),
            });
        }
        if values.iter().any(|v| v.is_nan()) {
            return Err(Error::NonFinite("event vector"));
        }
        if let Some(v) = values.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::OutOfUnitRange {
                what: "event component",
                value: *v,
            });
        }
        Ok(EventVector { layout, values })
    }

    /// Wraps a raw network output, clamping every component into [0, 1].
    pub fn from_prediction(layout: EventLayout, raw: &[f64]) -> Result<Self> {
        if raw.iter().any(|v| v.is_nan()) {
            return Err(Error::NonFinite("prediction"));
        }
        EventVector::from_values(layout, raw.iter().map(|v| v.clamp(0.0, 1.0)).collect())
    }

    pub fn layout(&self) -> EventLayout {
        self.layout
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn cue(&self) -> &[f64] {
        &self.values[..self.layout.cues]
    }

    pub fn time(&self) -> &[f64] {
        let start = self.layout.cues;
        &self.values[start..start + self.layout.times]
    }

    pub fn place(&self) -> &[f64] {
        &self.values[self.layout.cues + self.layout.times..]
    }
}

pub fn build_event(
    layout: EventLayout,
    cue: &CueCode,
    time_act: &[f64],
    place_act: &[f64],
) -> Result<EventVector> {
    let check = |what, expected, actual| {
        if expected == actual {
            Ok(())
        } else {
            Err(Error::LengthMismatch {
                what,
                expected,
                actual,
            })
        }
    };
    check("cue section", layout.cues, cue.0.len())?;
    check("time section", layout.times, time_act.len())?;
    check("place section", layout.places, place_act.len())?;

    let mut values = Vec::with_capacity(layout.len());
    values.extend_from_slice(&cue.0);
    values.extend_from_slice(time_act);
    values.extend_from_slice(place_act);
    EventVector::from_values(layout, values)
}

/// Argmax over the cue section, lowest index on ties. `None` when every cue
/// activation sits at or below `floor`.
pub fn decode_cue(event: &EventVector, floor: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &a) in event.cue().iter().enumerate() {
        if a > floor && best.is_none_or(|(_, b)| a > b) {
            best = Some((i, a));
        }
    }
    best.map(|(i, _)| i)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeCellConfig {
    pub count: usize,
    pub span_s: f64,
    #[serde(default)]
    pub sigma_s: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaceCellConfig {
    /// `[x_min, x_max, y_min, y_max]`; defaults to the scenario arena.
    #[serde(default)]
    pub bounds_m: Option<[f64; 4]>,
    pub pitch_m: f64,
    pub sigma_m: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoderConfig {
    pub top_m: usize,
    pub floor: f64,
}

impl Default for DecoderConfig {
    fn default() -> Self {
        DecoderConfig {
            top_m: 4,
            floor: 0.05,
        }
    }
}

/// Encoder block of the scenario configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncoderConfig {
    pub labels: Vec<String>,
    pub time_cells: TimeCellConfig,
    pub place_cells: PlaceCellConfig,
    #[serde(default)]
    pub decoder: DecoderConfig,
}

impl EncoderConfig {
    pub fn with_defaults(labels: Vec<String>, observation_s: f64) -> Self {
        EncoderConfig {
            labels,
            time_cells: TimeCellConfig {
                count: 20,
                span_s: observation_s,
                sigma_s: None,
            },
            place_cells: PlaceCellConfig {
                bounds_m: None,
                pitch_m: 0.5,
                sigma_m: 0.5,
            },
            decoder: DecoderConfig::default(),
        }
    }
}

/// A decoded (possibly predicted) event.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodedEvent {
    pub label: usize,
    pub position: Point,
}

/// The full hippocampus model: cue, time and place populations plus the
/// decoder settings used to read predictions back out.
#[derive(Clone, Debug)]
pub struct HippocampusEncoder {
    labels: Vec<String>,
    time: TimeCellBank,
    place: PlaceCellGrid,
    decoder: DecoderConfig,
}

impl HippocampusEncoder {
    pub fn new(
        labels: Vec<String>,
        time: TimeCellBank,
        place: PlaceCellGrid,
        decoder: DecoderConfig,
    ) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidConfig("label set is empty".into()));
        }
        if decoder.top_m == 0 || !(0.0..1.0).contains(&decoder.floor) {
            return Err(Error::InvalidConfig(format!(
                "decoder needs top_m >= 1 and floor in [0, 1), got {decoder:?}"
            )));
        }
        Ok(HippocampusEncoder {
            labels,
            time,
            place,
            decoder,
        })
    }

    pub fn from_config(config: &EncoderConfig, arena: Bounds) -> Result<Self> {
        let bounds = match config.place_cells.bounds_m {
            Some([x0, x1, y0, y1]) => Bounds::new(x0, x1, y0, y1),
            None => arena,
        };
        let time = TimeCellBank::uniform(
            config.time_cells.count,
            config.time_cells.span_s,
            config.time_cells.sigma_s,
        )?;
        let place = PlaceCellGrid::new(bounds, config.place_cells.pitch_m, config.place_cells.sigma_m)?;
        HippocampusEncoder::new(config.labels.clone(), time, place, config.decoder.clone())
    }

    pub fn layout(&self) -> EventLayout {
        EventLayout {
            cues: self.labels.len(),
            times: self.time.len(),
            places: self.place.len(),
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label_index(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn time_cells(&self) -> &TimeCellBank {
        &self.time
    }

    pub fn place_cells(&self) -> &PlaceCellGrid {
        &self.place
    }

    pub fn decoder(&self) -> &DecoderConfig {
        &self.decoder
    }

    pub fn encode(&self, label: usize, t: f64, pos: Point) -> Result<EventVector> {
        let cue = encode_cue(label, self.labels.len())?;
        let time = self.time.encode(t)?;
        let place = self.place.encode(pos)?;
        build_event(self.layout(), &cue, &time, &place)
    }

    pub fn decode_place(&self, event: &EventVector) -> Result<Option<Point>> {
        self.place
            .decode(event.place(), self.decoder.top_m, self.decoder.floor)
    }

    pub fn decode_cue(&self, event: &EventVector) -> Option<usize> {
        decode_cue(event, self.decoder.floor)
    }

    /// Both label and position, or `None` if either section is silent.
    pub fn decode(&self, event: &EventVector) -> Result<Option<DecodedEvent>> {
        let Some(label) = self.decode_cue(event) else {
            return Ok(None);
        };
        Ok(self
            .decode_place(event)?
            .map(|position| DecodedEvent { label, position }))
    }
}

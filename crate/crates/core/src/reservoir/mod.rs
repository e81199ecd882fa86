//! Prefrontal echo state network.
//!
//! A fixed sparse random reservoir is driven by event vectors through the
//! leaky-integrator update
//!
//! ```text
//! x' = (1 - a) x + a tanh(W x + W_in u)
//! ```
//!
//! and only the linear readout is trained, by ridge regression, to predict
//! the next event vector. After training the network can be rolled forward
//! on its own predictions.

mod persist;
mod ridge;
mod sparse;
mod spectral;

use nalgebra::{DMatrix, DVector};
use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use persist::{load_readout, save_readout, ReadoutMeta};
pub use ridge::{ridge_objective, train_readout, ReadoutWeights};
pub use sparse::SparseMatrix;
pub use spectral::spectral_radius;

const MAX_DRAWS: u32 = 64;
const DEGENERATE_RADIUS: f64 = 1e-12;

/// ESN block of the scenario configuration.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EsnConfig {
    pub nodes: usize,
    pub density: f64,
    pub spectral_radius: f64,
    pub leak: f64,
    pub input_scale: f64,
    pub ridge: f64,
    pub washout: usize,
    /// Reservoir seed; when absent the scenario seed is used.
    #[serde(default)]
    pub seed: Option<u64>,
}

impl Default for EsnConfig {
    fn default() -> Self {
        EsnConfig {
            nodes: 300,
            density: 0.1,
            spectral_radius: 0.9,
            leak: 0.3,
            input_scale: 0.5,
            ridge: 1e-4,
            washout: 10,
            seed: None,
        }
    }
}

impl EsnConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.nodes < 2 {
            return bad(format!("reservoir needs at least 2 nodes, got {}", self.nodes));
        }
        if !(self.density > 0.0 && self.density <= 1.0) {
            return bad(format!("density must lie in (0, 1], got {}", self.density));
        }
        if !(self.spectral_radius > 0.0 && self.spectral_radius < 1.0) {
            return bad(format!(
                "spectral radius must lie in (0, 1), got {}",
                self.spectral_radius
            ));
        }
        if !(self.leak > 0.0 && self.leak <= 1.0) {
            return bad(format!("leak rate must lie in (0, 1], got {}", self.leak));
        }
        if !(self.input_scale >= 0.0 && self.input_scale.is_finite()) {
            return bad(format!("input scale must be >= 0, got {}", self.input_scale));
        }
        if !(self.ridge >= 0.0 && self.ridge.is_finite()) {
            return bad(format!("ridge penalty must be >= 0, got {}", self.ridge));
        }
        Ok(())
    }
}

/// Fixed recurrent weights, input weights and leak rate.
#[derive(Clone, Debug, PartialEq)]
pub struct Reservoir {
    recurrent: SparseMatrix,
    input: DMatrix<f64>,
    leak: f64,
    radius: f64,
    seed: u64,
    draw: u32,
}

impl Reservoir {
    /// Draws a reservoir of `nodes` units for inputs of length `input_dim`.
    ///
    /// Exactly `round(density * N^2)` recurrent entries are drawn uniformly
    /// in [-1, 1] and the matrix is rescaled to the target spectral radius.
    /// A draw whose spectrum collapses to zero is replaced by the next
    /// stream of the same seed.
    pub fn init(config: &EsnConfig, input_dim: usize, seed: u64) -> Result<Self> {
        config.validate()?;
        let n = config.nodes;
        let nnz = ((config.density * (n * n) as f64).round() as usize).clamp(1, n * n);

        for draw in 0..MAX_DRAWS {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(u64::from(draw));

            let positions = index::sample(&mut rng, n * n, nnz).into_vec();
            let triplets = positions
                .into_iter()
                .map(|p| (p / n, p % n, rng.random_range(-1.0..=1.0)))
                .collect();
            let mut recurrent = SparseMatrix::from_triplets(n, triplets);

            let raw = spectral_radius(&recurrent.to_dense()).unwrap_or(0.0);
            if raw < DEGENERATE_RADIUS {
                log::debug!("reservoir draw {draw} degenerate (radius {raw:e}), redrawing");
                continue;
            }
            recurrent.scale(config.spectral_radius / raw);

            let s = config.input_scale;
            let input = DMatrix::from_fn(n, input_dim, |_, _| {
                if s > 0.0 {
                    rng.random_range(-s..=s)
                } else {
                    0.0
                }
            });
            return Ok(Reservoir {
                recurrent,
                input,
                leak: config.leak,
                radius: config.spectral_radius,
                seed,
                draw,
            });
        }
        Err(Error::DegenerateReservoir(MAX_DRAWS))
    }

    /// Builds a reservoir around an explicit recurrent matrix, rescaled to
    /// spectral radius `rho`.
    pub fn from_matrices(
        raw_recurrent: &DMatrix<f64>,
        input: DMatrix<f64>,
        leak: f64,
        rho: f64,
    ) -> Result<Self> {
        if raw_recurrent.nrows() != raw_recurrent.ncols() || input.nrows() != raw_recurrent.nrows() {
            return Err(Error::LengthMismatch {
                what: "reservoir matrices",
                expected: raw_recurrent.nrows(),
                actual: input.nrows(),
            });
        }
        if !(leak > 0.0 && leak <= 1.0) {
            return Err(Error::InvalidConfig(format!("leak rate must lie in (0, 1], got {leak}")));
        }
        let mut recurrent = SparseMatrix::from_dense(raw_recurrent);
        let raw = spectral_radius(raw_recurrent).unwrap_or(0.0);
        if raw >= DEGENERATE_RADIUS {
            recurrent.scale(rho / raw);
        }
        Ok(Reservoir {
            recurrent,
            input,
            leak,
            radius: if raw >= DEGENERATE_RADIUS { rho } else { 0.0 },
            seed: 0,
            draw: 0,
        })
    }

    pub fn nodes(&self) -> usize {
        self.recurrent.dim()
    }

    pub fn input_dim(&self) -> usize {
        self.input.ncols()
    }

    pub fn leak(&self) -> f64 {
        self.leak
    }

    pub fn target_radius(&self) -> f64 {
        self.radius
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Index of the seed stream that produced a non-degenerate draw.
    pub fn draw(&self) -> u32 {
        self.draw
    }

    pub fn recurrent(&self) -> &SparseMatrix {
        &self.recurrent
    }

    pub fn input_weights(&self) -> &DMatrix<f64> {
        &self.input
    }

    pub fn zero_state(&self) -> DVector<f64> {
        DVector::zeros(self.nodes())
    }

    pub fn step(&self, x: &DVector<f64>, u: &[f64]) -> Result<DVector<f64>> {
        if x.len() != self.nodes() {
            return Err(Error::LengthMismatch {
                what: "reservoir state",
                expected: self.nodes(),
                actual: x.len(),
            });
        }
        if u.len() != self.input_dim() {
            return Err(Error::LengthMismatch {
                what: "reservoir input",
                expected: self.input_dim(),
                actual: u.len(),
            });
        }
        let mut pre = self.recurrent.mul_vec(x);
        pre.gemv(1.0, &self.input, &DVector::from_column_slice(u), 1.0);
        let a = self.leak;
        Ok(x.zip_map(&pre, |xi, p| (1.0 - a) * xi + a * p.tanh()))
    }

    /// Drives the reservoir from the zero state and collects the states
    /// after each input, dropping the first `washout`. A constant bias row
    /// is appended, giving `(N + 1) x (T - washout)`.
    pub fn harvest_states(&self, dataset: &EpisodeDataset) -> Result<DMatrix<f64>> {
        let t = dataset.len();
        let washout = dataset.washout();
        if t <= washout {
            return Err(Error::DatasetTooShort { len: t, washout });
        }
        let n = self.nodes();
        let mut states = DMatrix::zeros(n + 1, t - washout);
        let mut x = self.zero_state();
        for (i, u) in dataset.events().iter().enumerate() {
            x = self.step(&x, u)?;
            if i >= washout {
                let col = i - washout;
                states.view_mut((0, col), (n, 1)).copy_from(&x);
                states[(n, col)] = 1.0;
            }
        }
        Ok(states)
    }

    /// One-step-ahead training pairs: the state after input `t` is paired
    /// with input `t + 1`, for `t` from `washout` to `T - 2`.
    pub fn training_pairs(&self, dataset: &EpisodeDataset) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
        let t = dataset.len();
        let washout = dataset.washout();
        if t < washout + 2 {
            return Err(Error::DatasetTooShort { len: t, washout });
        }
        let states = self.harvest_states(dataset)?;
        let cols = t - washout - 1;
        let x = states.columns(0, cols).into_owned();
        let d = self.input_dim();
        let mut y = DMatrix::zeros(d, cols);
        for (c, target) in dataset.events()[washout + 1..].iter().enumerate() {
            y.column_mut(c).copy_from_slice(target);
        }
        Ok((x, y))
    }

    /// Primes on `primer`, then emits `steps` one-step-ahead predictions.
    ///
    /// With [`Drive::Autonomous`] every prediction is clamped to [0, 1] and
    /// fed back as the next input, and `continuation` is never touched.
    /// With [`Drive::TeacherForced`] the next input is pulled from
    /// `continuation` instead.
    pub fn free_run<I, V>(
        &self,
        readout: &ReadoutWeights,
        primer: &EpisodeDataset,
        continuation: I,
        steps: usize,
        drive: Drive,
    ) -> Result<Vec<DVector<f64>>>
    where
        I: IntoIterator<Item = V>,
        V: AsRef<[f64]>,
    {
        if primer.len() < primer.washout() {
            return Err(Error::DatasetTooShort {
                len: primer.len(),
                washout: primer.washout(),
            });
        }
        if readout.output_dim() != self.input_dim() || readout.input_dim() != self.nodes() + 1 {
            return Err(Error::LengthMismatch {
                what: "readout shape",
                expected: self.input_dim(),
                actual: readout.output_dim(),
            });
        }
        if steps == 0 {
            return Ok(Vec::new());
        }

        let mut x = self.zero_state();
        for u in primer.events() {
            x = self.step(&x, u)?;
        }

        let mut continuation = continuation.into_iter();
        let mut out = Vec::with_capacity(steps);
        for k in 0..steps {
            let y = readout.apply(&x)?;
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite("prediction"));
            }
            out.push(y);
            if k + 1 == steps {
                break;
            }
            x = match drive {
                Drive::Autonomous => {
                    let fed: Vec<f64> = out[k].iter().map(|v| v.clamp(0.0, 1.0)).collect();
                    self.step(&x, &fed)?
                }
                Drive::TeacherForced => {
                    let u = continuation.next().ok_or(Error::DatasetTooShort {
                        len: primer.len() + k,
                        washout: primer.washout(),
                    })?;
                    self.step(&x, u.as_ref())?
                }
            };
        }
        Ok(out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Drive {
    TeacherForced,
    Autonomous,
}

/// Event vectors sampled on a uniform time grid, plus the washout length
/// used when harvesting states from it.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeDataset {
    events: Vec<Vec<f64>>,
    dt: f64,
    washout: usize,
}

impl EpisodeDataset {
    pub fn new(events: Vec<Vec<f64>>, dt: f64, washout: usize) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidConfig(format!("sample period must be > 0, got {dt}")));
        }
        if let Some(first) = events.first() {
            let d = first.len();
            if let Some(bad) = events.iter().find(|e| e.len() != d) {
                return Err(Error::LengthMismatch {
                    what: "dataset event",
                    expected: d,
                    actual: bad.len(),
                });
            }
        }
        Ok(EpisodeDataset { events, dt, washout })
    }

    pub fn events(&self) -> &[Vec<f64>] {
        &self.events
    }

    pub fn len(&self) -> usize {
        self.events.len()
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn washout(&self) -> usize {
        self.washout
    }

    /// First `len` samples, same period and washout.
    pub fn prefix(&self, len: usize) -> EpisodeDataset {
        EpisodeDataset {
            events: self.events[..len.min(self.events.len())].to_vec(),
            dt: self.dt,
            washout: self.washout,
        }
    }
}

/// Summary of a readout fit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    pub sequences: usize,
    pub samples: usize,
    pub columns: usize,
    pub residual_rms: f64,
}

/// Trains one readout over several independent sequences. Each sequence is
/// harvested from the zero state with its own washout and the training
/// columns are stacked.
pub fn fit_sequences(
    reservoir: &Reservoir,
    sequences: &[EpisodeDataset],
    lambda: f64,
) -> Result<(ReadoutWeights, TrainingSummary)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for seq in sequences {
        let (x, y) = reservoir.training_pairs(seq)?;
        xs.push(x);
        ys.push(y);
    }
    let columns: usize = xs.iter().map(|x| x.ncols()).sum();
    if columns == 0 {
        return Err(Error::DatasetTooShort { len: 0, washout: 0 });
    }
    let mut x = DMatrix::zeros(reservoir.nodes() + 1, columns);
    let mut y = DMatrix::zeros(reservoir.input_dim(), columns);
    let mut at = 0;
    for (xi, yi) in xs.iter().zip(&ys) {
        x.columns_mut(at, xi.ncols()).copy_from(xi);
        y.columns_mut(at, yi.ncols()).copy_from(yi);
        at += xi.ncols();
    }
    let readout = train_readout(&x, &y, lambda)?;
    let residual = readout.matrix() * &x - &y;
    let summary = TrainingSummary {
        sequences: sequences.len(),
        samples: sequences.iter().map(EpisodeDataset::len).sum(),
        columns,
        residual_rms: (residual.norm_squared() / residual.len() as f64).sqrt(),
    };
    Ok((readout, summary))
}

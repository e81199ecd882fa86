//! `neuronav` command line: simulate, predict, mapgen, synthgen, verify.
//!
//! Exit codes: 0 on success, 1 for invalid input or usage, 2 for runtime
//! failures.

use std::ffi::OsString;
use std::fmt;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use neuronav::sim::ScenarioConfig;

mod commands;

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;

/// Environment variable consulted when no `--seed` flag is given.
pub const SEED_ENV: &str = "NEURONAV_SEED";

/// Bad input detected by the CLI itself.
#[derive(Debug)]
pub struct Invalid(pub String);

impl fmt::Display for Invalid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Invalid {}

#[derive(Debug, Parser)]
#[command(name = "neuronav", version, about = "Event prediction, avoidance planning and detector dataset generation")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a crossing scenario with and without the imaginary potential.
    Simulate(SimulateArgs),
    /// Train on recorded detections and free-run a prediction.
    Predict(PredictArgs),
    /// Stamp a predicted trajectory onto a map as an imaginary potential.
    Mapgen(MapgenArgs),
    /// Generate or plan a detector training dataset.
    Synthgen {
        #[command(subcommand)]
        command: SynthCommand,
    },
    /// Check a generated dataset.
    Verify(VerifyArgs),
    /// Produce every artifact type in a scratch directory and validate it.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario JSON; the built-in canonical crossing when omitted.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// CSV with columns `crossing` (optional), `t`, `label`, `x`, `y`.
    #[arg(long)]
    pub detections: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Samples of the last crossing used to prime the network.
    #[arg(long)]
    pub primer: Option<usize>,
    /// Prediction steps after the primer.
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct MapgenArgs {
    /// Occupancy PGM with a YAML sidecar; an empty arena grid when omitted.
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// Predicted trajectory CSV with columns `step`, `t`, `x`, `y`.
    #[arg(long)]
    pub trajectory: PathBuf,
    /// Scenario JSON for potential parameters and arena.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum SynthCommand {
    /// Composite cutouts onto backgrounds and write images, labels and a manifest.
    Generate(GenerateArgs),
    /// Estimate the work for a dataset without generating it.
    Plan(PlanArgs),
    /// Write synthetic cutouts, backgrounds and an anchors file.
    DemoAssets(DemoAssetsArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Directory of `<category>/<view>.png` cutouts.
    #[arg(long)]
    pub objects: PathBuf,
    #[arg(long)]
    pub backgrounds: PathBuf,
    /// JSON list of `{"file", "anchors": [{"cx", "cy", "scale_min", "scale_max"}]}`.
    #[arg(long)]
    pub anchors: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub count: usize,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Backgrounds are already equalized.
    #[arg(long)]
    pub no_equalize: bool,
    #[arg(long, default_value_t = synthgen::AceParams::default().samples)]
    pub ace_samples: usize,
    #[arg(long, default_value_t = synthgen::AceParams::default().slope)]
    pub ace_slope: f64,
    #[arg(long, default_value_t = 1)]
    pub min_anchors: usize,
    #[arg(long, default_value_t = 64)]
    pub max_anchors: usize,
}

#[derive(Debug, Args)]
pub struct PlanArgs {
    /// Defaults describe the full-scale reference setup.
    #[arg(long, default_value_t = 15)]
    pub categories: usize,
    #[arg(long, default_value_t = 306)]
    pub backgrounds: usize,
    #[arg(long, default_value_t = 20)]
    pub min_anchors: usize,
    #[arg(long, default_value_t = 25)]
    pub max_anchors: usize,
    #[arg(long, default_value_t = 400_000)]
    pub images: usize,
    #[arg(long, default_value_t = 6)]
    pub workers: usize,
    #[arg(long, default_value_t = 416)]
    pub width: u32,
    #[arg(long, default_value_t = 416)]
    pub height: u32,
    #[arg(long, default_value_t = 512)]
    pub ace_samples: usize,
    #[arg(long, default_value_t = 440.0 / 6.0)]
    pub rate_per_worker: f64,
}

#[derive(Debug, Args)]
pub struct DemoAssetsArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub categories: usize,
    #[arg(long, default_value_t = 2)]
    pub views: usize,
    #[arg(long, default_value_t = 3)]
    pub backgrounds: usize,
    #[arg(long, default_value_t = 4)]
    pub anchors: usize,
    #[arg(long, default_value_t = 416)]
    pub width: u32,
    #[arg(long, default_value_t = 416)]
    pub height: u32,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long)]
    pub dataset: PathBuf,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Keep the artifacts here instead of a temporary directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// `--seed`, then `NEURONAV_SEED`, then `fallback`.
pub fn resolve_seed(flag: Option<u64>, fallback: u64) -> Result<u64> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match std::env::var(SEED_ENV) {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| Invalid(format!("{SEED_ENV}='{text}' is not an unsigned integer")).into()),
        Err(_) => Ok(fallback),
    }
}

pub fn load_config(path: Option<&Path>) -> Result<ScenarioConfig> {
    match path {
        Some(p) => ScenarioConfig::load(p).with_context(|| format!("loading scenario {}", p.display())),
        None => Ok(ScenarioConfig::canonical()),
    }
}

/// Exit code for an error: the first library or CLI error in the chain
/// decides between validation and runtime.
pub fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<neuronav::Error>() {
            return if e.is_validation() { EXIT_VALIDATION } else { EXIT_RUNTIME };
        }
        if let Some(e) = cause.downcast_ref::<synthgen::Error>() {
            return if e.is_validation() { EXIT_VALIDATION } else { EXIT_RUNTIME };
        }
        if cause.downcast_ref::<Invalid>().is_some() {
            return EXIT_VALIDATION;
        }
    }
    EXIT_RUNTIME
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => commands::simulate(&a),
        Command::Predict(a) => commands::predict(&a),
        Command::Mapgen(a) => commands::mapgen(&a),
        Command::Synthgen { command } => match command {
            SynthCommand::Generate(a) => commands::generate(&a),
            SynthCommand::Plan(a) => commands::plan(&a),
            SynthCommand::DemoAssets(a) => commands::demo_assets(&a),
        },
        Command::Verify(a) => commands::verify(&a),
        Command::Selftest(a) => commands::selftest(&a),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match execute(cli) {
        Ok(()) => EXIT_OK,
        Err(err) => {
            eprintln!("error: {err:#}");
            exit_code(&err)
        }
    }
}

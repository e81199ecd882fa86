use std::fs;
use std::path::Path;

use anyhow::{bail, ensure, Context, Result};
use neuronav::navigation::{pgm, stamp_imaginary_potential, CellState, GridGeometry, OccupancyGrid, PotentialField, PredictedPosition};
use neuronav::reservoir::{load_readout, save_readout};
use neuronav::sim::export::{read_prediction_csv, write_prediction_rows, write_run_dir, EpisodePair, PredictionRow, TrackRow};
use neuronav::sim::{forecast, read_detections_csv, run_episode, PotentialMode};
use synthgen::{plan_dataset, GenerateConfig, PlanRequest};

use crate::{
    load_config, resolve_seed, DemoAssetsArgs, GenerateArgs, Invalid, MapgenArgs, PlanArgs, PredictArgs, SelftestArgs,
    SimulateArgs, VerifyArgs,
};

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)? + "\n";
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).with_context(|| format!("creating {}", path.display()))
}

pub fn simulate(args: &SimulateArgs) -> Result<()> {
    let mut config = load_config(args.config.as_deref())?;
    config.seed = resolve_seed(args.seed, config.seed)?;
    let on = run_episode(&config, PotentialMode::PotentialOn)?;
    let off = run_episode(&config, PotentialMode::PotentialOff)?;
    write_run_dir(&args.out, &on, &off)?;
    let error = on
        .log
        .prediction
        .mean_error_m
        .map_or_else(|| "undecodable".to_string(), |e| format!("{e:.3} m"));
    println!(
        "seed {}: clearance on {:.3} m, off {:.3} m; prediction error {error}; wrote {}",
        config.seed,
        on.log.clearance.clearance_m,
        off.log.clearance.clearance_m,
        args.out.display()
    );
    Ok(())
}

pub fn predict(args: &PredictArgs) -> Result<()> {
    let mut config = load_config(args.config.as_deref())?;
    config.seed = resolve_seed(args.seed, config.seed)?;
    let rows = read_detections_csv(&args.detections)
        .with_context(|| format!("reading detections {}", args.detections.display()))?;
    let primer = args.primer.unwrap_or(config.prediction.primer_steps);
    let steps = args.steps.unwrap_or_else(|| config.horizon_steps());
    let result = forecast(&config, &rows, primer, steps)?;

    create_dir(&args.out)?;
    write_json(&args.out.join("forecast.json"), &result.log)?;
    let rows: Vec<PredictionRow> = result
        .log
        .steps
        .iter()
        .map(|s| PredictionRow {
            step: s.step,
            t: s.t,
            x: s.position.map(|p| p.x),
            y: s.position.map(|p| p.y),
        })
        .collect();
    write_prediction_rows(&rows, &args.out.join("trajectory_pred.csv"))?;
    save_readout(&args.out.join("readout.csv"), &result.readout, &result.readout_meta)?;
    println!(
        "trained on {} samples from {} crossing(s); predicted {} steps into {}",
        result.log.training.columns,
        result.log.training.sequences,
        rows.len(),
        args.out.display()
    );
    Ok(())
}

pub fn mapgen(args: &MapgenArgs) -> Result<()> {
    let config = load_config(args.config.as_deref())?;
    let map = args.map.clone().or_else(|| config.grid.map.clone());
    let grid = match &map {
        Some(path) => pgm::read_occupancy(path).with_context(|| format!("reading map {}", path.display()))?,
        None => OccupancyGrid::filled(GridGeometry::covering(&config.arena, config.grid.resolution_m)?, CellState::Free),
    };
    let rows = read_prediction_csv(&args.trajectory)
        .with_context(|| format!("reading trajectory {}", args.trajectory.display()))?;
    let predicted: Vec<PredictedPosition> = rows
        .iter()
        .filter_map(|r| match (r.x, r.y) {
            (Some(x), Some(y)) => Some(PredictedPosition {
                position: neuronav::Point::new(x, y),
                steps_ahead: r.step as u32,
            }),
            _ => None,
        })
        .collect();
    if predicted.iter().any(|p| !p.position.is_finite()) {
        bail!(Invalid("trajectory contains non-finite positions".into()));
    }

    let p = &config.potential;
    let mut field = PotentialField::zeros(*grid.geometry(), p.cap);
    stamp_imaginary_potential(&mut field, &predicted, p.amplitude, p.sigma_m, p.decay);
    create_dir(&args.out)?;
    let meta = pgm::write_potential(&field, &args.out.join("potential.pgm"))?;
    pgm::write_occupancy(&grid, &args.out.join("map.pgm"))?;
    println!(
        "stamped {} predicted positions, potential max {:.3}; wrote {}",
        predicted.len(),
        meta.max,
        args.out.display()
    );
    Ok(())
}

pub fn generate(args: &GenerateArgs) -> Result<()> {
    let library = synthgen::load_objects(&args.objects)?;
    let backgrounds = synthgen::load_backgrounds(&args.backgrounds, &args.anchors)?;
    let config = GenerateConfig {
        count: args.count,
        seed: resolve_seed(args.seed, 0)?,
        workers: args.workers,
        ace: synthgen::AceParams {
            slope: args.ace_slope,
            samples: args.ace_samples,
        },
        equalize: !args.no_equalize,
        anchor_limits: (args.min_anchors, args.max_anchors),
        ..GenerateConfig::default()
    };
    let started = std::time::Instant::now();
    let manifest = synthgen::generate_dataset(&library, &backgrounds, &config, &args.out)?;
    let secs = started.elapsed().as_secs_f64();
    println!(
        "generated {} images with {} objects ({} anchors skipped) in {secs:.2} s ({:.1} images/s); digest {}",
        manifest.images_produced,
        manifest.objects_placed,
        manifest.anchors_skipped,
        manifest.images_produced as f64 / secs.max(1e-9),
        manifest.digest
    );
    Ok(())
}

pub fn plan(args: &PlanArgs) -> Result<()> {
    let request = PlanRequest {
        categories: args.categories,
        backgrounds: args.backgrounds,
        anchors_min: args.min_anchors,
        anchors_max: args.max_anchors,
        images: args.images,
        workers: args.workers,
        width: args.width,
        height: args.height,
        ace_samples: args.ace_samples,
        images_per_second_per_worker: args.rate_per_worker,
    };
    let plan = plan_dataset(&request)?;
    println!("{}", serde_json::to_string_pretty(&plan)?);
    Ok(())
}

pub fn demo_assets(args: &DemoAssetsArgs) -> Result<()> {
    let seed = resolve_seed(args.seed, 0)?;
    let library = synthgen::demo::demo_library(args.categories, args.views, seed);
    let backgrounds = synthgen::demo::demo_backgrounds(args.backgrounds, args.anchors, args.width, args.height, seed);
    synthgen::save_assets(
        &library,
        &backgrounds,
        &args.out.join("objects"),
        &args.out.join("backgrounds"),
        &args.out.join("anchors.json"),
    )?;
    println!(
        "wrote {} cutouts and {} backgrounds under {}",
        library.cutouts.len(),
        backgrounds.len(),
        args.out.display()
    );
    Ok(())
}

pub fn verify(args: &VerifyArgs) -> Result<()> {
    let report = synthgen::verify_dataset(&args.dataset)?;
    for v in &report.violations {
        println!("{v}");
    }
    if !report.digest_matches() {
        println!(
            "manifest.json: digest mismatch (expected {}, found {})",
            report.digest_expected.as_deref().unwrap_or("none"),
            report.digest_actual
        );
    }
    println!(
        "{} images, {} label files, {} annotations, {} violations",
        report.images,
        report.labels,
        report.annotations,
        report.violations.len()
    );
    ensure!(report.is_clean(), Invalid(format!("dataset {} failed verification", args.dataset.display())));
    Ok(())
}

fn read_csv<T: serde::de::DeserializeOwned>(path: &Path) -> Result<Vec<T>> {
    let mut r = csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    r.deserialize()
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("parsing {}", path.display()))
}

/// Runs each producer once and parses every file it writes back into its
/// documented type.
pub fn selftest(args: &SelftestArgs) -> Result<()> {
    let scratch = tempfile::tempdir()?;
    let root = args.out.clone().unwrap_or_else(|| scratch.path().to_path_buf());
    let mut checks = 0;
    let mut check = |what: &str, ok: bool| -> Result<()> {
        checks += 1;
        ensure!(ok, "selftest: {what} failed");
        Ok(())
    };

    let run = root.join("run");
    simulate(&SimulateArgs {
        config: None,
        out: run.clone(),
        seed: Some(1),
    })?;
    let pair: EpisodePair = serde_json::from_str(&fs::read_to_string(run.join("episode.json"))?)?;
    check("episode.json modes", pair.potential_on.mode == PotentialMode::PotentialOn)?;
    check("gating soundness", pair.potential_on.gating_is_sound() && pair.potential_off.gating_is_sound())?;
    for name in ["trajectory_true.csv", "path_on.csv", "path_off.csv"] {
        let rows: Vec<TrackRow> = read_csv(&run.join(name))?;
        check(name, !rows.is_empty())?;
    }
    let predicted = read_prediction_csv(&run.join("trajectory_pred.csv"))?;
    check("trajectory_pred.csv", predicted.len() == pair.potential_on.prediction.steps.len())?;
    let meta: pgm::PotentialMeta = serde_json::from_str(&fs::read_to_string(run.join("potential.json"))?)?;
    let field = pgm::read_potential(&run.join("potential.pgm"))?;
    check("potential.pgm", field.geometry().width == meta.width && field.geometry().height == meta.height)?;
    let map_meta: pgm::MapMeta = serde_yaml::from_str(&fs::read_to_string(run.join("map.yaml"))?)?;
    let grid = pgm::read_occupancy(&run.join("map.pgm"))?;
    check("map.pgm", grid.geometry().resolution == map_meta.resolution)?;
    let (readout, readout_meta) = load_readout(&run.join("readout.csv"))?;
    check("readout", readout.output_dim() == readout_meta.rows && readout.input_dim() == readout_meta.cols)?;

    let maps = root.join("mapgen");
    mapgen(&MapgenArgs {
        map: Some(run.join("map.pgm")),
        trajectory: run.join("trajectory_pred.csv"),
        config: None,
        out: maps.clone(),
    })?;
    let restamped = pgm::read_potential(&maps.join("potential.pgm"))?;
    check("mapgen potential", restamped.values() == field.values())?;

    let assets = root.join("assets");
    demo_assets(&DemoAssetsArgs {
        out: assets.clone(),
        categories: 2,
        views: 2,
        backgrounds: 2,
        anchors: 4,
        width: 160,
        height: 120,
        seed: Some(1),
    })?;
    let dataset = root.join("dataset");
    generate(&GenerateArgs {
        objects: assets.join("objects"),
        backgrounds: assets.join("backgrounds"),
        anchors: assets.join("anchors.json"),
        out: dataset.clone(),
        count: 4,
        seed: Some(1),
        workers: 2,
        no_equalize: false,
        ace_samples: 32,
        ace_slope: synthgen::AceParams::default().slope,
        min_anchors: 1,
        max_anchors: 64,
    })?;
    let manifest: synthgen::DatasetManifest = serde_json::from_str(&fs::read_to_string(dataset.join("manifest.json"))?)?;
    check("manifest", manifest.images_produced == 4)?;
    check("dataset verification", synthgen::verify_dataset(&dataset)?.is_clean())?;

    println!("selftest: {checks} checks passed");
    Ok(())
}

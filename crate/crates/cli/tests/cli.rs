use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use neuronav::sim::{sense_all, ScenarioConfig};

fn neuronav(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_neuronav"))
        .args(args)
        .env_remove("NEURONAV_SEED")
        .output()
        .expect("binary runs")
}

fn canonical_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/canonical.json")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn shipped_config_is_the_canonical_scenario() {
    assert_eq!(ScenarioConfig::load(&canonical_path()).unwrap(), ScenarioConfig::canonical());
}

#[test]
fn simulate_writes_a_reproducible_run_directory() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("run1"), dir.path().join("run2"));
    for out in [&a, &b] {
        let o = neuronav(&["simulate", "--config", s(&canonical_path()), "--out", s(out), "--seed", "3"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    for name in ["episode.json", "path_on.csv", "path_off.csv", "trajectory_true.csv", "trajectory_pred.csv", "potential.pgm"] {
        assert!(a.join(name).is_file(), "missing {name}");
        assert_eq!(fs::read(a.join(name)).unwrap(), fs::read(b.join(name)).unwrap(), "{name} differs");
    }
}

#[test]
fn seed_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let run = |out: &str, env: Option<&str>, flag: Option<&str>| {
        let mut cmd = Command::new(env!("CARGO_BIN_EXE_neuronav"));
        cmd.args(["simulate", "--out", s(&dir.path().join(out))]).env_remove("NEURONAV_SEED");
        if let Some(seed) = flag {
            cmd.args(["--seed", seed]);
        }
        if let Some(v) = env {
            cmd.env("NEURONAV_SEED", v);
        }
        let o = cmd.output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(dir.path().join(out).join("episode.json")).unwrap()
    };
    let env_only = run("env", Some("5"), None);
    let flag_only = run("flag", None, Some("5"));
    let both = run("both", Some("9"), Some("5"));
    let default = run("default", None, None);
    assert_eq!(env_only, flag_only);
    assert_eq!(both, flag_only);
    assert_ne!(default, flag_only);

    let o = Command::new(env!("CARGO_BIN_EXE_neuronav"))
        .args(["simulate", "--out", s(&dir.path().join("bad"))])
        .env("NEURONAV_SEED", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_with_one() {
    let o = neuronav(&["simulate", "--out", "x", "--bogus"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
    assert_eq!(neuronav(&["teleport"]).status.code(), Some(1));
    assert_eq!(neuronav(&[]).status.code(), Some(1));
    assert_eq!(neuronav(&["--help"]).status.code(), Some(0));
}

#[test]
fn invalid_config_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let mut c = ScenarioConfig::canonical();
    c.person.speed_mps = 0.0;
    let path = dir.path().join("bad.json");
    fs::write(&path, serde_json::to_string(&c).unwrap()).unwrap();
    let o = neuronav(&["simulate", "--config", s(&path), "--out", s(&dir.path().join("run"))]);
    assert_eq!(o.status.code(), Some(1));

    c.person.speed_mps = 0.8;
    c.amygdala.threshold = 1.1;
    fs::write(&path, serde_json::to_string(&c).unwrap()).unwrap();
    let o = neuronav(&["simulate", "--config", s(&path), "--out", s(&dir.path().join("run"))]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("insufficient"));
}

#[test]
fn predict_and_mapgen_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let c = ScenarioConfig::canonical();
    let mut csv = String::from("crossing,t,label,x,y\n");
    for crossing in 0..4u64 {
        for tick in 0..c.samples_per_crossing() as u64 {
            for d in sense_all(&c, crossing, tick).unwrap() {
                csv.push_str(&format!("{crossing},{},{},{},{}\n", d.timestamp, d.label, d.position.x, d.position.y));
            }
        }
    }
    let detections = dir.path().join("detections.csv");
    fs::write(&detections, csv).unwrap();
    let pred = dir.path().join("pred");
    let o = neuronav(&["predict", "--detections", s(&detections), "--out", s(&pred), "--steps", "15"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = neuronav::sim::export::read_prediction_csv(&pred.join("trajectory_pred.csv")).unwrap();
    assert_eq!(rows.len(), 15);
    assert!(rows.iter().all(|r| r.x.is_some()));
    assert!(pred.join("forecast.json").is_file() && pred.join("readout.json").is_file());

    let maps = dir.path().join("maps");
    let o = neuronav(&["mapgen", "--trajectory", s(&pred.join("trajectory_pred.csv")), "--out", s(&maps)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let field = neuronav::navigation::pgm::read_potential(&maps.join("potential.pgm")).unwrap();
    assert!(field.max() > 0.0);

    let o = neuronav(&["mapgen", "--trajectory", s(&dir.path().join("missing.csv")), "--out", s(&maps)]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn synthgen_generate_and_verify() {
    let dir = tempfile::tempdir().unwrap();
    let assets = dir.path().join("assets");
    let o = neuronav(&["synthgen", "demo-assets", "--out", s(&assets), "--width", "160", "--height", "120", "--seed", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));

    let generate = |out: &Path, workers: &str| {
        neuronav(&[
            "synthgen", "generate",
            "--objects", s(&assets.join("objects")),
            "--backgrounds", s(&assets.join("backgrounds")),
            "--anchors", s(&assets.join("anchors.json")),
            "--out", s(out),
            "--count", "6", "--seed", "11", "--workers", workers, "--ace-samples", "32",
        ])
    };
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(generate(&a, "1").status.code(), Some(0));
    assert_eq!(generate(&b, "3").status.code(), Some(0));
    assert_eq!(fs::read(a.join("manifest.json")).unwrap(), fs::read(b.join("manifest.json")).unwrap());
    // Existing output is refused.
    assert_eq!(generate(&a, "1").status.code(), Some(1));

    assert_eq!(neuronav(&["verify", "--dataset", s(&a)]).status.code(), Some(0));
    fs::write(a.join("labels/000002.txt"), "0 1.200000 0.5 0.1 0.1\n").unwrap();
    let o = neuronav(&["verify", "--dataset", s(&a)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("labels/000002.txt:1"));
}

#[test]
fn synthgen_plan_defaults_to_full_scale() {
    let o = neuronav(&["synthgen", "plan"]);
    assert_eq!(o.status.code(), Some(0));
    let plan: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(plan["images"], 400_000);
    assert_eq!(neuronav(&["synthgen", "plan", "--images", "0"]).status.code(), Some(1));
}

#[test]
fn selftest_passes() {
    let o = neuronav(&["selftest"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("checks passed"));
}

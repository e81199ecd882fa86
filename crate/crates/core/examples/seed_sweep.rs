//! Runs the canonical crossing for seeds 1..=10 in both modes and prints
//! clearance and prediction error per seed.

use std::time::Instant;

use neuronav::sim::{run_episode, PotentialMode, ScenarioConfig};

fn main() -> neuronav::Result<()> {
    let started = Instant::now();
    for seed in 1..=10u64 {
        let mut config = ScenarioConfig::canonical();
        config.seed = seed;
        let on = run_episode(&config, PotentialMode::PotentialOn)?.log;
        let off = run_episode(&config, PotentialMode::PotentialOff)?.log;
        println!(
            "seed {seed:2}: clearance on {:.3} m, off {:.3} m, mean error {:?}, path on {:.2} m",
            on.clearance.clearance_m,
            off.clearance.clearance_m,
            on.prediction.mean_error_m,
            on.plan.length_m,
        );
    }
    println!("elapsed {:.2?}", started.elapsed());
    Ok(())
}

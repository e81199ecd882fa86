use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::config::ScenarioConfig;
use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::navigation::TimedTrack;

/// Times at which the person reaches each waypoint, starting from zero.
fn waypoint_times(config: &ScenarioConfig) -> Vec<f64> {
    let w = &config.person.waypoints;
    let mut times = Vec::with_capacity(w.len());
    let mut t = 0.0;
    for (i, p) in w.iter().enumerate() {
        if i > 0 {
            t += w[i - 1].distance(p) / config.person.speed_mps;
        }
        times.push(t);
    }
    times
}

/// Time the person needs to walk the whole route.
pub fn crossing_duration(config: &ScenarioConfig) -> f64 {
    *waypoint_times(config).last().unwrap_or(&0.0)
}

/// Person position `t` seconds into a crossing. The person walks the
/// waypoints at constant speed and then stands at the last one.
pub fn person_position(config: &ScenarioConfig, t: f64) -> Point {
    true_track(config, 0.0).position_at(t)
}

/// Exact piecewise-linear person track from crossing time `from` onward,
/// with time re-zeroed at `from`.
pub fn true_track(config: &ScenarioConfig, from: f64) -> TimedTrack {
    let times = waypoint_times(config);
    let full = TimedTrack::new(
        times
            .iter()
            .zip(&config.person.waypoints)
            .map(|(t, p)| (*t, *p))
            .collect(),
    )
    .expect("validated waypoints");
    let mut samples = vec![(0.0, full.position_at(from))];
    samples.extend(
        times
            .iter()
            .zip(&config.person.waypoints)
            .filter(|(t, _)| **t > from)
            .map(|(t, p)| (t - from, *p)),
    );
    TimedTrack::new(samples).expect("monotone waypoint times")
}

/// Output of the simulated visual cortex.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub label: String,
    pub position: Point,
    pub timestamp: f64,
}

fn mix(mut z: u64) -> u64 {
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent random stream for one detector tick of one crossing.
pub fn tick_rng(seed: u64, crossing: u64, tick: u64) -> ChaCha8Rng {
    let key = mix(mix(mix(seed) ^ crossing.wrapping_mul(0x9e37_79b9_7f4a_7c15)) ^ tick);
    ChaCha8Rng::seed_from_u64(key)
}

/// Noisy person detection at crossing time `t`, or `None` on dropout.
pub fn sense(config: &ScenarioConfig, t: f64, rng: &mut impl Rng) -> Result<Option<Detection>> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let noise = Normal::new(0.0, config.detector.noise_sigma_m)
        .map_err(|e| Error::InvalidConfig(format!("detector noise: {e}")))?;
    let dropped = config.detector.dropout > 0.0 && rng.random::<f64>() < config.detector.dropout;
    let truth = person_position(config, t);
    let position = Point::new(truth.x + noise.sample(rng), truth.y + noise.sample(rng));
    Ok((!dropped).then(|| Detection {
        label: config.person.label.clone(),
        position,
        timestamp: t,
    }))
}

/// Everything the detector reports on one tick: the person (unless dropped)
/// followed by every distractor, all with the same position noise.
pub fn sense_all(config: &ScenarioConfig, crossing: u64, tick: u64) -> Result<Vec<Detection>> {
    let t = tick as f64 * config.detector.period_s;
    let mut rng = tick_rng(config.seed, crossing, tick);
    let mut out: Vec<Detection> = sense(config, t, &mut rng)?.into_iter().collect();
    let noise = Normal::new(0.0, config.detector.noise_sigma_m)
        .map_err(|e| Error::InvalidConfig(format!("detector noise: {e}")))?;
    for d in &config.distractors {
        out.push(Detection {
            label: d.label.clone(),
            position: Point::new(d.position.x + noise.sample(&mut rng), d.position.y + noise.sample(&mut rng)),
            timestamp: t,
        });
    }
    Ok(out)
}

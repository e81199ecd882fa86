use serde::{Deserialize, Serialize};

use super::planner::Path;
use crate::error::{Error, Result};
use crate::geometry::Point;

/// Positions at known times, linearly interpolated in between and held
/// constant before the first and after the last sample.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimedTrack {
    samples: Vec<(f64, Point)>,
}

impl TimedTrack {
    pub fn new(samples: Vec<(f64, Point)>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidConfig("track needs at least one sample".into()));
        }
        if samples.iter().any(|(t, p)| !t.is_finite() || !p.is_finite()) {
            return Err(Error::NonFinite("track sample"));
        }
        if samples.windows(2).any(|w| w[1].0 < w[0].0) {
            return Err(Error::InvalidConfig("track times must be non-decreasing".into()));
        }
        Ok(TimedTrack { samples })
    }

    /// Traverses `poses` at constant `speed`, starting at time zero.
    pub fn from_poses(poses: &[Point], speed: f64) -> Result<Self> {
        if !(speed > 0.0 && speed.is_finite()) {
            return Err(Error::InvalidConfig(format!("speed must be positive, got {speed}")));
        }
        let mut t = 0.0;
        let mut samples = Vec::with_capacity(poses.len());
        for (i, p) in poses.iter().enumerate() {
            if i > 0 {
                t += poses[i - 1].distance(p) / speed;
            }
            samples.push((t, *p));
        }
        TimedTrack::new(samples)
    }

    pub fn samples(&self) -> &[(f64, Point)] {
        &self.samples
    }

    pub fn start_time(&self) -> f64 {
        self.samples[0].0
    }

    pub fn end_time(&self) -> f64 {
        self.samples[self.samples.len() - 1].0
    }

    pub fn position_at(&self, t: f64) -> Point {
        let s = &self.samples;
        if t <= s[0].0 {
            return s[0].1;
        }
        // First sample strictly after t.
        let hi = s.partition_point(|(ts, _)| *ts <= t);
        if hi == s.len() {
            return s[s.len() - 1].1;
        }
        let (t0, p0) = s[hi - 1];
        let (t1, p1) = s[hi];
        if t1 == t0 {
            return p1;
        }
        p0.lerp(&p1, (t - t0) / (t1 - t0))
    }
}

/// Minimum distance between two tracks on a shared clock.
///
/// Between consecutive sample times of either track both move linearly, so
/// the minimum over each interval is found in closed form.
pub fn min_separation(a: &TimedTrack, b: &TimedTrack) -> f64 {
    let mut times: Vec<f64> = a
        .samples
        .iter()
        .chain(&b.samples)
        .map(|(t, _)| *t)
        .collect();
    times.sort_by(f64::total_cmp);
    times.dedup();

    let gap = |t: f64| {
        let pa = a.position_at(t);
        let pb = b.position_at(t);
        (pa.x - pb.x, pa.y - pb.y)
    };
    let mut best = f64::INFINITY;
    for (i, &t0) in times.iter().enumerate() {
        let r0 = gap(t0);
        best = best.min(r0.0.hypot(r0.1));
        let Some(&t1) = times.get(i + 1) else { break };
        // Evaluate just before t1 so a jump in either track at t1 is not
        // mistaken for motion across the interval.
        let r1 = gap_before(a, b, t0, t1);
        let v = (r1.0 - r0.0, r1.1 - r0.1);
        let vv = v.0 * v.0 + v.1 * v.1;
        if vv > 0.0 {
            let s = (-(r0.0 * v.0 + r0.1 * v.1) / vv).clamp(0.0, 1.0);
            best = best.min((r0.0 + s * v.0).hypot(r0.1 + s * v.1));
        }
    }
    best
}

fn segment_end(track: &TimedTrack, t0: f64, t1: f64) -> Point {
    let s = &track.samples;
    let hi = s.partition_point(|(ts, _)| *ts <= t0);
    if hi == 0 {
        return s[0].1;
    }
    if hi == s.len() {
        return s[s.len() - 1].1;
    }
    let (ta, pa) = s[hi - 1];
    let (tb, pb) = s[hi];
    if tb == ta {
        return pb;
    }
    pa.lerp(&pb, ((t1 - ta) / (tb - ta)).min(1.0))
}

fn gap_before(a: &TimedTrack, b: &TimedTrack, t0: f64, t1: f64) -> (f64, f64) {
    let pa = segment_end(a, t0, t1);
    let pb = segment_end(b, t0, t1);
    (pa.x - pb.x, pa.y - pb.y)
}

/// Smallest robot-person distance while the robot follows `path` at
/// `speed` from time zero and the person replays `trajectory`.
pub fn path_clearance(path: &Path, trajectory: &TimedTrack, speed: f64) -> Result<f64> {
    if path.poses.is_empty() {
        return Err(Error::InvalidConfig("path is empty".into()));
    }
    let robot = TimedTrack::from_poses(&path.poses, speed)?;
    Ok(min_separation(&robot, trajectory))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn track(v: &[(f64, f64, f64)]) -> TimedTrack {
        TimedTrack::new(v.iter().map(|&(t, x, y)| (t, Point::new(x, y))).collect()).unwrap()
    }

    /// Dense time sampling, used as the reference.
    fn sampled_min(a: &TimedTrack, b: &TimedTrack) -> f64 {
        let t0 = a.start_time().min(b.start_time());
        let t1 = a.end_time().max(b.end_time());
        let n = 20_000;
        (0..=n)
            .map(|i| {
                let t = t0 + (t1 - t0) * i as f64 / n as f64;
                a.position_at(t).distance(&b.position_at(t))
            })
            .fold(f64::INFINITY, f64::min)
    }

    #[test]
    fn interpolation_and_hold() {
        let tr = track(&[(0.0, 0.0, 0.0), (2.0, 2.0, 0.0)]);
        assert_eq!(tr.position_at(-1.0), Point::new(0.0, 0.0));
        assert_eq!(tr.position_at(1.0), Point::new(1.0, 0.0));
        assert_eq!(tr.position_at(5.0), Point::new(2.0, 0.0));
    }

    #[test]
    fn static_person_far_away() {
        let poses = [Point::new(0.5, 0.5), Point::new(1.0, 1.0), Point::new(1.5, 1.5)];
        let path = Path {
            cells: vec![(0, 0), (1, 1), (2, 2)],
            poses: poses.to_vec(),
            cost: 0.0,
            cost_units: 0,
        };
        let person = track(&[(0.0, 10.0, 10.0)]);
        let d = path_clearance(&path, &person, 1.0).unwrap();
        let nearest = poses.iter().map(|p| p.distance(&Point::new(10.0, 10.0))).fold(f64::INFINITY, f64::min);
        assert!((d - nearest).abs() < 1e-12);
    }

    #[test]
    fn head_on_crossing_meets() {
        let a = track(&[(0.0, 0.0, 0.0), (4.0, 4.0, 0.0)]);
        let b = track(&[(0.0, 2.0, -2.0), (4.0, 2.0, 2.0)]);
        assert!(min_separation(&a, &b) < 1e-12);
    }

    #[test]
    fn rejects_bad_tracks() {
        assert!(TimedTrack::new(vec![]).is_err());
        assert!(TimedTrack::new(vec![(1.0, Point::new(0.0, 0.0)), (0.5, Point::new(0.0, 0.0))]).is_err());
        assert!(TimedTrack::from_poses(&[Point::new(0.0, 0.0)], 0.0).is_err());
    }

    proptest! {
        #[test]
        fn symmetric_and_matches_dense_sampling(
            a in proptest::collection::vec((0.0f64..2.0, -5.0f64..5.0, -5.0f64..5.0), 1..6),
            b in proptest::collection::vec((0.0f64..2.0, -5.0f64..5.0, -5.0f64..5.0), 1..6),
        ) {
            let build = |v: &[(f64, f64, f64)]| {
                let mut t = 0.0;
                track(&v.iter().map(|&(dt, x, y)| { t += dt; (t, x, y) }).collect::<Vec<_>>())
            };
            let (ta, tb) = (build(&a), build(&b));
            let d = min_separation(&ta, &tb);
            prop_assert_eq!(d, min_separation(&tb, &ta));
            let reference = sampled_min(&ta, &tb);
            prop_assert!(d <= reference + 1e-9);
            prop_assert!(reference - d < 2e-2);
        }
    }
}

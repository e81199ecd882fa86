//! Automatic color equalization.
//!
//! Each output pixel is driven by the signed, saturated contrast against a
//! sample of other pixels, weighted by inverse distance:
//!
//! `R(p) = sum_j r(I(p) - I(j)) / d(p, j)` with `r(x) = clamp(s * x, -1, 1)`
//!
//! computed per channel on 0..=255 intensities, then stretched linearly so
//! the smallest `R` maps to 0 and the largest to 255.

use image::RgbImage;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Output for channels whose response is flat.
pub const MID_GRAY: u8 = 128;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AceParams {
    pub slope: f64,
    pub samples: usize,
}

impl Default for AceParams {
    fn default() -> Self {
        AceParams {
            slope: 20.0 / 255.0,
            samples: 512,
        }
    }
}

/// Equalizes `image`. Each pixel compares itself against `sample_count`
/// other pixels drawn from a stream keyed by `(seed, pixel index)`; when
/// that covers the whole image every other pixel is used exactly once.
pub fn ace_equalize(image: &RgbImage, slope: f64, sample_count: usize, seed: u64) -> Result<RgbImage> {
    let (w, h) = image.dimensions();
    let n = (w as usize) * (h as usize);
    if n == 0 {
        return Err(Error::EmptyImage);
    }
    if !(slope > 0.0 && slope.is_finite()) || sample_count == 0 {
        return Err(Error::InvalidInput(format!(
            "ACE needs slope > 0 and at least one sample (slope {slope}, samples {sample_count})"
        )));
    }
    let exact = sample_count >= n - 1;
    let raw = image.as_raw();
    let width = w as usize;

    let response = |p: usize| -> [f64; 3] {
        let mut acc = [0.0; 3];
        let (px, py) = ((p % width) as f64, (p / width) as f64);
        let mut visit = |j: usize| {
            let (jx, jy) = ((j % width) as f64, (j / width) as f64);
            let inv = 1.0 / ((px - jx).powi(2) + (py - jy).powi(2)).sqrt();
            for c in 0..3 {
                let diff = f64::from(raw[3 * p + c]) - f64::from(raw[3 * j + c]);
                acc[c] += (slope * diff).clamp(-1.0, 1.0) * inv;
            }
        };
        if exact {
            (0..n).filter(|&j| j != p).for_each(&mut visit);
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(p as u64);
            for _ in 0..sample_count {
                // Uniform over the n - 1 pixels other than p.
                let j = rng.random_range(0..n - 1);
                visit(if j >= p { j + 1 } else { j });
            }
        }
        acc
    };
    let r: Vec<[f64; 3]> = (0..n).into_par_iter().map(response).collect();

    let mut out = RgbImage::new(w, h);
    for c in 0..3 {
        let (lo, hi) = r
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v[c]), hi.max(v[c])));
        let span = hi - lo;
        for (p, px) in out.pixels_mut().enumerate() {
            px.0[c] = if span > 0.0 {
                (255.0 * (r[p][c] - lo) / span).round() as u8
            } else {
                MID_GRAY
            };
        }
    }
    Ok(out)
}

//! Synthetic stand-in assets: flat-shaded blobs as objects and textured
//! gradients as backgrounds, with anchors on a grid so objects never overlap.

use image::{Rgb, RgbImage, Rgba, RgbaImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::assets::{BackgroundSpec, ObjectLibrary};
use crate::composite::{Anchor, ObjectCutout};

/// Largest side of a demo cutout before scaling.
pub const MAX_CUTOUT_SIDE: u32 = 48;
/// Scale range of every demo anchor.
pub const SCALE_RANGE: (f64, f64) = (0.75, 1.25);

fn blob(rng: &mut impl Rng, color: [u8; 3]) -> RgbaImage {
    let w = rng.random_range(24..=MAX_CUTOUT_SIDE);
    let h = rng.random_range(24..=MAX_CUTOUT_SIDE);
    let margin = rng.random_range(0..4) as f64;
    let (rx, ry) = (w as f64 / 2.0 - margin, h as f64 / 2.0 - margin);
    let rect = rng.random_bool(0.5);
    RgbaImage::from_fn(w, h, |x, y| {
        let dx = (x as f64 + 0.5 - w as f64 / 2.0) / rx;
        let dy = (y as f64 + 0.5 - h as f64 / 2.0) / ry;
        let r = if rect { dx.abs().max(dy.abs()) } else { (dx * dx + dy * dy).sqrt() };
        // Soft one-pixel edge so the alpha threshold matters.
        let edge = ((1.0 - r) * rx.min(ry)).clamp(0.0, 1.0);
        let shade = 1.0 - 0.3 * (dy + 1.0) / 2.0;
        let c = color.map(|v| (f64::from(v) * shade.clamp(0.7, 1.0)) as u8);
        Rgba([c[0], c[1], c[2], (edge * 255.0).round() as u8])
    })
}

/// Objects with `views` views for each of `categories` categories.
pub fn demo_library(categories: usize, views: usize, seed: u64) -> ObjectLibrary {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut cutouts = Vec::new();
    for category in 0..categories {
        // Keep one channel bright so blended pixels never round to black.
        let mut color = [rng.random_range(64..=255u8), rng.random_range(0..=255u8), rng.random_range(0..=255u8)];
        color.rotate_left(category % 3);
        for view in 0..views {
            cutouts.push(ObjectCutout::new(blob(&mut rng, color), category, view).expect("blob has opaque pixels"));
        }
    }
    ObjectLibrary {
        categories: (0..categories).map(|c| format!("object_{c:02}")).collect(),
        cutouts,
    }
}

/// Anchors on the centers of a near-square grid of `count` cells.
pub fn grid_anchors(width: u32, height: u32, count: usize) -> Vec<Anchor> {
    let cols = (count as f64).sqrt().ceil() as usize;
    let rows = count.div_ceil(cols);
    let (cw, ch) = (f64::from(width) / cols as f64, f64::from(height) / rows as f64);
    (0..count)
        .map(|k| Anchor {
            cx: (k % cols) as f64 * cw + cw / 2.0,
            cy: (k / cols) as f64 * ch + ch / 2.0,
            scale_min: SCALE_RANGE.0,
            scale_max: SCALE_RANGE.1,
        })
        .collect()
}

pub fn demo_backgrounds(count: usize, anchors: usize, width: u32, height: u32, seed: u64) -> Vec<BackgroundSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x005e_edb6);
    (0..count)
        .map(|b| {
            let base: [f64; 3] = [rng.random_range(40.0..200.0), rng.random_range(40.0..200.0), rng.random_range(40.0..200.0)];
            let tilt = rng.random_range(-0.3..0.3);
            let image = RgbImage::from_fn(width, height, |x, y| {
                let g = (f64::from(x) * tilt + f64::from(y) * 0.2) / f64::from(width.max(1)) * 60.0;
                let n = rng.random_range(-12.0..12.0);
                Rgb(base.map(|v| (v + g + n).clamp(0.0, 255.0) as u8))
            });
            BackgroundSpec {
                name: format!("background_{b:03}.png"),
                image,
                anchors: grid_anchors(width, height, anchors),
            }
        })
        .collect()
}

//! Pasting object cutouts onto backgrounds.

use image::imageops::{self, FilterType};
use image::{GrayImage, Luma, RgbImage, RgbaImage};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Alpha at or above which a pixel counts as part of the object.
pub const ALPHA_THRESHOLD: u8 = 8;

/// One rendered view of an object, already cut out of its surroundings.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectCutout {
    pub image: RgbaImage,
    pub category: usize,
    pub view: usize,
}

impl ObjectCutout {
    pub fn new(image: RgbaImage, category: usize, view: usize) -> Result<Self> {
        if !image.pixels().any(|p| p.0[3] > 0) {
            return Err(Error::InvalidInput(format!(
                "cutout for category {category} view {view} is fully transparent"
            )));
        }
        Ok(ObjectCutout { image, category, view })
    }
}

/// Placement slot on a background, in pixels.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub cx: f64,
    pub cy: f64,
    pub scale_min: f64,
    pub scale_max: f64,
}

impl Anchor {
    pub fn at(cx: f64, cy: f64, scale: f64) -> Self {
        Anchor {
            cx,
            cy,
            scale_min: scale,
            scale_max: scale,
        }
    }

    pub fn validate(&self, width: u32, height: u32) -> Result<()> {
        let inside = self.cx >= 0.0 && self.cy >= 0.0 && self.cx <= f64::from(width) && self.cy <= f64::from(height);
        if !inside {
            return Err(Error::InvalidInput(format!(
                "anchor ({}, {}) outside a {width}x{height} background",
                self.cx, self.cy
            )));
        }
        if !(self.scale_min > 0.0 && self.scale_min <= self.scale_max && self.scale_max.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "anchor scale range [{}, {}] is invalid",
                self.scale_min, self.scale_max
            )));
        }
        Ok(())
    }

    pub fn draw_scale(&self, rng: &mut impl Rng) -> f64 {
        if self.scale_max > self.scale_min {
            rng.random_range(self.scale_min..=self.scale_max)
        } else {
            self.scale_min
        }
    }
}

/// Axis-aligned pixel box: top-left corner plus size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PixelBox {
    pub x: u32,
    pub y: u32,
    pub w: u32,
    pub h: u32,
}

impl PixelBox {
    pub fn new(x: u32, y: u32, w: u32, h: u32) -> Self {
        PixelBox { x, y, w, h }
    }

    pub fn area(&self) -> u64 {
        u64::from(self.w) * u64::from(self.h)
    }

    pub fn contains(&self, x: u32, y: u32) -> bool {
        x >= self.x && y >= self.y && x < self.x + self.w && y < self.y + self.h
    }
}

/// Size of a cutout after scaling; never below one pixel.
pub fn scaled_size(width: u32, height: u32, scale: f64) -> (u32, u32) {
    let s = |v: u32| ((f64::from(v) * scale).round() as u32).max(1);
    (s(width), s(height))
}

pub fn scale_cutout(image: &RgbaImage, scale: f64) -> RgbaImage {
    let (w, h) = scaled_size(image.width(), image.height(), scale);
    if (w, h) == image.dimensions() {
        image.clone()
    } else {
        imageops::resize(image, w, h, FilterType::Triangle)
    }
}

/// Tight box around pixels with alpha at or above `threshold`.
pub fn alpha_extent(image: &RgbaImage, threshold: u8) -> Option<PixelBox> {
    let (mut x0, mut y0, mut x1, mut y1) = (u32::MAX, u32::MAX, 0, 0);
    for (x, y, p) in image.enumerate_pixels() {
        if p.0[3] >= threshold {
            x0 = x0.min(x);
            y0 = y0.min(y);
            x1 = x1.max(x);
            y1 = y1.max(y);
        }
    }
    (x0 != u32::MAX).then(|| PixelBox::new(x0, y0, x1 - x0 + 1, y1 - y0 + 1))
}

/// Top-left corner that centers a `w`x`h` patch on `(cx, cy)`, if the patch
/// then lies fully inside the background.
pub fn centered_origin(bg_w: u32, bg_h: u32, w: u32, h: u32, cx: f64, cy: f64) -> Option<(u32, u32)> {
    let x0 = (cx - f64::from(w) / 2.0).round();
    let y0 = (cy - f64::from(h) / 2.0).round();
    let fits = x0 >= 0.0 && y0 >= 0.0 && x0 + f64::from(w) <= f64::from(bg_w) && y0 + f64::from(h) <= f64::from(bg_h);
    fits.then_some((x0 as u32, y0 as u32))
}

/// An object pasted into a background.
#[derive(Clone, Debug, PartialEq)]
pub struct Placement {
    pub category: usize,
    pub view: usize,
    pub scale: f64,
    /// Extent of the object's mask in background pixels.
    pub bbox: PixelBox,
    /// Object mask (255 where alpha >= threshold) covering `bbox`.
    pub mask: GrayImage,
}

/// Alpha-blends an already scaled cutout centered on `(cx, cy)` in place.
/// Returns `None` and leaves the background untouched when it does not fit.
pub fn paste(
    background: &mut RgbImage,
    scaled: &RgbaImage,
    cx: f64,
    cy: f64,
    threshold: u8,
) -> Option<(PixelBox, GrayImage)> {
    let (w, h) = scaled.dimensions();
    let (x0, y0) = centered_origin(background.width(), background.height(), w, h, cx, cy)?;
    let extent = alpha_extent(scaled, threshold)?;
    for (x, y, src) in scaled.enumerate_pixels() {
        let a = u32::from(src.0[3]);
        if a == 0 {
            continue;
        }
        let dst = background.get_pixel_mut(x0 + x, y0 + y);
        for c in 0..3 {
            let v = (a * u32::from(src.0[c]) + (255 - a) * u32::from(dst.0[c]) + 127) / 255;
            dst.0[c] = v as u8;
        }
    }
    let mask = GrayImage::from_fn(extent.w, extent.h, |x, y| {
        let a = scaled.get_pixel(extent.x + x, extent.y + y).0[3];
        Luma([if a >= threshold { 255 } else { 0 }])
    });
    let bbox = PixelBox::new(x0 + extent.x, y0 + extent.y, extent.w, extent.h);
    Some((bbox, mask))
}

/// Composites `cutout` at `anchor` with a scale drawn from the anchor's range.
///
/// Returns `Ok(None)` when the drawn scale does not fit (the caller may
/// redraw), and an error when even the anchor's minimum scale is larger
/// than the whole background.
pub fn composite_object(
    background: &RgbImage,
    cutout: &ObjectCutout,
    anchor: &Anchor,
    rng: &mut impl Rng,
) -> Result<Option<(RgbImage, Placement)>> {
    let (bw, bh) = background.dimensions();
    let (mw, mh) = scaled_size(cutout.image.width(), cutout.image.height(), anchor.scale_min);
    if mw > bw || mh > bh {
        return Err(Error::CutoutTooLarge {
            background: String::new(),
            cutout_w: mw,
            cutout_h: mh,
            scale: anchor.scale_min,
            width: bw,
            height: bh,
        });
    }
    let scale = anchor.draw_scale(rng);
    let scaled = scale_cutout(&cutout.image, scale);
    let mut out = background.clone();
    Ok(
        paste(&mut out, &scaled, anchor.cx, anchor.cy, ALPHA_THRESHOLD).map(|(bbox, mask)| {
            (
                out,
                Placement {
                    category: cutout.category,
                    view: cutout.view,
                    scale,
                    bbox,
                    mask,
                },
            )
        }),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use image::Rgba;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn opaque(w: u32, h: u32, margin: u32) -> ObjectCutout {
        let img = RgbaImage::from_fn(w, h, |x, y| {
            let inside = x >= margin && y >= margin && x < w - margin && y < h - margin;
            Rgba(if inside { [200, 30, 30, 255] } else { [0, 0, 0, 0] })
        });
        ObjectCutout::new(img, 0, 0).unwrap()
    }

    #[test]
    fn centered_placement() {
        let bg = RgbImage::new(640, 480);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (_, p) = composite_object(&bg, &opaque(100, 80, 0), &Anchor::at(320.0, 240.0, 1.0), &mut rng)
            .unwrap()
            .unwrap();
        assert_eq!(p.bbox, PixelBox::new(270, 200, 100, 80));
    }

    #[test]
    fn transparent_margin_is_trimmed() {
        let bg = RgbImage::new(640, 480);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let (img, p) = composite_object(&bg, &opaque(100, 80, 10), &Anchor::at(320.0, 240.0, 1.0), &mut rng)
            .unwrap()
            .unwrap();
        assert_eq!(p.bbox, PixelBox::new(280, 210, 80, 60));
        assert_eq!(img.get_pixel(280, 210).0, [200, 30, 30]);
        assert_eq!(img.get_pixel(279, 210).0, [0, 0, 0]);
    }

    #[test]
    fn out_of_bounds_anchor_does_not_fit() {
        let bg = RgbImage::new(200, 200);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = composite_object(&bg, &opaque(100, 80, 0), &Anchor::at(10.0, 100.0, 1.0), &mut rng).unwrap();
        assert!(r.is_none());
    }

    #[test]
    fn oversized_cutout_is_an_error() {
        let bg = RgbImage::new(50, 50);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let r = composite_object(&bg, &opaque(100, 80, 0), &Anchor::at(25.0, 25.0, 1.0), &mut rng);
        assert!(matches!(r, Err(Error::CutoutTooLarge { .. })));
    }

    #[test]
    fn half_transparent_blend() {
        let mut bg = RgbImage::from_pixel(4, 4, image::Rgb([0, 0, 0]));
        let cut = RgbaImage::from_pixel(2, 2, Rgba([255, 255, 255, 128]));
        let (bbox, mask) = paste(&mut bg, &cut, 2.0, 2.0, ALPHA_THRESHOLD).unwrap();
        assert_eq!(bbox, PixelBox::new(1, 1, 2, 2));
        assert!(mask.pixels().all(|p| p.0[0] == 255));
        assert_eq!(bg.get_pixel(1, 1).0, [128, 128, 128]);
    }

    #[test]
    fn faint_alpha_is_outside_the_extent() {
        let mut img = RgbaImage::from_pixel(5, 5, Rgba([9, 9, 9, 7]));
        img.put_pixel(2, 3, Rgba([9, 9, 9, 8]));
        assert_eq!(alpha_extent(&img, ALPHA_THRESHOLD), Some(PixelBox::new(2, 3, 1, 1)));
        assert!(ObjectCutout::new(RgbaImage::new(3, 3), 0, 0).is_err());
    }
}

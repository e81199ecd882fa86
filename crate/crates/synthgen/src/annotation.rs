//! Normalized `<category> <cx> <cy> <w> <h>` label lines.

use serde::{Deserialize, Serialize};

use crate::composite::PixelBox;
use crate::error::{Error, Result};

/// Slack for values printed with six decimals.
pub const FORMAT_TOLERANCE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub category: usize,
    pub cx: f64,
    pub cy: f64,
    pub w: f64,
    pub h: f64,
}

impl AnnotationRecord {
    pub fn from_box(bbox: &PixelBox, category: usize, width: u32, height: u32) -> Result<Self> {
        if bbox.w == 0 || bbox.h == 0 {
            return Err(Error::DegenerateBox {
                x: bbox.x,
                y: bbox.y,
                w: bbox.w,
                h: bbox.h,
            });
        }
        if u64::from(bbox.x) + u64::from(bbox.w) > u64::from(width)
            || u64::from(bbox.y) + u64::from(bbox.h) > u64::from(height)
        {
            return Err(Error::BoxOutOfImage {
                x: bbox.x,
                y: bbox.y,
                w: bbox.w,
                h: bbox.h,
                width,
                height,
            });
        }
        let (iw, ih) = (f64::from(width), f64::from(height));
        Ok(AnnotationRecord {
            category,
            cx: (f64::from(bbox.x) + f64::from(bbox.w) / 2.0) / iw,
            cy: (f64::from(bbox.y) + f64::from(bbox.h) / 2.0) / ih,
            w: f64::from(bbox.w) / iw,
            h: f64::from(bbox.h) / ih,
        })
    }

    /// Positive size and the whole box inside the unit square, up to the
    /// rounding of the text format.
    pub fn is_in_bounds(&self) -> bool {
        let t = FORMAT_TOLERANCE;
        let finite = [self.cx, self.cy, self.w, self.h].iter().all(|v| v.is_finite());
        finite
            && self.w > 0.0
            && self.h > 0.0
            && self.cx - self.w / 2.0 >= -t
            && self.cy - self.h / 2.0 >= -t
            && self.cx + self.w / 2.0 <= 1.0 + t
            && self.cy + self.h / 2.0 <= 1.0 + t
    }

    pub fn to_line(&self) -> String {
        format!(
            "{} {:.6} {:.6} {:.6} {:.6}\n",
            self.category, self.cx, self.cy, self.w, self.h
        )
    }

    /// Parses one line; the error message says what is wrong with it.
    pub fn parse(line: &str) -> std::result::Result<Self, String> {
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 5 {
            return Err(format!("expected 5 fields, found {}", fields.len()));
        }
        let category = fields[0]
            .parse::<usize>()
            .map_err(|_| format!("bad category '{}'", fields[0]))?;
        let mut v = [0.0; 4];
        for (slot, text) in v.iter_mut().zip(&fields[1..]) {
            *slot = text.parse::<f64>().map_err(|_| format!("bad number '{text}'"))?;
        }
        Ok(AnnotationRecord {
            category,
            cx: v[0],
            cy: v[1],
            w: v[2],
            h: v[3],
        })
    }
}

/// Formats a pixel box as a newline-terminated annotation line.
pub fn serialize_annotation(bbox: &PixelBox, category: usize, width: u32, height: u32) -> Result<String> {
    Ok(AnnotationRecord::from_box(bbox, category, width, height)?.to_line())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn normalization_examples() {
        assert_eq!(
            serialize_annotation(&PixelBox::new(270, 200, 100, 80), 3, 640, 480).unwrap(),
            "3 0.500000 0.500000 0.156250 0.166667\n"
        );
        assert_eq!(
            serialize_annotation(&PixelBox::new(0, 0, 640, 480), 0, 640, 480).unwrap(),
            "0 0.500000 0.500000 1.000000 1.000000\n"
        );
    }

    #[test]
    fn degenerate_and_outside_boxes_rejected() {
        assert!(matches!(
            serialize_annotation(&PixelBox::new(10, 10, 0, 5), 1, 640, 480),
            Err(Error::DegenerateBox { .. })
        ));
        assert!(matches!(
            serialize_annotation(&PixelBox::new(600, 10, 50, 5), 1, 640, 480),
            Err(Error::BoxOutOfImage { .. })
        ));
    }

    #[test]
    fn parse_errors_are_descriptive() {
        assert!(AnnotationRecord::parse("1 0.5 0.5").unwrap_err().contains("5 fields"));
        assert!(AnnotationRecord::parse("x 0.5 0.5 0.1 0.1").unwrap_err().contains("category"));
        let far = AnnotationRecord::parse("0 1.2 0.5 0.1 0.1").unwrap();
        assert!(!far.is_in_bounds());
    }

    proptest! {
        #[test]
        fn any_box_inside_the_image_round_trips_in_bounds(
            width in 1u32..2000, height in 1u32..2000,
            fx in 0.0..1.0f64, fy in 0.0..1.0f64, fw in 0.0..1.0f64, fh in 0.0..1.0f64,
            category in 0usize..100,
        ) {
            let x = ((fx * f64::from(width)) as u32).min(width - 1);
            let y = ((fy * f64::from(height)) as u32).min(height - 1);
            let w = ((fw * f64::from(width - x)) as u32).max(1);
            let h = ((fh * f64::from(height - y)) as u32).max(1);
            let line = serialize_annotation(&PixelBox::new(x, y, w, h), category, width, height).unwrap();
            prop_assert!(line.ends_with('\n'));
            let rec = AnnotationRecord::parse(&line).unwrap();
            prop_assert_eq!(rec.category, category);
            prop_assert!(rec.is_in_bounds());
        }
    }
}

//! Work estimates for a dataset before generating it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanRequest {
    pub categories: usize,
    pub backgrounds: usize,
    pub anchors_min: usize,
    pub anchors_max: usize,
    pub images: usize,
    pub workers: usize,
    pub width: u32,
    pub height: u32,
    pub ace_samples: usize,
    /// Assumed generation rate of one worker.
    pub images_per_second_per_worker: f64,
}

impl PlanRequest {
    /// 15 object classes on 306 backgrounds with 20 to 25 anchors each,
    /// 400,000 images on six workers at roughly 440 images/s overall.
    pub fn full_scale() -> Self {
        PlanRequest {
            categories: 15,
            backgrounds: 306,
            anchors_min: 20,
            anchors_max: 25,
            images: 400_000,
            workers: 6,
            width: 416,
            height: 416,
            ace_samples: 512,
            images_per_second_per_worker: 440.0 / 6.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorkPlan {
    pub images: usize,
    pub images_per_worker: usize,
    /// Expected annotation lines with every anchor filled.
    pub objects_expected: u64,
    /// Expected lines per category under uniform category draws.
    pub objects_per_category: f64,
    /// Images drawn per background on average.
    pub images_per_background: f64,
    /// Pixel comparisons for equalizing all backgrounds once.
    pub ace_comparisons: u64,
    /// Uncompressed RGB bytes across all images.
    pub raw_bytes: u64,
    pub estimated_seconds: f64,
}

pub fn plan_dataset(req: &PlanRequest) -> Result<WorkPlan> {
    let bad = |m: &str| Err(Error::InvalidInput(m.into()));
    if req.categories == 0 || req.backgrounds == 0 || req.images == 0 || req.workers == 0 {
        return bad("categories, backgrounds, images and workers must all be at least 1");
    }
    if req.anchors_min == 0 || req.anchors_min > req.anchors_max {
        return bad("anchor range must satisfy 1 <= min <= max");
    }
    if req.width == 0 || req.height == 0 || req.ace_samples == 0 {
        return bad("image size and ACE sample count must be positive");
    }
    if !(req.images_per_second_per_worker > 0.0 && req.images_per_second_per_worker.is_finite()) {
        return bad("per-worker rate must be positive");
    }
    let mean_anchors = (req.anchors_min + req.anchors_max) as f64 / 2.0;
    let objects = (req.images as f64 * mean_anchors).round() as u64;
    let pixels = u64::from(req.width) * u64::from(req.height);
    Ok(WorkPlan {
        images: req.images,
        images_per_worker: req.images.div_ceil(req.workers),
        objects_expected: objects,
        objects_per_category: objects as f64 / req.categories as f64,
        images_per_background: req.images as f64 / req.backgrounds as f64,
        ace_comparisons: req.backgrounds as u64 * pixels * req.ace_samples as u64,
        raw_bytes: req.images as u64 * pixels * 3,
        estimated_seconds: req.images as f64 / (req.images_per_second_per_worker * req.workers as f64),
    })
}

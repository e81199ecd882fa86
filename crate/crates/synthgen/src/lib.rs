//! Training-image and annotation generator for object detectors.
//!
//! Backgrounds are color-equalized once, then every image index draws a
//! background and fills each of its anchors with a scaled object cutout.
//! Each pasted object yields one normalized label line. All randomness is
//! keyed by `(seed, image index)`, so the bytes written do not depend on
//! how many worker threads run.

pub mod ace;
pub mod annotation;
pub mod assets;
pub mod composite;
pub mod dataset;
pub mod demo;
pub mod error;
pub mod plan;

pub use ace::{ace_equalize, AceParams};
pub use annotation::{serialize_annotation, AnnotationRecord};
pub use assets::{load_backgrounds, load_objects, save_assets, BackgroundSpec, ObjectLibrary};
pub use composite::{composite_object, Anchor, ObjectCutout, PixelBox, Placement, ALPHA_THRESHOLD};
pub use dataset::{
    generate_dataset, verify_dataset, DatasetManifest, GenerateConfig, Generator, RenderedImage, VerifyReport,
    Violation,
};
pub use error::{Error, Result};
pub use plan::{plan_dataset, PlanRequest, WorkPlan};

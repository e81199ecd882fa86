//! Parallel, seed-deterministic dataset generation and verification.

use std::collections::BTreeSet;
use std::fs;
use std::io::Read;
use std::path::Path;

use image::codecs::png::{CompressionType, FilterType, PngEncoder};
use image::{ImageEncoder, RgbImage};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::ace::{ace_equalize, AceParams};
use crate::annotation::AnnotationRecord;
use crate::assets::{BackgroundSpec, ObjectLibrary};
use crate::composite::{centered_origin, paste, scale_cutout, scaled_size, ObjectCutout, Placement, ALPHA_THRESHOLD};
use crate::error::{Error, Result};

pub const MANIFEST: &str = "manifest.json";
pub const IMAGES_DIR: &str = "images";
pub const LABELS_DIR: &str = "labels";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerateConfig {
    pub count: usize,
    pub seed: u64,
    /// Worker threads. Output bytes do not depend on this.
    pub workers: usize,
    pub ace: AceParams,
    /// Equalize backgrounds before placement; off for pre-equalized inputs.
    pub equalize: bool,
    pub alpha_threshold: u8,
    /// Extra draws for an anchor whose first cutout does not fit.
    pub max_redraws: usize,
    /// Allowed anchor count per background, inclusive.
    pub anchor_limits: (usize, usize),
}

impl Default for GenerateConfig {
    fn default() -> Self {
        GenerateConfig {
            count: 1,
            seed: 0,
            workers: 1,
            ace: AceParams::default(),
            equalize: true,
            alpha_threshold: ALPHA_THRESHOLD,
            max_redraws: 10,
            anchor_limits: (1, 64),
        }
    }
}

/// Generation settings that shape the output, recorded in the manifest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GenerationParameters {
    pub ace_slope: f64,
    pub ace_samples: usize,
    pub equalize: bool,
    pub alpha_threshold: u8,
    pub max_redraws: usize,
    pub anchor_limits: (usize, usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnchorStats {
    pub min: usize,
    pub max: usize,
    pub mean: f64,
    pub total: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetManifest {
    pub seed: u64,
    pub categories: Vec<String>,
    pub category_count: usize,
    pub background_count: usize,
    pub anchors: AnchorStats,
    pub images_requested: usize,
    pub images_produced: usize,
    pub objects_placed: usize,
    pub anchors_skipped: usize,
    /// Annotation lines per category.
    pub category_histogram: Vec<usize>,
    pub parameters: GenerationParameters,
    /// SHA-256 over every image and label file, see [`dataset_digest`].
    pub digest: String,
}

/// One generated image before it is written.
#[derive(Clone, Debug, PartialEq)]
pub struct RenderedImage {
    pub index: usize,
    pub background: usize,
    pub image: RgbImage,
    pub placements: Vec<Placement>,
    pub skipped: usize,
}

impl RenderedImage {
    pub fn label_text(&self) -> Result<String> {
        let (w, h) = self.image.dimensions();
        self.placements
            .iter()
            .map(|p| Ok(AnnotationRecord::from_box(&p.bbox, p.category, w, h)?.to_line()))
            .collect()
    }
}

fn mix(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Random stream of image `index`.
pub fn image_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// Equalized backgrounds and cutouts grouped by category, ready to render.
pub struct Generator {
    config: GenerateConfig,
    categories: Vec<String>,
    backgrounds: Vec<BackgroundSpec>,
    by_category: Vec<Vec<ObjectCutout>>,
}

impl Generator {
    /// Validates the inputs and equalizes the backgrounds. Runs on the
    /// current rayon pool.
    pub fn new(library: &ObjectLibrary, backgrounds: &[BackgroundSpec], config: GenerateConfig) -> Result<Self> {
        if config.count == 0 {
            return Err(Error::InvalidInput("image count must be at least 1".into()));
        }
        if config.workers == 0 {
            return Err(Error::InvalidInput("need at least one worker".into()));
        }
        if backgrounds.is_empty() || library.cutouts.is_empty() {
            return Err(Error::InvalidInput("need at least one cutout and one background".into()));
        }
        let mut by_category: Vec<Vec<ObjectCutout>> = vec![Vec::new(); library.categories.len()];
        for c in &library.cutouts {
            by_category
                .get_mut(c.category)
                .ok_or_else(|| {
                    Error::InvalidInput(format!(
                        "cutout category {} but only {} categories",
                        c.category,
                        library.categories.len()
                    ))
                })?
                .push(c.clone());
        }
        if let Some(empty) = by_category.iter().position(Vec::is_empty) {
            return Err(Error::InvalidInput(format!(
                "category '{}' has no cutouts",
                library.categories[empty]
            )));
        }
        let (lo, hi) = config.anchor_limits;
        for bg in backgrounds {
            bg.validate()?;
            let n = bg.anchors.len();
            if n < lo || n > hi {
                return Err(Error::InvalidInput(format!(
                    "background '{}' has {n} anchors, allowed {lo}..={hi}",
                    bg.name
                )));
            }
            check_placeable(bg, &library.cutouts)?;
        }

        let backgrounds = if config.equalize {
            backgrounds
                .iter()
                .enumerate()
                .map(|(i, bg)| {
                    let seed = mix(config.seed ^ mix(i as u64 + 1));
                    Ok(BackgroundSpec {
                        image: ace_equalize(&bg.image, config.ace.slope, config.ace.samples, seed)?,
                        ..bg.clone()
                    })
                })
                .collect::<Result<Vec<_>>>()?
        } else {
            backgrounds.to_vec()
        };
        Ok(Generator {
            config,
            categories: library.categories.clone(),
            backgrounds,
            by_category,
        })
    }

    pub fn backgrounds(&self) -> &[BackgroundSpec] {
        &self.backgrounds
    }

    /// Draws the background, then fills each anchor in order: category,
    /// view and scale come from the image's own stream.
    pub fn render(&self, index: usize) -> RenderedImage {
        let mut rng = image_rng(self.config.seed, index);
        let background = rng.random_range(0..self.backgrounds.len());
        let bg = &self.backgrounds[background];
        let mut image = bg.image.clone();
        let mut placements = Vec::with_capacity(bg.anchors.len());
        let mut skipped = 0;
        for (k, anchor) in bg.anchors.iter().enumerate() {
            let mut placed = false;
            for _ in 0..=self.config.max_redraws {
                let views = &self.by_category[rng.random_range(0..self.by_category.len())];
                let cutout = &views[rng.random_range(0..views.len())];
                let scale = anchor.draw_scale(&mut rng);
                let scaled = scale_cutout(&cutout.image, scale);
                if let Some((bbox, mask)) = paste(&mut image, &scaled, anchor.cx, anchor.cy, self.config.alpha_threshold) {
                    placements.push(Placement {
                        category: cutout.category,
                        view: cutout.view,
                        scale,
                        bbox,
                        mask,
                    });
                    placed = true;
                    break;
                }
            }
            if !placed {
                log::warn!(
                    "image {index}: anchor {k} of '{}' skipped after {} redraws",
                    bg.name,
                    self.config.max_redraws
                );
                skipped += 1;
            }
        }
        RenderedImage {
            index,
            background,
            image,
            placements,
            skipped,
        }
    }
}

/// Errors if some cutout at the smallest anchor scale exceeds the
/// background, or if no cutout fits any anchor even at that scale.
fn check_placeable(bg: &BackgroundSpec, cutouts: &[ObjectCutout]) -> Result<()> {
    let (bw, bh) = bg.image.dimensions();
    let min_scale = bg.anchors.iter().map(|a| a.scale_min).fold(f64::INFINITY, f64::min);
    for c in cutouts {
        let (w, h) = scaled_size(c.image.width(), c.image.height(), min_scale);
        if w > bw || h > bh {
            return Err(Error::CutoutTooLarge {
                background: bg.name.clone(),
                cutout_w: w,
                cutout_h: h,
                scale: min_scale,
                width: bw,
                height: bh,
            });
        }
    }
    let fits = bg.anchors.iter().any(|a| {
        cutouts.iter().any(|c| {
            let (w, h) = scaled_size(c.image.width(), c.image.height(), a.scale_min);
            centered_origin(bw, bh, w, h, a.cx, a.cy).is_some()
        })
    });
    if fits {
        Ok(())
    } else {
        Err(Error::Unsatisfiable(bg.name.clone()))
    }
}

fn png_bytes(image: &RgbImage, path: &Path) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    PngEncoder::new_with_quality(&mut out, CompressionType::Fast, FilterType::Adaptive)
        .write_image(image.as_raw(), image.width(), image.height(), image::ExtendedColorType::Rgb8)
        .map_err(|e| Error::image(path, e))?;
    Ok(out)
}

pub fn file_stem(index: usize) -> String {
    format!("{index:06}")
}

struct Written {
    categories: Vec<usize>,
    skipped: usize,
}

fn write_one(generator: &Generator, index: usize, out: &Path) -> Result<Written> {
    let rendered = generator.render(index);
    let stem = file_stem(index);
    let image_path = out.join(IMAGES_DIR).join(format!("{stem}.png"));
    let label_path = out.join(LABELS_DIR).join(format!("{stem}.txt"));
    let bytes = png_bytes(&rendered.image, &image_path)?;
    fs::write(&image_path, bytes).map_err(|e| Error::io(&image_path, e))?;
    fs::write(&label_path, rendered.label_text()?).map_err(|e| Error::io(&label_path, e))?;
    Ok(Written {
        categories: rendered.placements.iter().map(|p| p.category).collect(),
        skipped: rendered.skipped,
    })
}

fn anchor_stats(backgrounds: &[BackgroundSpec]) -> AnchorStats {
    let counts: Vec<usize> = backgrounds.iter().map(|b| b.anchors.len()).collect();
    let total: usize = counts.iter().sum();
    AnchorStats {
        min: counts.iter().copied().min().unwrap_or(0),
        max: counts.iter().copied().max().unwrap_or(0),
        mean: total as f64 / counts.len().max(1) as f64,
        total,
    }
}

/// Generates `config.count` images with labels under `out` and writes the
/// manifest. `out` must be missing or empty.
pub fn generate_dataset(
    library: &ObjectLibrary,
    backgrounds: &[BackgroundSpec],
    config: &GenerateConfig,
    out: &Path,
) -> Result<DatasetManifest> {
    if out.exists() {
        let mut entries = fs::read_dir(out).map_err(|e| Error::io(out, e))?;
        if entries.next().is_some() {
            return Err(Error::InvalidInput(format!("output directory {} is not empty", out.display())));
        }
    }
    for sub in [IMAGES_DIR, LABELS_DIR] {
        let dir = out.join(sub);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers.max(1))
        .build()
        .map_err(|e| Error::Pool(e.to_string()))?;

    let (generator, written) = pool.install(|| -> Result<_> {
        let generator = Generator::new(library, backgrounds, config.clone())?;
        let written = (0..config.count)
            .into_par_iter()
            .map(|i| write_one(&generator, i, out))
            .collect::<Result<Vec<_>>>()?;
        Ok((generator, written))
    })?;

    let mut histogram = vec![0; generator.categories.len()];
    for w in &written {
        for &c in &w.categories {
            histogram[c] += 1;
        }
    }
    let manifest = DatasetManifest {
        seed: config.seed,
        categories: generator.categories.clone(),
        category_count: generator.categories.len(),
        background_count: backgrounds.len(),
        anchors: anchor_stats(backgrounds),
        images_requested: config.count,
        images_produced: written.len(),
        objects_placed: histogram.iter().sum(),
        anchors_skipped: written.iter().map(|w| w.skipped).sum(),
        category_histogram: histogram,
        parameters: GenerationParameters {
            ace_slope: config.ace.slope,
            ace_samples: config.ace.samples,
            equalize: config.equalize,
            alpha_threshold: config.alpha_threshold,
            max_redraws: config.max_redraws,
            anchor_limits: config.anchor_limits,
        },
        digest: dataset_digest(out)?,
    };
    let path = out.join(MANIFEST);
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| Error::json(&path, e))? + "\n";
    fs::write(&path, json).map_err(|e| Error::io(&path, e))?;
    Ok(manifest)
}

fn list_files(dir: &Path) -> Result<Vec<String>> {
    if !dir.is_dir() {
        return Ok(Vec::new());
    }
    let mut names = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let entry = entry.map_err(|e| Error::io(dir, e))?;
        if entry.path().is_file() {
            names.push(entry.file_name().to_string_lossy().into_owned());
        }
    }
    names.sort();
    Ok(names)
}

/// SHA-256 over the image and label files in path order; each file adds
/// its relative path, a NUL, its length as little-endian u64 and its bytes.
pub fn dataset_digest(root: &Path) -> Result<String> {
    let mut hasher = Sha256::new();
    for sub in [IMAGES_DIR, LABELS_DIR] {
        for name in list_files(&root.join(sub))? {
            let path = root.join(sub).join(&name);
            let mut bytes = Vec::new();
            fs::File::open(&path)
                .and_then(|mut f| f.read_to_end(&mut bytes))
                .map_err(|e| Error::io(&path, e))?;
            hasher.update(format!("{sub}/{name}").as_bytes());
            hasher.update([0u8]);
            hasher.update((bytes.len() as u64).to_le_bytes());
            hasher.update(&bytes);
        }
    }
    Ok(hex::encode(hasher.finalize()))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub file: String,
    pub line: Option<usize>,
    pub message: String,
}

impl std::fmt::Display for Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.line {
            Some(line) => write!(f, "{}:{}: {}", self.file, line, self.message),
            None => write!(f, "{}: {}", self.file, self.message),
        }
    }
}

/// Outcome of [`verify_dataset`]. Content problems are listed as
/// violations; the digest comparison is reported on its own since any
/// content change also changes it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub images: usize,
    pub labels: usize,
    pub annotations: usize,
    pub violations: Vec<Violation>,
    pub digest_expected: Option<String>,
    pub digest_actual: String,
}

impl VerifyReport {
    pub fn digest_matches(&self) -> bool {
        self.digest_expected.as_deref() == Some(self.digest_actual.as_str())
    }

    pub fn is_clean(&self) -> bool {
        self.violations.is_empty() && self.digest_matches()
    }
}

fn stems(names: &[String], ext: &str) -> BTreeSet<String> {
    names
        .iter()
        .filter_map(|n| n.strip_suffix(ext).map(str::to_owned))
        .collect()
}

/// Checks pairing, label syntax and bounds, counts and the digest.
pub fn verify_dataset(root: &Path) -> Result<VerifyReport> {
    if !root.is_dir() {
        return Err(Error::InvalidInput(format!("{} is not a directory", root.display())));
    }
    let mut violations = Vec::new();
    let mut flag = |file: String, line: Option<usize>, message: String| violations.push(Violation { file, line, message });

    let manifest_path = root.join(MANIFEST);
    let manifest: Option<DatasetManifest> = match fs::read_to_string(&manifest_path) {
        Ok(text) => match serde_json::from_str(&text) {
            Ok(m) => Some(m),
            Err(e) => {
                flag(MANIFEST.into(), None, format!("unreadable manifest: {e}"));
                None
            }
        },
        Err(e) => {
            flag(MANIFEST.into(), None, format!("missing manifest: {e}"));
            None
        }
    };

    let image_names = list_files(&root.join(IMAGES_DIR))?;
    let label_names = list_files(&root.join(LABELS_DIR))?;
    for name in image_names.iter().filter(|n| !n.ends_with(".png")) {
        flag(format!("{IMAGES_DIR}/{name}"), None, "unexpected file".into());
    }
    for name in label_names.iter().filter(|n| !n.ends_with(".txt")) {
        flag(format!("{LABELS_DIR}/{name}"), None, "unexpected file".into());
    }
    let images = stems(&image_names, ".png");
    let labels = stems(&label_names, ".txt");
    for stem in images.difference(&labels) {
        flag(format!("{IMAGES_DIR}/{stem}.png"), None, "image has no label file".into());
    }
    for stem in labels.difference(&images) {
        flag(format!("{LABELS_DIR}/{stem}.txt"), None, "label file has no image".into());
    }

    let category_count = manifest.as_ref().map(|m| m.category_count);
    let mut annotations = 0;
    for stem in &labels {
        let file = format!("{LABELS_DIR}/{stem}.txt");
        let path = root.join(&file);
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        for (i, line) in text.lines().enumerate() {
            let n = i + 1;
            if line.trim().is_empty() {
                flag(file.clone(), Some(n), "empty line".into());
                continue;
            }
            match AnnotationRecord::parse(line) {
                Ok(rec) => {
                    annotations += 1;
                    if !rec.is_in_bounds() {
                        flag(file.clone(), Some(n), format!("box outside the unit square: {}", line.trim()));
                    }
                    if let Some(count) = category_count.filter(|&c| rec.category >= c) {
                        flag(file.clone(), Some(n), format!("category {} >= {count}", rec.category));
                    }
                }
                Err(message) => flag(file.clone(), Some(n), message),
            }
        }
        if !text.is_empty() && !text.ends_with('\n') {
            flag(file.clone(), None, "missing trailing newline".into());
        }
    }
    if let Some(m) = &manifest {
        if images.len() != m.images_produced {
            flag(
                MANIFEST.into(),
                None,
                format!("{} images on disk, manifest says {}", images.len(), m.images_produced),
            );
        }
    }

    Ok(VerifyReport {
        images: images.len(),
        labels: labels.len(),
        annotations,
        violations,
        digest_expected: manifest.map(|m| m.digest),
        digest_actual: dataset_digest(root)?,
    })
}

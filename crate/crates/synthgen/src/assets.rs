//! Loading cutouts, backgrounds and anchor files from disk.
//!
//! Objects live in `<dir>/<category>/<view>.png`; categories are indexed in
//! name order and views in file-name order. The anchors file is a JSON list
//! of `{"file": ..., "anchors": [{"cx", "cy", "scale_min", "scale_max"}]}`
//! entries naming images in the backgrounds directory.

use std::fs;
use std::path::{Path, PathBuf};

use image::RgbImage;
use serde::{Deserialize, Serialize};

use crate::composite::{Anchor, ObjectCutout};
use crate::error::{Error, Result};

/// A background image with its placement slots.
#[derive(Clone, Debug, PartialEq)]
pub struct BackgroundSpec {
    pub name: String,
    pub image: RgbImage,
    pub anchors: Vec<Anchor>,
}

impl BackgroundSpec {
    pub fn validate(&self) -> Result<()> {
        if self.image.width() == 0 || self.image.height() == 0 {
            return Err(Error::InvalidInput(format!("background '{}' is empty", self.name)));
        }
        if self.anchors.is_empty() {
            return Err(Error::InvalidInput(format!("background '{}' has no anchors", self.name)));
        }
        for a in &self.anchors {
            a.validate(self.image.width(), self.image.height())
                .map_err(|e| Error::InvalidInput(format!("background '{}': {e}", self.name)))?;
        }
        Ok(())
    }
}

/// Cutouts grouped by category, as loaded from an objects directory.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectLibrary {
    pub categories: Vec<String>,
    pub cutouts: Vec<ObjectCutout>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct AnchorFileEntry {
    pub file: String,
    pub anchors: Vec<Anchor>,
}

fn sorted_entries(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut entries: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .map(|e| e.map(|e| e.path()).map_err(|err| Error::io(dir, err)))
        .collect::<Result<_>>()?;
    entries.sort();
    Ok(entries)
}

fn is_png(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("png"))
}

pub fn load_objects(dir: &Path) -> Result<ObjectLibrary> {
    let mut categories = Vec::new();
    let mut cutouts = Vec::new();
    for category_dir in sorted_entries(dir)?.into_iter().filter(|p| p.is_dir()) {
        let category = categories.len();
        let views: Vec<PathBuf> = sorted_entries(&category_dir)?.into_iter().filter(|p| is_png(p)).collect();
        if views.is_empty() {
            continue;
        }
        for (view, path) in views.iter().enumerate() {
            let image = image::open(path).map_err(|e| Error::image(path, e))?.into_rgba8();
            cutouts.push(ObjectCutout::new(image, category, view)?);
        }
        categories.push(category_dir.file_name().unwrap_or_default().to_string_lossy().into_owned());
    }
    if cutouts.is_empty() {
        return Err(Error::InvalidInput(format!(
            "no <category>/<view>.png cutouts under {}",
            dir.display()
        )));
    }
    Ok(ObjectLibrary { categories, cutouts })
}

pub fn load_backgrounds(dir: &Path, anchors_file: &Path) -> Result<Vec<BackgroundSpec>> {
    let text = fs::read_to_string(anchors_file).map_err(|e| Error::io(anchors_file, e))?;
    let entries: Vec<AnchorFileEntry> = serde_json::from_str(&text).map_err(|e| Error::json(anchors_file, e))?;
    entries
        .into_iter()
        .map(|entry| {
            let path = dir.join(&entry.file);
            let image = image::open(&path).map_err(|e| Error::image(&path, e))?.into_rgb8();
            let spec = BackgroundSpec {
                name: entry.file,
                image,
                anchors: entry.anchors,
            };
            spec.validate()?;
            Ok(spec)
        })
        .collect()
}

/// Writes a library and backgrounds in the on-disk layout read above.
pub fn save_assets(
    library: &ObjectLibrary,
    backgrounds: &[BackgroundSpec],
    objects_dir: &Path,
    backgrounds_dir: &Path,
    anchors_file: &Path,
) -> Result<()> {
    for c in &library.cutouts {
        let dir = objects_dir.join(&library.categories[c.category]);
        fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let path = dir.join(format!("view_{:03}.png", c.view));
        c.image.save(&path).map_err(|e| Error::image(&path, e))?;
    }
    fs::create_dir_all(backgrounds_dir).map_err(|e| Error::io(backgrounds_dir, e))?;
    let mut entries = Vec::new();
    for bg in backgrounds {
        let path = backgrounds_dir.join(&bg.name);
        bg.image.save(&path).map_err(|e| Error::image(&path, e))?;
        entries.push(AnchorFileEntry {
            file: bg.name.clone(),
            anchors: bg.anchors.clone(),
        });
    }
    let json = serde_json::to_string_pretty(&entries).map_err(|e| Error::json(anchors_file, e))? + "\n";
    fs::write(anchors_file, json).map_err(|e| Error::io(anchors_file, e))
}

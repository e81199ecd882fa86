//! PGM map I/O.
//!
//! Occupancy grids are stored as 8-bit binary PGM (0 occupied, 205 unknown,
//! 254 free) with a YAML sidecar in the usual robot map layout. Potential
//! fields are stored as 16-bit PGM with a JSON sidecar carrying the scale
//! from samples back to potential units. Image row `r` holds grid row `r`.

use std::fs;
use std::path::{Path, PathBuf};

use image::{DynamicImage, ImageFormat};
use serde::{Deserialize, Serialize};

use super::grid::{CellState, GridGeometry, OccupancyGrid};
use super::potential::PotentialField;
use crate::error::{Error, Result};
use crate::geometry::Point;

pub const OCCUPIED: u8 = 0;
pub const UNKNOWN: u8 = 205;
pub const FREE: u8 = 254;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapMeta {
    pub image: String,
    pub resolution: f64,
    pub origin: [f64; 3],
    #[serde(default)]
    pub negate: u8,
    #[serde(default = "default_occupied_thresh")]
    pub occupied_thresh: f64,
    #[serde(default = "default_free_thresh")]
    pub free_thresh: f64,
}

fn default_occupied_thresh() -> f64 {
    0.65
}

fn default_free_thresh() -> f64 {
    0.196
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PotentialMeta {
    pub image: String,
    pub width: usize,
    pub height: usize,
    pub resolution: f64,
    pub origin: [f64; 2],
    /// Potential per sample unit.
    pub scale: f64,
    pub max: f64,
    pub cap: f64,
}

pub fn yaml_sidecar(pgm: &Path) -> PathBuf {
    pgm.with_extension("yaml")
}

pub fn json_sidecar(pgm: &Path) -> PathBuf {
    pgm.with_extension("json")
}

fn file_name(path: &Path) -> String {
    path.file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn encode_state(state: CellState) -> u8 {
    match state {
        CellState::Free => FREE,
        CellState::Occupied => OCCUPIED,
        CellState::Unknown => UNKNOWN,
    }
}

/// Binary PGM body for an occupancy grid.
pub fn occupancy_pgm_bytes(grid: &OccupancyGrid) -> Vec<u8> {
    let g = grid.geometry();
    let mut out = format!("P5\n{} {}\n255\n", g.width, g.height).into_bytes();
    out.extend(grid.cells().iter().map(|s| encode_state(*s)));
    out
}

/// 16-bit binary PGM body plus the scale that maps samples back to
/// potential. The field maximum maps to 65535; an all-zero field has scale 0.
pub fn potential_pgm_bytes(field: &PotentialField) -> (Vec<u8>, f64) {
    let g = field.geometry();
    let max = field.max();
    let scale = if max > 0.0 { max / 65535.0 } else { 0.0 };
    let mut out = format!("P5\n{} {}\n65535\n", g.width, g.height).into_bytes();
    for v in field.values() {
        let s = if scale > 0.0 {
            (v / scale).round().clamp(0.0, 65535.0) as u16
        } else {
            0
        };
        out.extend_from_slice(&s.to_be_bytes());
    }
    (out, scale)
}

pub fn write_occupancy(grid: &OccupancyGrid, pgm: &Path) -> Result<()> {
    write(pgm, &occupancy_pgm_bytes(grid))?;
    let g = grid.geometry();
    let meta = MapMeta {
        image: file_name(pgm),
        resolution: g.resolution,
        origin: [g.origin.x, g.origin.y, 0.0],
        negate: 0,
        occupied_thresh: default_occupied_thresh(),
        free_thresh: default_free_thresh(),
    };
    let yaml = serde_yaml::to_string(&meta).map_err(|e| Error::Format {
        format: "map YAML",
        path: yaml_sidecar(pgm),
        message: e.to_string(),
    })?;
    write(&yaml_sidecar(pgm), yaml.as_bytes())
}

fn decode_pgm(pgm: &Path) -> Result<DynamicImage> {
    let bytes = fs::read(pgm).map_err(|e| Error::io(pgm, e))?;
    image::load_from_memory_with_format(&bytes, ImageFormat::Pnm).map_err(|e| Error::Format {
        format: "PGM",
        path: pgm.to_owned(),
        message: e.to_string(),
    })
}

/// Reads a P2 or P5 map and its YAML sidecar. Samples are classified by
/// occupancy probability `(max - v) / max` against the sidecar thresholds.
pub fn read_occupancy(pgm: &Path) -> Result<OccupancyGrid> {
    let side = yaml_sidecar(pgm);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let meta: MapMeta = serde_yaml::from_str(&text).map_err(|e| Error::Format {
        format: "map YAML",
        path: side.clone(),
        message: e.to_string(),
    })?;

    let img = decode_pgm(pgm)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    let (samples, maxval): (Vec<f64>, f64) = match img {
        DynamicImage::ImageLuma8(b) => (b.into_raw().into_iter().map(f64::from).collect(), 255.0),
        DynamicImage::ImageLuma16(b) => (b.into_raw().into_iter().map(f64::from).collect(), 65535.0),
        other => {
            return Err(Error::Format {
                format: "PGM",
                path: pgm.to_owned(),
                message: format!("expected a grayscale map, got {:?}", other.color()),
            })
        }
    };
    let cells = samples
        .into_iter()
        .map(|v| {
            let v = if meta.negate != 0 { maxval - v } else { v };
            let occ = (maxval - v) / maxval;
            if occ > meta.occupied_thresh {
                CellState::Occupied
            } else if occ < meta.free_thresh {
                CellState::Free
            } else {
                CellState::Unknown
            }
        })
        .collect();
    let geometry = GridGeometry::new(w, h, meta.resolution, Point::new(meta.origin[0], meta.origin[1]))?;
    OccupancyGrid::from_cells(geometry, cells)
}

pub fn write_potential(field: &PotentialField, pgm: &Path) -> Result<PotentialMeta> {
    let (bytes, scale) = potential_pgm_bytes(field);
    write(pgm, &bytes)?;
    let g = field.geometry();
    let meta = PotentialMeta {
        image: file_name(pgm),
        width: g.width,
        height: g.height,
        resolution: g.resolution,
        origin: [g.origin.x, g.origin.y],
        scale,
        max: field.max(),
        cap: field.cap(),
    };
    let json = serde_json::to_string_pretty(&meta)? + "\n";
    write(&json_sidecar(pgm), json.as_bytes())?;
    Ok(meta)
}

/// Reads a potential field back; values are quantized to `scale`.
pub fn read_potential(pgm: &Path) -> Result<PotentialField> {
    let side = json_sidecar(pgm);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let meta: PotentialMeta = serde_json::from_str(&text)?;
    let img = decode_pgm(pgm)?.into_luma16();
    let geometry = GridGeometry::new(
        img.width() as usize,
        img.height() as usize,
        meta.resolution,
        Point::new(meta.origin[0], meta.origin[1]),
    )?;
    let values = img
        .into_raw()
        .into_iter()
        .map(|s| (f64::from(s) * meta.scale).min(meta.cap))
        .collect();
    PotentialField::from_values(geometry, meta.cap, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_by_two() -> OccupancyGrid {
        let g = GridGeometry::new(2, 2, 0.25, Point::new(-1.0, 2.0)).unwrap();
        OccupancyGrid::from_cells(
            g,
            vec![CellState::Free, CellState::Occupied, CellState::Unknown, CellState::Free],
        )
        .unwrap()
    }

    #[test]
    fn encoding_table() {
        let bytes = occupancy_pgm_bytes(&two_by_two());
        let header = b"P5\n2 2\n255\n";
        assert_eq!(&bytes[..header.len()], header);
        assert_eq!(&bytes[header.len()..], &[254, 0, 205, 254]);
    }

    #[test]
    fn occupancy_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.pgm");
        let grid = two_by_two();
        write_occupancy(&grid, &path).unwrap();
        assert_eq!(read_occupancy(&path).unwrap(), grid);
    }

    #[test]
    fn reads_ascii_pgm() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("map.pgm");
        fs::write(&path, "P2\n# hand made\n3 1\n255\n254 0 205\n").unwrap();
        fs::write(yaml_sidecar(&path), "image: map.pgm\nresolution: 0.5\norigin: [0.0, 0.0, 0.0]\n").unwrap();
        let grid = read_occupancy(&path).unwrap();
        assert_eq!(grid.cells(), &[CellState::Free, CellState::Occupied, CellState::Unknown]);
        assert_eq!(grid.geometry().resolution, 0.5);
    }

    #[test]
    fn potential_scaling() {
        let g = GridGeometry::new(3, 1, 0.25, Point::new(0.0, 0.0)).unwrap();
        let field = PotentialField::from_values(g, 5.0, vec![0.0, 2.5, 5.0]).unwrap();
        let (bytes, scale) = potential_pgm_bytes(&field);
        assert_eq!(scale, 5.0 / 65535.0);
        let header = b"P5\n3 1\n65535\n";
        let body = &bytes[header.len()..];
        let samples: Vec<u16> = body.chunks(2).map(|c| u16::from_be_bytes([c[0], c[1]])).collect();
        assert_eq!(samples, vec![0, 32768, 65535]);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("potential.pgm");
        write_potential(&field, &path).unwrap();
        let back = read_potential(&path).unwrap();
        for (a, b) in back.values().iter().zip(field.values()) {
            assert!((a - b).abs() <= scale);
        }
    }
}

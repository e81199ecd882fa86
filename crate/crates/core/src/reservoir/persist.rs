use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{EsnConfig, ReadoutWeights};
use crate::error::{Error, Result};

/// JSON sidecar stored next to a readout matrix. Together with the seed it
/// is enough to rebuild the reservoir and reload the readout exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutMeta {
    pub rows: usize,
    pub cols: usize,
    pub seed: u64,
    pub input_dim: usize,
    pub esn: EsnConfig,
}

fn sidecar_path(csv_path: &Path) -> PathBuf {
    csv_path.with_extension("json")
}

/// Writes the matrix as headerless CSV (one row per output) and the
/// metadata as `<stem>.json`. Values use shortest round-trip formatting.
pub fn save_readout(csv_path: &Path, readout: &ReadoutWeights, meta: &ReadoutMeta) -> Result<()> {
    let m = readout.matrix();
    if (meta.rows, meta.cols) != m.shape() {
        return Err(Error::GeometryMismatch(format!(
            "metadata says {}x{}, matrix is {}x{}",
            meta.rows,
            meta.cols,
            m.nrows(),
            m.ncols()
        )));
    }
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(csv_path)?;
    for r in 0..m.nrows() {
        w.write_record(m.row(r).iter().map(|v| v.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(csv_path, e))?;

    let json = serde_json::to_string_pretty(meta)?;
    let side = sidecar_path(csv_path);
    fs::write(&side, json + "\n").map_err(|e| Error::io(side, e))
}

pub fn load_readout(csv_path: &Path) -> Result<(ReadoutWeights, ReadoutMeta)> {
    let side = sidecar_path(csv_path);
    let text = fs::read_to_string(&side).map_err(|e| Error::io(&side, e))?;
    let meta: ReadoutMeta = serde_json::from_str(&text)?;

    let malformed = |message: String| Error::Format {
        format: "readout CSV",
        path: csv_path.to_owned(),
        message,
    };
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .from_path(csv_path)?;
    let mut values = Vec::with_capacity(meta.rows * meta.cols);
    let mut rows = 0;
    for record in r.records() {
        let record = record?;
        if record.len() != meta.cols {
            return Err(malformed(format!(
                "row {rows} has {} columns, expected {}",
                record.len(),
                meta.cols
            )));
        }
        for field in record.iter() {
            values.push(
                field
                    .parse::<f64>()
                    .map_err(|e| malformed(format!("row {rows}: {e}")))?,
            );
        }
        rows += 1;
    }
    if rows != meta.rows {
        return Err(malformed(format!("{rows} rows, expected {}", meta.rows)));
    }
    let readout = ReadoutWeights::new(DMatrix::from_row_slice(meta.rows, meta.cols, &values))?;
    Ok((readout, meta))
}

//! Alignment-matrix visualization as binary PGM images.

use std::io::Write;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::linalg::Mat;

#[derive(Debug, Error)]
pub enum HeatmapError {
    #[error("scores must lie in [0, 1], found {value} at ({row}, {col})")]
    OutOfRange { value: f64, row: usize, col: usize },
    #[error("empty score matrix")]
    Empty,
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

/// Renders the scores to `maxval`-255 grayscale bytes: one pixel per cell,
/// `round(255 * score)`, base nodes as rows.
pub fn heatmap_bytes(scores: &Mat) -> Result<Vec<u8>, HeatmapError> {
    let (rows, cols) = scores.shape();
    if rows == 0 || cols == 0 {
        return Err(HeatmapError::Empty);
    }
    for i in 0..rows {
        for j in 0..cols {
            let v = scores.get(i, j);
            if !(0.0..=1.0).contains(&v) {
                return Err(HeatmapError::OutOfRange {
                    value: v,
                    row: i,
                    col: j,
                });
            }
        }
    }
    let mut out = Vec::with_capacity(32 + rows * cols);
    write!(out, "P5\n{cols} {rows}\n255\n").expect("in-memory write");
    for i in 0..rows {
        for j in 0..cols {
            out.push((255.0 * scores.get(i, j)).round() as u8);
        }
    }
    Ok(out)
}

/// Writes the scores as a binary PGM (P5, maxval 255). Byte-stable for
/// identical input.
pub fn export_heatmap(scores: &Mat, path: &Path) -> Result<(), HeatmapError> {
    let bytes = heatmap_bytes(scores)?;
    std::fs::write(path, bytes).map_err(|source| HeatmapError::Io {
        path: path.to_path_buf(),
        source,
    })
}

use std::fs;
use std::path::Path;

use super::{pool_cells, FeatureMap, ImageFrame, CELL_SIZE};
use crate::error::{Error, Result};

/// Quantization levels per RGB channel.
pub const COLOR_NAME_BINS: usize = 32;
/// Number of color-name probabilities per table row.
pub const COLOR_NAME_CHANNELS: usize = 11;

const ROWS: usize = COLOR_NAME_BINS * COLOR_NAME_BINS * COLOR_NAME_BINS;

/// Lookup from 5-bit quantized RGB to 11 color-name probabilities.
///
/// Row `r_q·1024 + g_q·32 + b_q` holds the probabilities for the quantized color
/// `(r_q, g_q, b_q)`, where `q = round(255·v) >> 3`.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorNameTable {
    rows: Vec<[f64; COLOR_NAME_CHANNELS]>,
}

impl ColorNameTable {
    /// Validates and row-normalizes a full table.
    ///
    /// Rows must be non-negative, finite, and sum to 1 within 1e-3; they are then
    /// rescaled to sum to 1 exactly (up to rounding).
    pub fn from_rows(mut rows: Vec<[f64; COLOR_NAME_CHANNELS]>) -> Result<Self> {
        if rows.len() != ROWS {
            return Err(Error::mismatch(format!("{ROWS} table rows"), rows.len()));
        }
        for (i, row) in rows.iter_mut().enumerate() {
            if row.iter().any(|v| !v.is_finite() || *v < 0.0) {
                return Err(Error::InvalidConfig(format!(
                    "color-name row {i} has a negative or non-finite entry"
                )));
            }
            let s: f64 = row.iter().sum();
            if (s - 1.0).abs() > 1e-3 {
                return Err(Error::InvalidConfig(format!(
                    "color-name row {i} sums to {s}, not 1"
                )));
            }
            row.iter_mut().for_each(|v| *v /= s);
        }
        Ok(Self { rows })
    }

    /// Built-in table: soft assignment to 11 hand-placed prototype colors (black, blue,
    /// brown, grey, green, orange, pink, purple, red, white, yellow) with weights
    /// `exp(−‖c − p‖² / 0.1)`, normalized per row.
    pub fn prototype() -> Self {
        const PROTOTYPES: [[f64; 3]; COLOR_NAME_CHANNELS] = [
            [0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.6, 0.4, 0.2],
            [0.5, 0.5, 0.5],
            [0.0, 1.0, 0.0],
            [1.0, 0.6, 0.0],
            [1.0, 0.7, 0.8],
            [0.6, 0.0, 0.8],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 1.0],
            [1.0, 1.0, 0.0],
        ];
        let rows = (0..ROWS)
            .map(|i| {
                let c = [
                    ((i >> 10) & 31) as f64 / 31.0,
                    ((i >> 5) & 31) as f64 / 31.0,
                    (i & 31) as f64 / 31.0,
                ];
                let mut row = [0.0; COLOR_NAME_CHANNELS];
                for (k, p) in PROTOTYPES.iter().enumerate() {
                    let d2: f64 = p.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
                    row[k] = (-d2 / 0.1).exp();
                }
                let s: f64 = row.iter().sum();
                row.iter_mut().for_each(|v| *v /= s);
                row
            })
            .collect();
        Self::from_rows(rows).expect("prototype rows are normalized")
    }

    /// Reads a whitespace- or comma-separated text table.
    ///
    /// Two layouts are accepted: 32768 lines of 11 probabilities in row-index order, or
    /// 32768 lines of `R G B p1..p11` where `R, G, B` are 0..255 bin representatives;
    /// the latter is placed by its RGB columns, so any line order works.
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut rows = vec![[f64::NAN; COLOR_NAME_CHANNELS]; ROWS];
        let mut filled = vec![false; ROWS];
        let mut count = 0;
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse {
                path: path.to_path_buf(),
                line: ln + 1,
                message,
            };
            let vals = line
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|s| !s.is_empty())
                .map(|s| s.parse::<f64>().map_err(|e| parse_err(format!("{s:?}: {e}"))))
                .collect::<Result<Vec<_>>>()?;
            let (index, probs) = match vals.len() {
                COLOR_NAME_CHANNELS => (count, &vals[..]),
                n if n == COLOR_NAME_CHANNELS + 3 => {
                    let q = |v: f64| -> Result<usize> {
                        if !(0.0..=255.0).contains(&v) {
                            return Err(parse_err(format!("RGB value {v} outside 0..255")));
                        }
                        Ok((v as usize) >> 3)
                    };
                    let idx = q(vals[0])? * 1024 + q(vals[1])? * 32 + q(vals[2])?;
                    (idx, &vals[3..])
                }
                n => return Err(parse_err(format!("expected 11 or 14 values, found {n}"))),
            };
            if index >= ROWS {
                return Err(parse_err(format!("more than {ROWS} rows")));
            }
            if filled[index] {
                return Err(parse_err(format!("duplicate entry for table row {index}")));
            }
            filled[index] = true;
            rows[index].copy_from_slice(probs);
            count += 1;
        }
        if count != ROWS {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: text.lines().count(),
                message: format!("expected {ROWS} rows, found {count}"),
            });
        }
        Self::from_rows(rows)
    }

    pub fn index_of(r: f64, g: f64, b: f64) -> usize {
        let q = |v: f64| ((v.clamp(0.0, 1.0) * 255.0).round() as usize) >> 3;
        q(r) * 1024 + q(g) * 32 + q(b)
    }

    pub fn row(&self, index: usize) -> &[f64; COLOR_NAME_CHANNELS] {
        &self.rows[index]
    }

    pub fn lookup(&self, r: f64, g: f64, b: f64) -> &[f64; COLOR_NAME_CHANNELS] {
        &self.rows[Self::index_of(r, g, b)]
    }
}

/// Per-pixel 11-channel color-name probabilities, averaged into 4×4 cells.
pub fn color_names(patch: &ImageFrame, table: &ColorNameTable) -> Result<FeatureMap> {
    if !patch.is_color() {
        return Err(Error::UnsupportedFeature(
            "color names need a 3-channel patch; use the gray pathway".into(),
        ));
    }
    let (w, h) = (patch.width(), patch.height());
    let idx: Vec<usize> = (0..w * h)
        .map(|i| {
            let (x, y) = (i % w, i / w);
            ColorNameTable::index_of(patch.get(x, y, 0), patch.get(x, y, 1), patch.get(x, y, 2))
        })
        .collect();
    let channels = (0..COLOR_NAME_CHANNELS)
        .map(|c| pool_cells(w, h, CELL_SIZE, |x, y| table.row(idx[y * w + x])[c]))
        .collect::<Result<Vec<_>>>()?;
    FeatureMap::new(channels)
}

/// Cell-averaged RGB shifted by −0.5; stands in for color names when no table is available.
pub fn rgb_feature(patch: &ImageFrame) -> Result<FeatureMap> {
    if !patch.is_color() {
        return Err(Error::UnsupportedFeature("RGB feature needs a 3-channel patch".into()));
    }
    let channels = (0..3)
        .map(|c| pool_cells(patch.width(), patch.height(), CELL_SIZE, |x, y| patch.get(x, y, c) - 0.5))
        .collect::<Result<Vec<_>>>()?;
    FeatureMap::new(channels)
}

/// Intensity minus the patch mean, averaged into 4×4 cells. Color patches are converted
/// to gray first.
pub fn gray_feature(patch: &ImageFrame) -> Result<FeatureMap> {
    let gray = patch.to_gray();
    let mean = gray.data().iter().sum::<f64>() / gray.data().len() as f64;
    let plane = pool_cells(gray.width(), gray.height(), CELL_SIZE, |x, y| gray.get(x, y, 0) - mean)?;
    FeatureMap::new(vec![plane])
}

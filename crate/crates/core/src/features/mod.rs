//! Patch extraction and the per-kernel feature planes consumed by the solvers.

mod color;
mod hog;
mod image;
mod pca;

pub use self::color::{color_names, gray_feature, rgb_feature, ColorNameTable, COLOR_NAME_BINS, COLOR_NAME_CHANNELS};
pub use self::hog::{hog, HogParams};
pub use self::image::{extract_patch, BoundingBox, ImageFrame};
pub use self::pca::{fit_pca, pca_reduce, PcaBasis, PCA_DIM};

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::spectral::RealPlane;

/// Side of a feature cell in pixels.
pub const CELL_SIZE: usize = 4;

/// Multi-channel 2-D feature array on the cell grid.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMap {
    width: usize,
    height: usize,
    channels: Vec<RealPlane>,
}

impl FeatureMap {
    pub fn new(channels: Vec<RealPlane>) -> Result<Self> {
        let first = channels
            .first()
            .ok_or_else(|| Error::InvalidDimension("feature map needs a channel".into()))?;
        let dims = first.dims();
        for c in &channels[1..] {
            first.ensure_same_dims(c)?;
        }
        Ok(Self {
            width: dims.0,
            height: dims.1,
            channels,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn cells(&self) -> usize {
        self.width * self.height
    }

    pub fn channel_count(&self) -> usize {
        self.channels.len()
    }

    pub fn channels(&self) -> &[RealPlane] {
        &self.channels
    }

    pub fn channel(&self, c: usize) -> &RealPlane {
        &self.channels[c]
    }

    pub fn into_channels(self) -> Vec<RealPlane> {
        self.channels
    }

    /// Channel vector of one cell.
    pub fn cell(&self, x: usize, y: usize) -> Vec<f64> {
        self.channels.iter().map(|p| p.get(x, y)).collect()
    }

    pub fn norm_sq(&self) -> f64 {
        self.channels.iter().map(RealPlane::norm_sq).sum()
    }

    pub fn ensure_compatible(&self, other: &Self) -> Result<()> {
        if self.dims() != other.dims() || self.channel_count() != other.channel_count() {
            return Err(Error::mismatch(
                format!("{}x{}x{}", self.width, self.height, self.channel_count()),
                format!("{}x{}x{}", other.width, other.height, other.channel_count()),
            ));
        }
        Ok(())
    }

    /// Elementwise `(1 - rate)·self + rate·other`.
    pub fn blend(&self, other: &Self, rate: f64) -> Result<Self> {
        self.ensure_compatible(other)?;
        let channels = self
            .channels
            .iter()
            .zip(&other.channels)
            .map(|(a, b)| {
                let data = a
                    .data()
                    .iter()
                    .zip(b.data())
                    .map(|(u, v)| (1.0 - rate) * u + rate * v)
                    .collect();
                RealPlane::new(a.width(), a.height(), data)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            width: self.width,
            height: self.height,
            channels,
        })
    }
}

/// Symmetric Hann taper of length `n`: `0.5·(1 − cos(2πi/(n−1)))`.
pub fn hann(n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![1.0];
    }
    (0..n)
        .map(|i| 0.5 * (1.0 - (2.0 * PI * i as f64 / (n - 1) as f64).cos()))
        .collect()
}

/// Multiplies every channel by the separable 2-D Hann window.
///
/// The window is exactly zero on the border, so banded maps have all-zero border cells.
pub fn hann_band(fm: &FeatureMap) -> Result<FeatureMap> {
    if fm.width < 2 || fm.height < 2 {
        return Err(Error::InvalidDimension(format!(
            "Hann banding needs at least 2x2 cells, got {}x{}",
            fm.width, fm.height
        )));
    }
    let wx = hann(fm.width);
    let wy = hann(fm.height);
    let channels = fm
        .channels
        .iter()
        .map(|p| {
            let mut data = p.data().to_vec();
            for (y, row) in data.chunks_exact_mut(fm.width).enumerate() {
                for (x, v) in row.iter_mut().enumerate() {
                    // the endpoints of the taper are only approximately zero in floating point
                    let w = if x == 0 || y == 0 || x + 1 == fm.width || y + 1 == fm.height {
                        0.0
                    } else {
                        wx[x] * wy[y]
                    };
                    *v *= w;
                }
            }
            RealPlane::from_raw(fm.width, fm.height, data)
        })
        .collect();
    Ok(FeatureMap {
        width: fm.width,
        height: fm.height,
        channels,
    })
}

/// Averages per-pixel values over `cell × cell` blocks.
pub(crate) fn pool_cells(
    width: usize,
    height: usize,
    cell: usize,
    values: impl Fn(usize, usize) -> f64,
) -> Result<RealPlane> {
    if width % cell != 0 || height % cell != 0 || width == 0 || height == 0 {
        return Err(Error::InvalidDimension(format!(
            "patch {width}x{height} is not a multiple of the {cell}-pixel cell"
        )));
    }
    let (cw, chh) = (width / cell, height / cell);
    let mut out = vec![0.0; cw * chh];
    for y in 0..height {
        for x in 0..width {
            out[(y / cell) * cw + x / cell] += values(x, y);
        }
    }
    let norm = (cell * cell) as f64;
    out.iter_mut().for_each(|v| *v /= norm);
    RealPlane::new(cw, chh, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(w: usize, h: usize, c: usize, f: impl Fn(usize, usize, usize) -> f64) -> FeatureMap {
        FeatureMap::new(
            (0..c)
                .map(|ch| RealPlane::from_fn(w, h, |x, y| f(x, y, ch)).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn hann_borders_are_zero() {
        let fm = map(7, 5, 3, |x, y, c| 1.0 + (x * y + c) as f64);
        let b = hann_band(&fm).unwrap();
        for ch in b.channels() {
            for y in 0..5 {
                for x in 0..7 {
                    if x == 0 || y == 0 || x == 6 || y == 4 {
                        assert_eq!(ch.get(x, y), 0.0);
                    }
                }
            }
        }
    }

    #[test]
    fn hann_center_of_odd_map_is_unchanged() {
        let fm = map(5, 7, 1, |x, y, _| (x + 10 * y) as f64);
        let b = hann_band(&fm).unwrap();
        assert!((b.channel(0).get(2, 3) - fm.channel(0).get(2, 3)).abs() < 1e-12);
    }

    #[test]
    fn hann_on_four_by_four_ones() {
        let fm = map(4, 4, 1, |_, _, _| 1.0);
        let b = hann_band(&fm).unwrap();
        let w = [0.0, 0.75, 0.75, 0.0];
        for y in 0..4 {
            for x in 0..4 {
                assert!((b.channel(0).get(x, y) - w[x] * w[y]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hann_twice_squares_the_window() {
        let fm = map(6, 5, 2, |x, y, c| 0.5 + (x as f64 - y as f64) * (c as f64 + 1.0));
        let once = hann_band(&fm).unwrap();
        let twice = hann_band(&once).unwrap();
        let (wx, wy) = (hann(6), hann(5));
        for c in 0..2 {
            for y in 1..4 {
                for x in 1..5 {
                    let w = wx[x] * wy[y];
                    let expected = fm.channel(c).get(x, y) * w * w;
                    assert!((twice.channel(c).get(x, y) - expected).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn hann_rejects_thin_maps() {
        assert!(hann_band(&map(1, 4, 1, |_, _, _| 1.0)).is_err());
    }

    #[test]
    fn blend_is_convex() {
        let a = map(3, 3, 2, |x, y, c| (x + y + c) as f64);
        let b = map(3, 3, 2, |x, y, c| (x * y) as f64 - c as f64);
        let m = a.blend(&b, 0.3).unwrap();
        for c in 0..2 {
            for (i, v) in m.channel(c).data().iter().enumerate() {
                let (p, q) = (a.channel(c).data()[i], b.channel(c).data()[i]);
                assert!(*v >= p.min(q) - 1e-12 && *v <= p.max(q) + 1e-12);
            }
        }
    }
}

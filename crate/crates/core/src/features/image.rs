use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A frame with 1 (gray) or 3 (RGB) interleaved channels, intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageFrame {
    width: usize,
    height: usize,
    channels: usize,
    data: Vec<f64>,
}

impl ImageFrame {
    pub fn new(width: usize, height: usize, channels: usize, data: Vec<f64>) -> Result<Self> {
        if channels != 1 && channels != 3 {
            return Err(Error::InvalidDimension(format!(
                "frames have 1 or 3 channels, got {channels}"
            )));
        }
        if width == 0 || height == 0 {
            return Err(Error::InvalidDimension(format!(
                "frame must be non-empty, got {width}x{height}"
            )));
        }
        if data.len() != width * height * channels {
            return Err(Error::mismatch(width * height * channels, data.len()));
        }
        if let Some(v) = data.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::InvalidDimension(format!(
                "intensity {v} outside [0, 1]"
            )));
        }
        Ok(Self {
            width,
            height,
            channels,
            data,
        })
    }

    /// Builds a frame by evaluating `f(x, y, channel)`; values are clamped to `[0, 1]`.
    pub fn from_fn(
        width: usize,
        height: usize,
        channels: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width * height * channels);
        for y in 0..height {
            for x in 0..width {
                for c in 0..channels {
                    data.push(f(x, y, c).clamp(0.0, 1.0));
                }
            }
        }
        Self::new(width, height, channels, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn is_color(&self) -> bool {
        self.channels == 3
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize, c: usize) -> f64 {
        self.data[(y * self.width + x) * self.channels + c]
    }

    /// Per-pixel channel mean.
    pub fn to_gray(&self) -> ImageFrame {
        if self.channels == 1 {
            return self.clone();
        }
        let data = self
            .data
            .chunks_exact(3)
            .map(|p| (p[0] + p[1] + p[2]) / 3.0)
            .collect();
        ImageFrame {
            width: self.width,
            height: self.height,
            channels: 1,
            data,
        }
    }

    /// True when every pixel has equal channel values (gray content stored as RGB).
    pub fn is_effectively_gray(&self) -> bool {
        self.channels == 1
            || self
                .data
                .chunks_exact(3)
                .all(|p| p[0] == p[1] && p[1] == p[2])
    }

    /// Decodes a PNG or JPEG file. Luma images become 1-channel frames, anything else RGB.
    pub fn load(path: &Path) -> Result<Self> {
        let img = image::open(path).map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })?;
        let (w, h) = (img.width() as usize, img.height() as usize);
        let data: Vec<f64> = if img.color().has_color() {
            img.to_rgb8().into_raw().into_iter().map(|v| v as f64 / 255.0).collect()
        } else {
            img.to_luma8().into_raw().into_iter().map(|v| v as f64 / 255.0).collect()
        };
        let channels = if img.color().has_color() { 3 } else { 1 };
        Self::new(w, h, channels, data)
    }

    /// Writes an 8-bit PNG, rounding intensities to the nearest level.
    pub fn save_png(&self, path: &Path) -> Result<()> {
        let bytes: Vec<u8> = self.data.iter().map(|v| (v * 255.0).round() as u8).collect();
        let color = if self.channels == 3 {
            image::ExtendedColorType::Rgb8
        } else {
            image::ExtendedColorType::L8
        };
        image::save_buffer_with_format(
            path,
            &bytes,
            self.width as u32,
            self.height as u32,
            color,
            image::ImageFormat::Png,
        )
        .map_err(|source| Error::Image {
            path: path.to_path_buf(),
            source,
        })
    }

    fn sample_bilinear(&self, x: f64, y: f64, out: &mut [f64]) {
        let xmax = (self.width - 1) as f64;
        let ymax = (self.height - 1) as f64;
        let x = x.clamp(0.0, xmax);
        let y = y.clamp(0.0, ymax);
        let x0 = x.floor() as usize;
        let y0 = y.floor() as usize;
        let x1 = (x0 + 1).min(self.width - 1);
        let y1 = (y0 + 1).min(self.height - 1);
        let fx = x - x0 as f64;
        let fy = y - y0 as f64;
        for (c, o) in out.iter_mut().enumerate() {
            let a = self.get(x0, y0, c);
            let b = self.get(x1, y0, c);
            let d = self.get(x0, y1, c);
            let e = self.get(x1, y1, c);
            *o = (a * (1.0 - fx) + b * fx) * (1.0 - fy) + (d * (1.0 - fx) + e * fx) * fy;
        }
    }
}

/// Axis-aligned box, top-left origin, 0-indexed pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
}

impl BoundingBox {
    pub fn new(x: f64, y: f64, w: f64, h: f64) -> Result<Self> {
        let b = Self { x, y, w, h };
        b.validate()?;
        Ok(b)
    }

    pub fn from_center(cx: f64, cy: f64, w: f64, h: f64) -> Result<Self> {
        Self::new(cx - w / 2.0, cy - h / 2.0, w, h)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.x.is_finite() && self.y.is_finite() && self.w.is_finite() && self.h.is_finite())
        {
            return Err(Error::NonFinite("bounding box"));
        }
        if self.w <= 0.0 || self.h <= 0.0 {
            return Err(Error::InvalidDimension(format!(
                "box must have positive size, got {}x{}",
                self.w, self.h
            )));
        }
        Ok(())
    }

    pub fn center(&self) -> (f64, f64) {
        (self.x + self.w / 2.0, self.y + self.h / 2.0)
    }

    pub fn area(&self) -> f64 {
        self.w * self.h
    }

    pub fn intersects_frame(&self, width: usize, height: usize) -> bool {
        self.x < width as f64 && self.y < height as f64 && self.x + self.w > 0.0 && self.y + self.h > 0.0
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Self {
        Self {
            x: self.x + dx,
            y: self.y + dy,
            ..*self
        }
    }
}

impl std::fmt::Display for BoundingBox {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({:.2}, {:.2}, {:.2}, {:.2})", self.x, self.y, self.w, self.h)
    }
}

/// Crops a region `search_factor` times the box around its center and resamples it
/// bilinearly to `out_width × out_height` pixels.
///
/// Output pixel `j` samples the source at `x0 + (j + 0.5)·rw/out_width − 0.5`, so an
/// integer box at factor 1 resampled to its own size reproduces the crop exactly.
/// Coordinates outside the frame replicate the nearest edge pixel.
pub fn extract_patch(
    frame: &ImageFrame,
    bbox: &BoundingBox,
    search_factor: f64,
    out_width: usize,
    out_height: usize,
) -> Result<ImageFrame> {
    bbox.validate()?;
    if !(search_factor >= 1.0) {
        return Err(Error::InvalidConfig(format!(
            "search factor must be at least 1, got {search_factor}"
        )));
    }
    if out_width == 0 || out_height == 0 {
        return Err(Error::InvalidDimension("empty output patch".into()));
    }
    if !bbox.intersects_frame(frame.width, frame.height) {
        return Err(Error::OutOfFrame(bbox.to_string()));
    }
    let (cx, cy) = bbox.center();
    let rw = bbox.w * search_factor;
    let rh = bbox.h * search_factor;
    let x0 = cx - rw / 2.0;
    let y0 = cy - rh / 2.0;
    let sx = rw / out_width as f64;
    let sy = rh / out_height as f64;
    let ch = frame.channels;
    let mut data = vec![0.0; out_width * out_height * ch];
    for j in 0..out_height {
        let y = y0 + (j as f64 + 0.5) * sy - 0.5;
        for i in 0..out_width {
            let x = x0 + (i as f64 + 0.5) * sx - 0.5;
            let off = (j * out_width + i) * ch;
            frame.sample_bilinear(x, y, &mut data[off..off + ch]);
        }
    }
    Ok(ImageFrame {
        width: out_width,
        height: out_height,
        channels: ch,
        data,
    })
}

//! Deterministic synthetic sequences with exact ground truth.
//!
//! The target texture lives in box-normalized coordinates, so it scales with the box
//! under zoom. Ground-truth boxes are not rounded: frame `t` has center
//! `start + t·velocity` and size `size·zoom^t` exactly.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::metrics::offset_ratio;
use super::Sequence;
use crate::error::{Error, Result};
use crate::features::{BoundingBox, ImageFrame};
use crate::tracker::ColorMode;

/// Names accepted by [`SynthSpec::preset`].
pub const PRESETS: [&str; 4] = ["translation", "zoom", "static", "phase-switch"];

/// Parameters of the two-phase appearance.
///
/// The target is a grid of blocks with seeded zero-sum hue offsets on a neutral gray
/// background. Zero-sum offsets leave the gray image unchanged, so before
/// `switch_frame` the target has no gradient structure at all. From `switch_frame` on,
/// every block carries period-4 luminance stripes of a seeded orientation and the
/// background fills with stripes of its own. Stripe contrast ramps up while the hue
/// fades to neutral over `fade_frames`. Stripes sum to zero over any 4 consecutive pixels, so cell averages
/// of the gray image cannot see them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSwitch {
    pub switch_frame: usize,
    pub fade_frames: usize,
    pub blocks: usize,
    pub hue_amplitude: f64,
    pub stripe_contrast: f64,
}

impl PhaseSwitch {
    /// Fraction of the hue amplitude shown in frame `t`.
    pub fn hue_level(&self, t: usize) -> f64 {
        if t < self.switch_frame {
            1.0
        } else {
            let k = (t - self.switch_frame + 1) as f64;
            (1.0 - k / self.fade_frames.max(1) as f64).max(0.0)
        }
    }

    /// Fraction of the stripe contrast shown in frame `t`.
    pub fn stripe_level(&self, t: usize) -> f64 {
        1.0 - self.hue_level(t)
    }

    pub fn stripes_on(&self, t: usize) -> bool {
        t >= self.switch_frame
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Appearance {
    /// Seeded random color blocks on a blocky background of lower contrast.
    Noise,
    /// Left and right halves in two seeded colors.
    BiColor,
    PhaseSwitch(PhaseSwitch),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub name: String,
    pub width: usize,
    pub height: usize,
    pub frames: usize,
    /// Box size in the first frame.
    pub target_size: (f64, f64),
    pub start_center: (f64, f64),
    /// Pixels per frame.
    pub velocity: (f64, f64),
    /// Size factor per frame.
    pub zoom: f64,
    pub appearance: Appearance,
    /// Per-frame luminance noise standard deviation.
    pub noise: f64,
    /// Emit single-channel frames.
    pub gray: bool,
    /// Largest adjacent-frame offset ratio the motion may produce.
    pub max_offset_ratio: f64,
}

impl SynthSpec {
    /// 64×64 target moving 3 px per frame for 50 frames in a 320×240 frame.
    pub fn translation() -> Self {
        Self {
            name: "translation".into(),
            width: 320,
            height: 240,
            frames: 50,
            target_size: (64.0, 64.0),
            start_center: (80.0, 120.0),
            velocity: (3.0, 0.0),
            zoom: 1.0,
            appearance: Appearance::Noise,
            noise: 0.02,
            gray: false,
            max_offset_ratio: 0.6,
        }
    }

    /// Centered 48×48 target growing 1% per frame for 30 frames, without sensor noise.
    ///
    /// Per-pixel noise is smoothed by different amounts at each pyramid scale, which
    /// biases the scale search more than the 1% growth it is meant to measure.
    pub fn zoom() -> Self {
        Self {
            name: "zoom".into(),
            frames: 30,
            target_size: (48.0, 48.0),
            start_center: (160.0, 120.0),
            velocity: (0.0, 0.0),
            zoom: 1.01,
            noise: 0.0,
            ..Self::translation()
        }
    }

    /// Ten identical frames.
    pub fn still() -> Self {
        Self {
            name: "static".into(),
            frames: 10,
            start_center: (160.0, 120.0),
            velocity: (0.0, 0.0),
            noise: 0.0,
            ..Self::translation()
        }
    }

    /// 100 frames, color-discriminative until frame 40, gradient-discriminative after a
    /// 30-frame hue fade.
    pub fn phase_switch() -> Self {
        Self {
            name: "phase-switch".into(),
            frames: 100,
            start_center: (64.0, 96.0),
            velocity: (2.0, 0.5),
            appearance: Appearance::PhaseSwitch(PhaseSwitch {
                switch_frame: 40,
                fade_frames: 30,
                blocks: 4,
                hue_amplitude: 0.2,
                stripe_contrast: 0.15,
            }),
            noise: 0.02,
            ..Self::translation()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "translation" => Ok(Self::translation()),
            "zoom" => Ok(Self::zoom()),
            "static" => Ok(Self::still()),
            "phase-switch" | "phase_switch" => Ok(Self::phase_switch()),
            other => Err(Error::Spec(format!(
                "unknown preset {other:?}; expected one of {}",
                PRESETS.join(", ")
            ))),
        }
    }

    /// Ground-truth box of frame `t`.
    pub fn box_at(&self, t: usize) -> Result<BoundingBox> {
        let s = self.zoom.powi(t as i32);
        BoundingBox::from_center(
            self.start_center.0 + t as f64 * self.velocity.0,
            self.start_center.1 + t as f64 * self.velocity.1,
            self.target_size.0 * s,
            self.target_size.1 * s,
        )
    }

    /// Checks sizes and that the target stays inside the frame within the offset-ratio limit.
    pub fn validate(&self) -> Result<Vec<BoundingBox>> {
        if self.width < 16 || self.height < 16 {
            return Err(Error::Spec(format!("frame {}x{} is too small", self.width, self.height)));
        }
        if self.frames == 0 {
            return Err(Error::Spec("at least one frame is required".into()));
        }
        if !(self.zoom > 0.0 && self.zoom.is_finite()) {
            return Err(Error::Spec(format!("zoom must be positive, got {}", self.zoom)));
        }
        if !(self.noise >= 0.0) {
            return Err(Error::Spec("noise must be non-negative".into()));
        }
        if let Appearance::PhaseSwitch(p) = &self.appearance {
            if p.blocks == 0 {
                return Err(Error::Spec("phase switch needs at least one block".into()));
            }
        }
        let boxes = (0..self.frames)
            .map(|t| self.box_at(t).map_err(|e| Error::Spec(format!("frame {t}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        for (t, b) in boxes.iter().enumerate() {
            if b.x < 0.0 || b.y < 0.0 || b.x + b.w > self.width as f64 || b.y + b.h > self.height as f64 {
                return Err(Error::Spec(format!(
                    "target {b} leaves the {}x{} frame at frame {t}",
                    self.width, self.height
                )));
            }
        }
        for (t, w) in boxes.windows(2).enumerate() {
            let tau = offset_ratio(&w[0], &w[1]);
            if tau > self.max_offset_ratio {
                return Err(Error::Spec(format!(
                    "offset ratio {tau:.3} between frames {t} and {} exceeds {}",
                    t + 1,
                    self.max_offset_ratio
                )));
            }
        }
        Ok(boxes)
    }
}

const TARGET_GRID: usize = 8;
const BACKGROUND_SPACING: f64 = 16.0;
const STRIPES: [f64; 4] = [1.0, 1.0, -1.0, -1.0];
const ORIENTATIONS: [(i64, i64); 4] = [(1, 0), (0, 1), (1, 1), (1, -1)];

/// Zero-sum RGB offsets: equal channel means, hence invisible in the gray image.
const HUES: [[f64; 3]; 6] = [
    [1.0, -1.0, 0.0],
    [-1.0, 1.0, 0.0],
    [1.0, 0.0, -1.0],
    [-1.0, 0.0, 1.0],
    [0.0, 1.0, -1.0],
    [0.0, -1.0, 1.0],
];

/// Renders frames of one spec on demand.
#[derive(Debug)]
pub(crate) struct Renderer {
    spec: SynthSpec,
    seed: u64,
    boxes: Vec<BoundingBox>,
    target: Vec<[f64; 3]>,
    background: Vec<[f64; 3]>,
    bg_cols: usize,
    colors: [[f64; 3]; 2],
    blocks: Vec<(usize, usize)>,
    bg_orientations: Vec<usize>,
}

fn stripe((dx, dy): (i64, i64), x: i64, y: i64) -> f64 {
    STRIPES[(dx * x + dy * y).rem_euclid(4) as usize]
}

fn cell(grid: &[[f64; 3]], cols: usize, rows: usize, gx: f64, gy: f64) -> [f64; 3] {
    let x = (gx.max(0.0) as usize).min(cols - 1);
    let y = (gy.max(0.0) as usize).min(rows - 1);
    grid[y * cols + x]
}

impl Renderer {
    fn new(spec: SynthSpec, seed: u64) -> Result<Self> {
        let boxes = spec.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rgb = |rng: &mut ChaCha8Rng| [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()];
        let target = (0..TARGET_GRID * TARGET_GRID).map(|_| rgb(&mut rng)).collect();
        let bg_cols = (spec.width as f64 / BACKGROUND_SPACING).ceil() as usize + 2;
        let bg_rows = (spec.height as f64 / BACKGROUND_SPACING).ceil() as usize + 2;
        let background = (0..bg_cols * bg_rows)
            .map(|_| rgb(&mut rng).map(|v| 0.5 + 0.3 * (v - 0.5)))
            .collect();
        let colors = [rgb(&mut rng), rgb(&mut rng)];
        let blocks = match &spec.appearance {
            Appearance::PhaseSwitch(p) => (0..p.blocks * p.blocks)
                .map(|_| (rng.gen_range(0..HUES.len()), rng.gen_range(0..ORIENTATIONS.len())))
                .collect(),
            _ => Vec::new(),
        };
        let bg_orientations = (0..bg_cols * bg_rows)
            .map(|_| rng.gen_range(0..ORIENTATIONS.len()))
            .collect();
        Ok(Self {
            spec,
            seed,
            boxes,
            target,
            background,
            bg_cols,
            colors,
            blocks,
            bg_orientations,
        })
    }

    fn background_at(&self, x: usize, y: usize, t: usize) -> [f64; 3] {
        let (gx, gy) = ((x as f64 + 0.5) / BACKGROUND_SPACING, (y as f64 + 0.5) / BACKGROUND_SPACING);
        match &self.spec.appearance {
            Appearance::PhaseSwitch(p) if p.stripes_on(t) => {
                let o = self.bg_orientations[gy as usize * self.bg_cols + gx as usize];
                [0.5 + p.stripe_contrast * p.stripe_level(t) * stripe(ORIENTATIONS[o], x as i64, y as i64); 3]
            }
            Appearance::PhaseSwitch(_) => [0.5; 3],
            _ => {
                let rows = self.background.len() / self.bg_cols;
                cell(&self.background, self.bg_cols, rows, gx, gy)
            }
        }
    }

    fn render(&self, t: usize) -> Result<ImageFrame> {
        let spec = &self.spec;
        let b = self.boxes[t];
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(t as u64 + 1);
        let noise_sd = spec.noise;
        let noise = Normal::new(0.0, noise_sd).map_err(|e| Error::Spec(e.to_string()))?;
        let (ox, oy) = (b.x.round() as i64, b.y.round() as i64);
        let channels = if spec.gray { 1 } else { 3 };
        let mut data = Vec::with_capacity(spec.width * spec.height * channels);
        for y in 0..spec.height {
            for x in 0..spec.width {
                let (px, py) = (x as f64 + 0.5, y as f64 + 0.5);
                let (u, v) = ((px - b.x) / b.w, (py - b.y) / b.h);
                let inside = (0.0..1.0).contains(&u) && (0.0..1.0).contains(&v);
                let mut rgb = if !inside {
                    self.background_at(x, y, t)
                } else {
                    match &spec.appearance {
                        Appearance::Noise => {
                            let g = TARGET_GRID as f64;
                            cell(&self.target, TARGET_GRID, TARGET_GRID, u * g, v * g)
                        }
                        Appearance::BiColor => self.colors[usize::from(u >= 0.5)],
                        Appearance::PhaseSwitch(p) => {
                            let (bu, bv) = ((u * p.blocks as f64) as usize, (v * p.blocks as f64) as usize);
                            let (hue, orient) = self.blocks[bv.min(p.blocks - 1) * p.blocks + bu.min(p.blocks - 1)];
                            let lum = if p.stripes_on(t) {
                                0.5 + p.stripe_contrast * p.stripe_level(t) * stripe(ORIENTATIONS[orient], x as i64 - ox, y as i64 - oy)
                            } else {
                                0.5
                            };
                            let a = p.hue_amplitude * p.hue_level(t);
                            let h = HUES[hue];
                            [lum + a * h[0], lum + a * h[1], lum + a * h[2]]
                        }
                    }
                };
                if noise_sd > 0.0 {
                    let n = noise.sample(&mut rng);
                    rgb.iter_mut().for_each(|c| *c += n);
                }
                if spec.gray {
                    data.push(((rgb[0] + rgb[1] + rgb[2]) / 3.0).clamp(0.0, 1.0));
                } else {
                    data.extend(rgb.iter().map(|c| c.clamp(0.0, 1.0)));
                }
            }
        }
        ImageFrame::new(spec.width, spec.height, channels, data)
    }
}

/// Builds the lazily rendered sequence for `spec`; identical `(spec, seed)` pairs give
/// bit-identical frames.
pub fn synth_sequence(spec: &SynthSpec, seed: u64) -> Result<Sequence> {
    let renderer = Renderer::new(spec.clone(), seed)?;
    let groundtruth = renderer.boxes.clone();
    let mode = if spec.gray { ColorMode::Gray } else { ColorMode::Color };
    Ok(Sequence::synthetic(
        format!("{}-{seed}", spec.name),
        Arc::new(SyntheticFrames(renderer)),
        groundtruth,
        mode,
    ))
}

#[derive(Debug)]
pub(crate) struct SyntheticFrames(Renderer);

impl SyntheticFrames {
    pub(crate) fn render(&self, t: usize) -> Result<ImageFrame> {
        self.0.render(t)
    }

    pub(crate) fn spec(&self) -> &SynthSpec {
        &self.0.spec
    }
}

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{EffectiveConfig, TrackerConfig, TrackerState};
use crate::error::{Error, Result};
use crate::features::{BoundingBox, ImageFrame};

/// Random access to the frames of one sequence.
pub trait FrameSource: Sync {
    fn len(&self) -> usize;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Loads frame `index` (0-based).
    fn frame(&self, index: usize) -> Result<ImageFrame>;
}

impl FrameSource for [ImageFrame] {
    fn len(&self) -> usize {
        <[ImageFrame]>::len(self)
    }

    fn frame(&self, index: usize) -> Result<ImageFrame> {
        self.get(index).cloned().ok_or_else(|| Error::Sequence {
            index,
            message: "frame index out of range".into(),
        })
    }
}

impl FrameSource for Vec<ImageFrame> {
    fn len(&self) -> usize {
        self.as_slice().len()
    }

    fn frame(&self, index: usize) -> Result<ImageFrame> {
        self.as_slice().frame(index)
    }
}

/// Everything recorded while tracking one sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub boxes: Vec<BoundingBox>,
    /// Winning response value per frame; `None` for the initialization frame.
    pub peaks: Vec<Option<f64>>,
    pub scales: Vec<f64>,
    /// Kernel weights after each frame's update.
    pub weights: Vec<Vec<f64>>,
    /// Wall-clock milliseconds per frame, including frame loading.
    pub times_ms: Vec<f64>,
    /// 0-based frames where the box was clamped back into the frame.
    pub drift_frames: Vec<usize>,
    pub effective: EffectiveConfig,
}

impl RunReport {
    /// Mean frames per second over frames 2..N; `None` for a single frame.
    pub fn mean_fps(&self) -> Option<f64> {
        let rest = self.times_ms.get(1..)?;
        if rest.is_empty() {
            return None;
        }
        let total: f64 = rest.iter().sum();
        (total > 0.0).then(|| rest.len() as f64 * 1000.0 / total)
    }
}

fn at_frame(index: usize, e: Error) -> Error {
    match e {
        Error::Sequence { .. } => e,
        other => Error::Sequence {
            index,
            message: other.to_string(),
        },
    }
}

/// Tracks through `source` starting from `init_box` on frame 0.
///
/// Unreadable frames surface as [`Error::Sequence`] with the frame index. Solver errors
/// are passed through unchanged so callers can tell numerical failures apart.
pub fn run_sequence<S: FrameSource + ?Sized>(
    source: &S,
    init_box: BoundingBox,
    config: &TrackerConfig,
) -> Result<RunReport> {
    if source.is_empty() {
        return Err(Error::Sequence {
            index: 0,
            message: "sequence has no frames".into(),
        });
    }
    let started = Instant::now();
    let first = source.frame(0).map_err(|e| at_frame(0, e))?;
    let mut tracker = TrackerState::init(&first, init_box, config)?;
    let n = source.len();
    let mut report = RunReport {
        boxes: Vec::with_capacity(n),
        peaks: Vec::with_capacity(n),
        scales: Vec::with_capacity(n),
        weights: Vec::with_capacity(n),
        times_ms: Vec::with_capacity(n),
        drift_frames: Vec::new(),
        effective: tracker.effective().clone(),
    };
    // the init box is reported verbatim rather than reconstructed from center and size
    report.boxes.push(init_box);
    report.peaks.push(None);
    report.scales.push(tracker.scale());
    report.weights.push(tracker.weights());
    report.times_ms.push(started.elapsed().as_secs_f64() * 1e3);

    for index in 1..n {
        let t0 = Instant::now();
        let frame = source.frame(index).map_err(|e| at_frame(index, e))?;
        let out = tracker.step(&frame)?;
        report.boxes.push(out.bbox);
        report.peaks.push(Some(out.peak));
        report.scales.push(out.scale);
        report.weights.push(tracker.weights());
        if out.drift {
            report.drift_frames.push(index);
        }
        report.times_ms.push(t0.elapsed().as_secs_f64() * 1e3);
    }
    Ok(report)
}

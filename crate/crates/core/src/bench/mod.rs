//! Sequences, synthetic data, OPE metrics and result files.

mod metrics;
mod otb;
mod results;
mod synth;

pub use self::metrics::{
    center_error, evaluate_ope, iou, is_small_move, offset_ratio, precision_thresholds, success_thresholds,
    EvaluationResult, OcclusionSpan, SmallMoveReport, SMALL_MOVE_THRESHOLD,
};
pub use self::otb::{list_frames, load_otb_sequence, parse_groundtruth, parse_occlusions, GROUNDTRUTH_FILES, OCCLUSION_FILE};
pub use self::results::{
    read_results, write_curve_table, write_results_json, write_results_text, FrameRecord, RunSummary, RESULTS_HEADER,
};
pub use self::synth::{synth_sequence, Appearance, PhaseSwitch, SynthSpec, PRESETS};

use std::fmt;
use std::path::PathBuf;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::features::{BoundingBox, ImageFrame};
use crate::tracker::{ColorMode, FrameSource};

use self::synth::SyntheticFrames;

#[derive(Clone)]
enum Frames {
    Memory(Arc<Vec<ImageFrame>>),
    Files(Vec<PathBuf>),
    Synthetic(Arc<SyntheticFrames>),
}

/// Frames plus one ground-truth box per frame.
#[derive(Clone)]
pub struct Sequence {
    pub name: String,
    frames: Frames,
    pub groundtruth: Vec<BoundingBox>,
    pub color_mode: ColorMode,
    pub occlusions: Vec<OcclusionSpan>,
    /// Non-fatal problems found while loading.
    pub warnings: Vec<String>,
}

impl fmt::Debug for Sequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let source = match &self.frames {
            Frames::Memory(_) => "memory",
            Frames::Files(_) => "files",
            Frames::Synthetic(_) => "synthetic",
        };
        f.debug_struct("Sequence")
            .field("name", &self.name)
            .field("frames", &self.groundtruth.len())
            .field("source", &source)
            .field("color_mode", &self.color_mode)
            .finish_non_exhaustive()
    }
}

fn check_lengths(frames: usize, gt: usize) -> Result<()> {
    if gt == 0 {
        return Err(Error::Sequence {
            index: 0,
            message: "sequence has no frames".into(),
        });
    }
    if frames != gt {
        return Err(Error::mismatch(format!("{gt} frames"), frames));
    }
    Ok(())
}

impl Sequence {
    pub fn from_frames(name: impl Into<String>, frames: Vec<ImageFrame>, groundtruth: Vec<BoundingBox>) -> Result<Self> {
        check_lengths(frames.len(), groundtruth.len())?;
        let color_mode = if frames[0].is_effectively_gray() {
            ColorMode::Gray
        } else {
            ColorMode::Color
        };
        Ok(Self {
            name: name.into(),
            frames: Frames::Memory(Arc::new(frames)),
            groundtruth,
            color_mode,
            occlusions: Vec::new(),
            warnings: Vec::new(),
        })
    }

    pub(crate) fn from_files(
        name: String,
        paths: Vec<PathBuf>,
        groundtruth: Vec<BoundingBox>,
        first: &ImageFrame,
    ) -> Result<Self> {
        check_lengths(paths.len(), groundtruth.len())?;
        Ok(Self {
            name,
            frames: Frames::Files(paths),
            groundtruth,
            color_mode: if first.is_effectively_gray() {
                ColorMode::Gray
            } else {
                ColorMode::Color
            },
            occlusions: Vec::new(),
            warnings: Vec::new(),
        })
    }

    pub(crate) fn synthetic(
        name: String,
        frames: Arc<SyntheticFrames>,
        groundtruth: Vec<BoundingBox>,
        color_mode: ColorMode,
    ) -> Self {
        Self {
            name,
            frames: Frames::Synthetic(frames),
            groundtruth,
            color_mode,
            occlusions: Vec::new(),
            warnings: Vec::new(),
        }
    }

    /// File paths when the sequence was loaded from disk.
    pub fn frame_paths(&self) -> Option<&[PathBuf]> {
        match &self.frames {
            Frames::Files(p) => Some(p),
            _ => None,
        }
    }

    /// Generating spec when the sequence is synthetic.
    pub fn synth_spec(&self) -> Option<&SynthSpec> {
        match &self.frames {
            Frames::Synthetic(s) => Some(s.spec()),
            _ => None,
        }
    }

    /// Keeps only the first `n` frames.
    pub fn truncate(&mut self, n: usize) {
        let n = n.max(1).min(self.groundtruth.len());
        self.groundtruth.truncate(n);
        if let Frames::Files(p) = &mut self.frames {
            p.truncate(n);
        }
        self.occlusions.retain(|s| s.end < n);
    }

    pub fn init_box(&self) -> BoundingBox {
        self.groundtruth[0]
    }
}

impl FrameSource for Sequence {
    fn len(&self) -> usize {
        self.groundtruth.len()
    }

    fn frame(&self, index: usize) -> Result<ImageFrame> {
        if index >= self.groundtruth.len() {
            return Err(Error::Sequence {
                index,
                message: format!("index beyond the {}-frame sequence", self.groundtruth.len()),
            });
        }
        let at = |e: Error| Error::Sequence {
            index,
            message: e.to_string(),
        };
        match &self.frames {
            Frames::Memory(f) => Ok(f[index].clone()),
            Frames::Files(p) => ImageFrame::load(&p[index]).map_err(at),
            Frames::Synthetic(s) => s.render(index).map_err(at),
        }
    }
}

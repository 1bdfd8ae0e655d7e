use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::BoundingBox;

/// Adjacent-frame offset ratio above which a sequence counts as a large move.
pub const SMALL_MOVE_THRESHOLD: f64 = 0.6;

/// Center-error thresholds of the precision curve: 0, 1, …, 50 pixels.
pub fn precision_thresholds() -> Vec<f64> {
    (0..=50).map(f64::from).collect()
}

/// IoU thresholds of the success curve: 0, 0.05, …, 1.
pub fn success_thresholds() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}

pub fn center_error(a: &BoundingBox, b: &BoundingBox) -> f64 {
    let (ax, ay) = a.center();
    let (bx, by) = b.center();
    (ax - bx).hypot(ay - by)
}

/// Intersection over union; 0 when either box has no area.
pub fn iou(a: &BoundingBox, b: &BoundingBox) -> f64 {
    // `(x + w) − x` need not round back to `w`
    if a == b {
        return if a.area() > 0.0 { 1.0 } else { 0.0 };
    }
    let iw = ((a.x + a.w).min(b.x + b.w) - a.x.max(b.x)).max(0.0);
    let ih = ((a.y + a.h).min(b.y + b.h) - a.y.max(b.y)).max(0.0);
    let inter = iw * ih;
    let union = a.area() + b.area() - inter;
    if union > 0.0 {
        (inter / union).clamp(0.0, 1.0)
    } else {
        0.0
    }
}

/// Center displacement between two boxes divided by the geometric mean side of `prev`.
pub fn offset_ratio(prev: &BoundingBox, next: &BoundingBox) -> f64 {
    center_error(prev, next) / prev.area().sqrt()
}

/// A run of frames during which the target is hidden (0-based, inclusive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct OcclusionSpan {
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmallMoveReport {
    pub small: bool,
    /// τ between frames t and t + 1.
    pub adjacent: Vec<f64>,
    /// τ between the endpoints of each occlusion span.
    pub spans: Vec<f64>,
}

/// Classifies a ground-truth track as small-move: every adjacent τ and every occlusion
/// endpoint τ at most [`SMALL_MOVE_THRESHOLD`].
pub fn is_small_move(groundtruth: &[BoundingBox], spans: Option<&[OcclusionSpan]>) -> Result<SmallMoveReport> {
    let adjacent: Vec<f64> = groundtruth.windows(2).map(|w| offset_ratio(&w[0], &w[1])).collect();
    let spans = spans
        .unwrap_or_default()
        .iter()
        .map(|s| {
            if s.start > s.end || s.end >= groundtruth.len() {
                return Err(Error::InvalidConfig(format!(
                    "occlusion span {}..{} outside a {}-frame sequence",
                    s.start,
                    s.end,
                    groundtruth.len()
                )));
            }
            Ok(offset_ratio(&groundtruth[s.start], &groundtruth[s.end]))
        })
        .collect::<Result<Vec<_>>>()?;
    let small = adjacent.iter().chain(&spans).all(|t| *t <= SMALL_MOVE_THRESHOLD);
    Ok(SmallMoveReport { small, adjacent, spans })
}

/// One-pass evaluation scores.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationResult {
    pub precision_thresholds: Vec<f64>,
    /// Fraction of frames with center error ≤ threshold.
    pub precision_curve: Vec<f64>,
    pub success_thresholds: Vec<f64>,
    /// Fraction of frames with IoU ≥ threshold.
    pub success_curve: Vec<f64>,
    pub precision_at_20: f64,
    /// Mean of the success curve samples.
    pub auc: f64,
    pub center_errors: Vec<f64>,
    pub ious: Vec<f64>,
}

/// Scores predictions against ground truth, frame 1 included.
pub fn evaluate_ope(pred: &[BoundingBox], gt: &[BoundingBox]) -> Result<EvaluationResult> {
    if pred.len() != gt.len() {
        return Err(Error::mismatch(format!("{} predicted boxes", gt.len()), pred.len()));
    }
    if gt.is_empty() {
        return Err(Error::InvalidDimension("cannot evaluate an empty sequence".into()));
    }
    let n = gt.len() as f64;
    let center_errors: Vec<f64> = pred.iter().zip(gt).map(|(p, g)| center_error(p, g)).collect();
    let ious: Vec<f64> = pred.iter().zip(gt).map(|(p, g)| iou(p, g)).collect();
    let fraction = |hits: usize| hits as f64 / n;
    let precision_thresholds = precision_thresholds();
    let precision_curve: Vec<f64> = precision_thresholds
        .iter()
        .map(|t| fraction(center_errors.iter().filter(|e| **e <= *t).count()))
        .collect();
    let success_thresholds = success_thresholds();
    let success_curve: Vec<f64> = success_thresholds
        .iter()
        .map(|t| fraction(ious.iter().filter(|v| **v >= *t).count()))
        .collect();
    let auc = success_curve.iter().sum::<f64>() / success_curve.len() as f64;
    Ok(EvaluationResult {
        precision_at_20: precision_curve[20],
        precision_thresholds,
        precision_curve,
        success_thresholds,
        success_curve,
        auc,
        center_errors,
        ious,
    })
}

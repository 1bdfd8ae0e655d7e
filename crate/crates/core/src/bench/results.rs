//! Result files.
//!
//! Text format: a header line `frame,x,y,w,h,peak,time_ms` followed by one record per
//! frame. `frame` is 1-based, the box is 0-indexed pixels (top-left, width, height),
//! `peak` is the winning response value (empty for the first frame) and `time_ms` the
//! wall time of the frame. The delimiter is a comma or a tab.
//!
//! JSON format: `{"frames": [FrameRecord…], "summary": RunSummary}`.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::BoundingBox;
use crate::tracker::RunReport;

pub const RESULTS_HEADER: [&str; 7] = ["frame", "x", "y", "w", "h", "peak", "time_ms"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub frame: usize,
    pub x: f64,
    pub y: f64,
    pub w: f64,
    pub h: f64,
    pub peak: Option<f64>,
    pub time_ms: f64,
}

impl FrameRecord {
    pub fn bbox(&self) -> Result<BoundingBox> {
        BoundingBox::new(self.x, self.y, self.w, self.h)
    }

    pub fn from_report(report: &RunReport) -> Vec<FrameRecord> {
        report
            .boxes
            .iter()
            .zip(&report.peaks)
            .zip(&report.times_ms)
            .enumerate()
            .map(|(i, ((b, p), t))| FrameRecord {
                frame: i + 1,
                x: b.x,
                y: b.y,
                w: b.w,
                h: b.h,
                peak: *p,
                time_ms: *t,
            })
            .collect()
    }
}

/// Per-run summary stored next to the frame records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub sequence: String,
    pub solver: String,
    pub frames: usize,
    pub precision_at_20: Option<f64>,
    pub auc: Option<f64>,
    pub mean_fps: Option<f64>,
}

/// Renders records as delimiter-separated text. Floats use the shortest exact form.
pub fn write_results_text(records: &[FrameRecord], delimiter: char) -> String {
    let d = delimiter.to_string();
    let mut out = RESULTS_HEADER.join(&d);
    out.push('\n');
    for r in records {
        let peak = r.peak.map(|p| p.to_string()).unwrap_or_default();
        let fields = [
            r.frame.to_string(),
            r.x.to_string(),
            r.y.to_string(),
            r.w.to_string(),
            r.h.to_string(),
            peak,
            r.time_ms.to_string(),
        ];
        out.push_str(&fields.join(&d));
        out.push('\n');
    }
    out
}

pub fn write_results_json(records: &[FrameRecord], summary: &RunSummary) -> String {
    let doc = serde_json::json!({ "frames": records, "summary": summary });
    serde_json::to_string_pretty(&doc).expect("records serialize")
}

/// `threshold<delim>value` lines under a `threshold,value` header.
pub fn write_curve_table(thresholds: &[f64], values: &[f64], delimiter: char) -> String {
    let mut out = format!("threshold{delimiter}value\n");
    for (t, v) in thresholds.iter().zip(values) {
        out.push_str(&format!("{t}{delimiter}{v}\n"));
    }
    out
}

fn parse_text(text: &str, path: &Path) -> Result<Vec<FrameRecord>> {
    let mut records = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split([',', '\t']).map(str::trim).collect();
        if records.is_empty() && fields.first() == Some(&"frame") {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        if fields.len() != RESULTS_HEADER.len() {
            return Err(err(format!("expected {} fields, found {}", RESULTS_HEADER.len(), fields.len())));
        }
        let num = |k: usize| {
            fields[k]
                .parse::<f64>()
                .map_err(|e| err(format!("{}: {:?}: {e}", RESULTS_HEADER[k], fields[k])))
        };
        let frame = fields[0]
            .parse::<usize>()
            .map_err(|e| err(format!("frame: {:?}: {e}", fields[0])))?;
        let peak = if fields[5].is_empty() { None } else { Some(num(5)?) };
        let r = FrameRecord {
            frame,
            x: num(1)?,
            y: num(2)?,
            w: num(3)?,
            h: num(4)?,
            peak,
            time_ms: num(6)?,
        };
        r.bbox().map_err(|e| err(e.to_string()))?;
        records.push(r);
    }
    Ok(records)
}

/// Reads either format; JSON is recognized by a leading `{`.
pub fn read_results(path: &Path) -> Result<Vec<FrameRecord>> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    if text.trim_start().starts_with('{') {
        #[derive(Deserialize)]
        struct Doc {
            frames: Vec<FrameRecord>,
        }
        let doc: Doc = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            message: e.to_string(),
        })?;
        return Ok(doc.frames);
    }
    parse_text(&text, path)
}

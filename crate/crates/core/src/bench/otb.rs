use std::fs;
use std::path::{Path, PathBuf};

use super::{OcclusionSpan, Sequence};
use crate::error::{Error, Result};
use crate::features::{BoundingBox, ImageFrame};

/// Ground-truth file names tried in order.
pub const GROUNDTRUTH_FILES: [&str; 2] = ["groundtruth_rect.txt", "groundtruth.txt"];
/// Optional per-sequence occlusion annotation.
pub const OCCLUSION_FILE: &str = "occlusion.txt";

fn numbers(line: &str) -> Vec<&str> {
    line.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .collect()
}

/// Parses `x,y,w,h` lines (comma, tab or space separated, 1-indexed) into 0-indexed boxes.
/// Blank lines are skipped.
pub fn parse_groundtruth(text: &str, path: &Path) -> Result<Vec<BoundingBox>> {
    let mut boxes = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let fields = numbers(line);
        if fields.len() != 4 {
            return Err(err(format!("expected 4 values x,y,w,h, found {}", fields.len())));
        }
        let v = fields
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| err(format!("{f:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        let b = BoundingBox::new(v[0] - 1.0, v[1] - 1.0, v[2], v[3]).map_err(|e| err(e.to_string()))?;
        boxes.push(b);
    }
    Ok(boxes)
}

/// Parses `start_frame,end_frame` lines (1-indexed, inclusive).
pub fn parse_occlusions(text: &str, path: &Path) -> Result<Vec<OcclusionSpan>> {
    let mut spans = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let fields = numbers(line);
        let [s, e] = fields.as_slice() else {
            return Err(err(format!("expected start,end, found {} values", fields.len())));
        };
        let parse = |f: &str| match f.parse::<usize>() {
            Ok(v) if v >= 1 => Ok(v - 1),
            _ => Err(err(format!("{f:?} is not a 1-based frame number"))),
        };
        let (start, end) = (parse(s)?, parse(e)?);
        if start > end {
            return Err(err(format!("span starts after it ends ({s} > {e})")));
        }
        spans.push(OcclusionSpan { start, end });
    }
    Ok(spans)
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Numbered frames in `img/`, ordered by their numeric file stem.
pub fn list_frames(dir: &Path) -> Result<Vec<PathBuf>> {
    let img = dir.join("img");
    let entries = fs::read_dir(&img).map_err(|source| Error::Io {
        path: img.clone(),
        source,
    })?;
    let mut frames = Vec::new();
    for entry in entries {
        let path = entry
            .map_err(|source| Error::Io {
                path: img.clone(),
                source,
            })?
            .path();
        let ext = path
            .extension()
            .and_then(|e| e.to_str())
            .map(str::to_ascii_lowercase);
        if !matches!(ext.as_deref(), Some("jpg" | "jpeg" | "png")) {
            continue;
        }
        if let Some(n) = path.file_stem().and_then(|s| s.to_str()).and_then(|s| s.parse::<u64>().ok()) {
            frames.push((n, path));
        }
    }
    frames.sort();
    Ok(frames.into_iter().map(|(_, p)| p).collect())
}

/// Loads a sequence in the OTB layout: `img/0001.jpg …` plus a ground-truth file.
///
/// When frame and box counts differ, both are cut to the shorter length and a warning
/// is recorded on the sequence.
pub fn load_otb_sequence(dir: &Path) -> Result<Sequence> {
    let gt_path = GROUNDTRUTH_FILES
        .iter()
        .map(|f| dir.join(f))
        .find(|p| p.is_file())
        .ok_or_else(|| Error::Io {
            path: dir.join(GROUNDTRUTH_FILES[0]),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "no ground-truth file"),
        })?;
    let mut groundtruth = parse_groundtruth(&read(&gt_path)?, &gt_path)?;
    let mut frames = list_frames(dir)?;
    let mut warnings = Vec::new();
    if frames.len() != groundtruth.len() {
        let n = frames.len().min(groundtruth.len());
        let msg = format!(
            "{} frames but {} ground-truth boxes; truncated to {n}",
            frames.len(),
            groundtruth.len()
        );
        log::warn!("{}: {msg}", dir.display());
        warnings.push(msg);
        frames.truncate(n);
        groundtruth.truncate(n);
    }
    if frames.is_empty() {
        return Err(Error::Sequence {
            index: 0,
            message: format!("{} has no usable frames", dir.display()),
        });
    }
    let occ_path = dir.join(OCCLUSION_FILE);
    let occlusions = if occ_path.is_file() {
        parse_occlusions(&read(&occ_path)?, &occ_path)?
    } else {
        Vec::new()
    };
    let first = ImageFrame::load(&frames[0]).map_err(|e| Error::Sequence {
        index: 0,
        message: e.to_string(),
    })?;
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| dir.display().to_string());
    let mut seq = Sequence::from_files(name, frames, groundtruth, &first)?;
    seq.occlusions = occlusions;
    seq.warnings = warnings;
    Ok(seq)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn groundtruth_is_shifted_to_zero_based() {
        let p = Path::new("gt.txt");
        let comma = parse_groundtruth("10,20,30,40\n\n11,21,30,40\n", p).unwrap();
        assert_eq!(comma[0], BoundingBox::new(9.0, 19.0, 30.0, 40.0).unwrap());
        assert_eq!(comma.len(), 2);
        let tab = parse_groundtruth("10\t20\t30\t40\n11\t21\t30\t40", p).unwrap();
        assert_eq!(comma, tab);
    }

    #[test]
    fn bad_line_reports_its_number() {
        match parse_groundtruth("1,2,3,4\n1,2,x,4\n", Path::new("g")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match parse_groundtruth("1,2,3\n", Path::new("g")) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 1),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn occlusion_spans() {
        let p = Path::new("o");
        assert_eq!(
            parse_occlusions("3,7\n10 12\n", p).unwrap(),
            vec![OcclusionSpan { start: 2, end: 6 }, OcclusionSpan { start: 9, end: 11 }]
        );
        assert!(parse_occlusions("7,3", p).is_err());
        assert!(parse_occlusions("0,3", p).is_err());
    }
}

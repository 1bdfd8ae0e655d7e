use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use mkcf_core::bench::SynthSpec;
use mkcf_core::tracker::EffectiveConfig;
use mkcf_core::Error;
use serde::Serialize;

/// Process exit status classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum ExitKind {
    Success = 0,
    Usage = 2,
    Io = 3,
    Numerical = 4,
    Drift = 5,
}

#[derive(Debug)]
pub struct CliError {
    pub kind: ExitKind,
    pub error: anyhow::Error,
}

impl CliError {
    pub fn usage(msg: impl Display) -> Self {
        Self {
            kind: ExitKind::Usage,
            error: anyhow::anyhow!("{msg}"),
        }
    }

    pub fn io(path: &Path, e: impl Display) -> Self {
        Self {
            kind: ExitKind::Io,
            error: anyhow::anyhow!("{}: {e}", path.display()),
        }
    }

    pub fn numerical(msg: impl Display) -> Self {
        Self {
            kind: ExitKind::Numerical,
            error: anyhow::anyhow!("{msg}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let kind = match &e {
            _ if e.is_numerical() => ExitKind::Numerical,
            Error::Io { .. } | Error::Image { .. } | Error::Parse { .. } | Error::Sequence { .. } => ExitKind::Io,
            _ => ExitKind::Usage,
        };
        Self {
            kind,
            error: e.into(),
        }
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Writes through a temporary file in the same directory, then renames over `path`.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<(), CliError> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| CliError::io(dir, e))?;
    tmp.write_all(contents).map_err(|e| CliError::io(path, e))?;
    tmp.persist(path).map_err(|e| CliError::io(path, e.error))?;
    Ok(())
}

#[derive(Debug, Default, Serialize)]
pub struct Inputs {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sequence: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub synth: Option<SynthSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub results: Option<PathBuf>,
}

#[derive(Debug, Default, Serialize)]
pub struct Timing {
    pub total_ms: f64,
    pub frames: Option<usize>,
    /// Mean tracker throughput over frames 2..N.
    pub mean_fps: Option<f64>,
}

/// One per invocation, written as `manifest.json` in the output directory.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub args: Vec<String>,
    pub seed: Option<u64>,
    pub inputs: Inputs,
    pub overrides: Vec<String>,
    /// Fully resolved tracker configuration, including choices made from the first frame.
    pub config: Option<EffectiveConfig>,
    pub outputs: Vec<PathBuf>,
    pub timing: Timing,
    pub summary: serde_json::Value,
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn new(command: &str, args: &[String]) -> Self {
        Self {
            tool: "mkcf",
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            args: args.to_vec(),
            seed: None,
            inputs: Inputs::default(),
            overrides: Vec::new(),
            config: None,
            outputs: Vec::new(),
            timing: Timing::default(),
            summary: serde_json::Value::Null,
            warnings: Vec::new(),
        }
    }

    /// Writes `contents` to `dir/name` and records it.
    pub fn emit(&mut self, dir: &Path, name: &str, contents: &[u8]) -> Result<PathBuf, CliError> {
        let path = dir.join(name);
        write_atomic(&path, contents)?;
        self.outputs.push(path.clone());
        Ok(path)
    }

    pub fn finish(mut self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join("manifest.json");
        self.outputs.push(path.clone());
        let text = serde_json::to_string_pretty(&self).expect("manifest serializes");
        write_atomic(&path, text.as_bytes())
    }
}

//! `mkcf`: track, evaluate, synthesize and check the solvers from the command line.
//!
//! Exit status: 0 success, 2 usage or configuration error, 3 input/output error,
//! 4 numerical failure (or a violated diagnostic check), 5 tracking finished but the
//! target drifted out of the frame at least once.

mod diag;
mod eval;
mod output;
mod synth;
mod track;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mkcf_core::bench::{load_otb_sequence, synth_sequence, Sequence, SynthSpec};

pub use output::{CliError, ExitKind};

#[derive(Debug, Parser)]
#[command(name = "mkcf", version, about = "Multi-kernel correlation filter tracking")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Track one sequence and write per-frame results plus a manifest.
    Track(track::TrackArgs),
    /// Score a results file against a sequence's ground truth.
    Eval(eval::EvalArgs),
    /// Numerical checks of the upper-bound solver.
    Diag {
        #[command(subcommand)]
        check: diag::DiagCommand,
    },
    /// Render a synthetic sequence to disk in the OTB layout.
    Synth(synth::SynthArgs),
}

/// Where the frames and ground truth come from.
#[derive(Debug, Clone, Args)]
pub struct SourceArgs {
    /// Sequence directory in the OTB layout (`img/0001.jpg…` and `groundtruth_rect.txt`).
    #[arg(long, conflicts_with = "synth", required_unless_present = "synth")]
    pub sequence: Option<PathBuf>,
    /// Synthetic preset (translation, zoom, static, phase-switch) or a JSON spec file.
    #[arg(long, requires = "seed")]
    pub synth: Option<String>,
    /// Seed for synthetic frames; mandatory with --synth.
    #[arg(long)]
    pub seed: Option<u64>,
}

impl SourceArgs {
    pub fn load(&self) -> Result<(Sequence, Option<SynthSpec>), CliError> {
        if let Some(dir) = &self.sequence {
            return Ok((load_otb_sequence(dir)?, None));
        }
        let name = self.synth.as_deref().expect("clap enforces a source");
        let seed = self.seed.expect("clap enforces --seed with --synth");
        let spec = synth_spec(name)?;
        Ok((synth_sequence(&spec, seed)?, Some(spec)))
    }
}

/// A preset name, or a path to a JSON `SynthSpec`.
pub fn synth_spec(name: &str) -> Result<SynthSpec, CliError> {
    let path = PathBuf::from(name);
    if path.extension().is_some_and(|e| e == "json") || path.is_file() {
        let text = std::fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        return serde_json::from_str(&text)
            .map_err(|e| CliError::usage(format!("{}: invalid synthetic spec: {e}", path.display())));
    }
    Ok(SynthSpec::preset(name)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Tsv,
    Json,
}

impl Format {
    pub fn delimiter(self) -> char {
        if self == Format::Tsv {
            '\t'
        } else {
            ','
        }
    }

    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Tsv => "tsv",
            Format::Json => "json",
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let args: Vec<String> = std::env::args().collect();
    let result = match cli.command {
        Command::Track(a) => track::run(a, &args),
        Command::Eval(a) => eval::run(a, &args),
        Command::Diag { check } => diag::run(check, &args),
        Command::Synth(a) => synth::run(a, &args),
    };
    match result {
        Ok(kind) => ExitCode::from(kind as u8),
        Err(e) => {
            eprintln!("error: {}", e.error);
            ExitCode::from(e.kind as u8)
        }
    }
}

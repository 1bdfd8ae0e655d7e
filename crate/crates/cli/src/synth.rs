use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use mkcf_core::bench::{synth_sequence, GROUNDTRUTH_FILES};
use mkcf_core::tracker::FrameSource;
use serde_json::json;

use crate::output::{ensure_dir, RunManifest};
use crate::{synth_spec, CliError, ExitKind};

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Preset name or JSON spec file.
    #[arg(long)]
    synth: String,
    #[arg(long)]
    seed: u64,
    /// Sequence directory to create (`img/` plus the ground-truth file).
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: SynthArgs, argv: &[String]) -> Result<ExitKind, CliError> {
    let started = Instant::now();
    let spec = synth_spec(&args.synth)?;
    let seq = synth_sequence(&spec, args.seed)?;
    let img = args.out.join("img");
    ensure_dir(&img)?;
    let mut manifest = RunManifest::new("synth", argv);
    manifest.seed = Some(args.seed);
    manifest.inputs.synth = Some(spec);
    for i in 0..seq.len() {
        let path = img.join(format!("{:04}.png", i + 1));
        // render next to the target and rename so a partial frame never appears
        let tmp = img.join(format!(".{:04}.png.tmp", i + 1));
        seq.frame(i)?.save_png(&tmp)?;
        std::fs::rename(&tmp, &path).map_err(|e| CliError::io(&path, e))?;
    }
    // boxes are written 1-indexed, the convention of the format
    let gt: String = seq
        .groundtruth
        .iter()
        .map(|b| format!("{},{},{},{}\n", b.x + 1.0, b.y + 1.0, b.w, b.h))
        .collect();
    manifest.emit(&args.out, GROUNDTRUTH_FILES[0], gt.as_bytes())?;
    manifest.summary = json!({ "sequence": seq.name, "frames": seq.len() });
    manifest.timing.frames = Some(seq.len());
    manifest.timing.total_ms = started.elapsed().as_secs_f64() * 1e3;
    manifest.finish(&args.out)?;
    println!("{}: {} frames written to {}", seq.name, seq.len(), args.out.display());
    Ok(ExitKind::Success)
}

use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use mkcf_core::bench::{evaluate_ope, write_results_json, write_results_text, FrameRecord, RunSummary};
use mkcf_core::tracker::{run_sequence, SolverKind, TrackerConfig};

use crate::output::{ensure_dir, RunManifest};
use crate::{CliError, ExitKind, Format, SourceArgs};

#[derive(Debug, Args)]
pub struct TrackArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// kcf, kcfscale, mkcf or mkcfup.
    #[arg(long, default_value = "mkcfup")]
    solver: String,
    /// Config override `key=value`; dotted keys reach nested fields (repeatable).
    #[arg(long = "config", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Number of pyramid scales (odd).
    #[arg(long)]
    scales: Option<usize>,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

pub fn run(args: TrackArgs, argv: &[String]) -> Result<ExitKind, CliError> {
    let started = Instant::now();
    let solver = SolverKind::parse(&args.solver)?;
    let mut config = TrackerConfig::for_solver(solver);
    config.apply_overrides(&args.overrides)?;
    if let Some(n) = args.scales {
        config.scale_count = n;
        config.validate()?;
    }
    let (seq, spec) = args.source.load()?;
    ensure_dir(&args.out)?;

    let report = run_sequence(&seq, seq.init_box(), &config)?;
    let eval = evaluate_ope(&report.boxes, &seq.groundtruth)?;
    let summary = RunSummary {
        sequence: seq.name.clone(),
        solver: solver.name().into(),
        frames: report.boxes.len(),
        precision_at_20: Some(eval.precision_at_20),
        auc: Some(eval.auc),
        mean_fps: report.mean_fps(),
    };
    let records = FrameRecord::from_report(&report);
    let text = match args.format {
        Format::Json => write_results_json(&records, &summary),
        f => write_results_text(&records, f.delimiter()),
    };

    let mut manifest = RunManifest::new("track", argv);
    manifest.seed = args.source.seed;
    manifest.inputs.sequence = args.source.sequence.clone();
    manifest.inputs.synth = spec;
    manifest.overrides = args.overrides.clone();
    manifest.config = Some(report.effective.clone());
    manifest.emit(&args.out, &format!("results.{}", args.format.extension()), text.as_bytes())?;
    manifest.warnings = seq.warnings.clone();
    if !report.drift_frames.is_empty() {
        let msg = format!(
            "target left the frame {} time(s); first at frame {}",
            report.drift_frames.len(),
            report.drift_frames[0] + 1
        );
        log::warn!("{msg}");
        manifest.warnings.push(msg);
    }
    manifest.timing.frames = Some(report.boxes.len());
    manifest.timing.mean_fps = report.mean_fps();
    manifest.summary = serde_json::to_value(&summary).expect("summary serializes");
    manifest.timing.total_ms = started.elapsed().as_secs_f64() * 1e3;
    manifest.finish(&args.out)?;

    println!(
        "{} {}: {} frames, precision@20 {:.3}, AUC {:.3}, {:.1} fps",
        seq.name,
        solver.name(),
        summary.frames,
        eval.precision_at_20,
        eval.auc,
        summary.mean_fps.unwrap_or(0.0)
    );
    Ok(if report.drift_frames.is_empty() {
        ExitKind::Success
    } else {
        ExitKind::Drift
    })
}

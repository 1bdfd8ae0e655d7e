use std::path::PathBuf;
use std::time::Instant;

use clap::Args;
use mkcf_core::bench::{evaluate_ope, is_small_move, read_results, write_curve_table, SMALL_MOVE_THRESHOLD};
use mkcf_core::features::BoundingBox;
use serde_json::json;

use crate::output::{ensure_dir, RunManifest};
use crate::{CliError, ExitKind, SourceArgs};

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Results file written by `mkcf track` (text or JSON).
    #[arg(long)]
    results: PathBuf,
    #[command(flatten)]
    source: SourceArgs,
    /// Only score the sequence when every offset ratio is small; otherwise report it as
    /// excluded.
    #[arg(long)]
    small_move_only: bool,
    /// Output directory for the curve tables and the manifest.
    #[arg(long)]
    out: PathBuf,
}

pub fn run(args: EvalArgs, argv: &[String]) -> Result<ExitKind, CliError> {
    let started = Instant::now();
    let records = read_results(&args.results)?;
    let mut pred = records
        .iter()
        .map(|r| r.bbox())
        .collect::<Result<Vec<BoundingBox>, _>>()?;
    let (seq, spec) = args.source.load()?;
    ensure_dir(&args.out)?;

    let mut manifest = RunManifest::new("eval", argv);
    manifest.seed = args.source.seed;
    manifest.inputs.sequence = args.source.sequence.clone();
    manifest.inputs.synth = spec;
    manifest.inputs.results = Some(args.results.clone());
    manifest.warnings = seq.warnings.clone();

    let mut gt = seq.groundtruth.clone();
    if pred.len() != gt.len() {
        let n = pred.len().min(gt.len());
        let msg = format!("{} predicted boxes but {} ground-truth boxes; truncated to {n}", pred.len(), gt.len());
        log::warn!("{msg}");
        manifest.warnings.push(msg);
        pred.truncate(n);
        gt.truncate(n);
    }

    if args.small_move_only {
        let spans: Vec<_> = seq.occlusions.iter().copied().filter(|s| s.end < gt.len()).collect();
        let verdict = is_small_move(&gt, Some(&spans))?;
        let max_tau = verdict.adjacent.iter().chain(&verdict.spans).copied().fold(0.0, f64::max);
        println!(
            "{}: max offset ratio {max_tau:.3} ({} move, threshold {SMALL_MOVE_THRESHOLD})",
            seq.name,
            if verdict.small { "small" } else { "large" }
        );
        if !verdict.small {
            manifest.summary = json!({ "sequence": seq.name, "excluded": true, "max_offset_ratio": max_tau });
            manifest.timing.total_ms = started.elapsed().as_secs_f64() * 1e3;
            manifest.finish(&args.out)?;
            return Ok(ExitKind::Success);
        }
    }

    let eval = evaluate_ope(&pred, &gt)?;
    manifest.emit(
        &args.out,
        "precision.csv",
        write_curve_table(&eval.precision_thresholds, &eval.precision_curve, ',').as_bytes(),
    )?;
    manifest.emit(
        &args.out,
        "success.csv",
        write_curve_table(&eval.success_thresholds, &eval.success_curve, ',').as_bytes(),
    )?;
    let summary = json!({
        "sequence": seq.name,
        "frames": gt.len(),
        "precision_at_20": eval.precision_at_20,
        "auc": eval.auc,
        "excluded": false,
    });
    manifest.emit(
        &args.out,
        "evaluation.json",
        serde_json::to_string_pretty(&eval).expect("evaluation serializes").as_bytes(),
    )?;
    manifest.summary = summary;
    manifest.timing.frames = Some(gt.len());
    manifest.timing.total_ms = started.elapsed().as_secs_f64() * 1e3;
    manifest.finish(&args.out)?;
    println!(
        "{}: {} frames, precision@20 {:.4}, AUC {:.4}",
        seq.name,
        gt.len(),
        eval.precision_at_20,
        eval.auc
    );
    Ok(ExitKind::Success)
}

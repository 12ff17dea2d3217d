//! `eval` and `report`.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use haptic_core::adjectives::{AdjectiveLabelSet, ADJECTIVES};
use haptic_core::eval::{aggregate, evaluate, AdjectiveAuc, EvalReport, EvalRun};
use haptic_core::io::{load_manifest, write_file, FeatureSet, PreparedDataset, RunEntry, RunIndex, RunKind};
use haptic_core::{Error, Result};

use crate::args::{EvalArgs, ReportArgs};
use crate::common::{haptic_object_score, load_entry_checkpoint, load_run, resolve};

fn entry_auc(
    root: &Path,
    kind: RunKind,
    entry: &RunEntry,
    labels: &[AdjectiveLabelSet],
    prepared: Option<&PreparedDataset>,
) -> Result<AdjectiveAuc> {
    let ckpt = load_entry_checkpoint(root, entry)?;
    let trained_on: BTreeSet<u32> = entry.split.train.iter().copied().collect();
    match kind {
        RunKind::HapticCnn | RunKind::HapticLstm => {
            let prepared = prepared.ok_or_else(|| {
                Error::InvalidInput("haptic runs need the prepared archive (--input)".into())
            })?;
            evaluate(&entry.split, &trained_on, labels, |o| haptic_object_score(&ckpt, prepared, o))
        }
        RunKind::Linear => {
            let path = entry
                .features
                .as_ref()
                .ok_or_else(|| Error::InvalidInput(format!("linear entry `{}` has no features", entry.adjective)))?;
            let set = FeatureSet::load(&resolve(root, path))?;
            evaluate(&entry.split, &trained_on, labels, |o| {
                let (mut sum, mut n) = (0.0, 0usize);
                for f in set.items.iter().filter(|f| f.object_id == o) {
                    sum += ckpt.network.score(&f.values)?;
                    n += 1;
                }
                if n == 0 {
                    return Err(Error::InvalidInput(format!("object {o} has no features")));
                }
                Ok(sum / n as f64)
            })
        }
    }
}

/// One evaluation per split seed, with adjectives in table order.
/// Skipped adjectives are reported as `n/a`.
pub fn evaluate_run(
    root: &Path,
    run: &RunIndex,
    labels: &[AdjectiveLabelSet],
    prepared: Option<&PreparedDataset>,
) -> Result<Vec<EvalRun>> {
    let mut out = Vec::new();
    for seed in run.seeds() {
        let mut results = Vec::new();
        for adjective in ADJECTIVES {
            if let Some(entry) = run.entries.iter().find(|e| e.split.seed == seed && e.adjective == adjective) {
                results.push(entry_auc(root, run.kind, entry, labels, prepared)?);
            } else if run.skipped.iter().any(|s| s.seed == seed && s.adjective == adjective) {
                results.push(AdjectiveAuc {
                    adjective: adjective.into(),
                    auc: None,
                });
            }
        }
        out.push(EvalRun {
            seed,
            config: run.config.clone(),
            results,
        });
    }
    Ok(out)
}

pub fn eval_csv(run: &EvalRun) -> String {
    let mut s = String::from("adjective,auc\n");
    for r in &run.results {
        s.push_str(&format!("{},{}\n", r.adjective, r.auc.map_or("n/a".into(), |a| a.to_string())));
    }
    s
}

pub fn eval_command(root: &Path, args: &EvalArgs) -> Result<Vec<EvalRun>> {
    let run = load_run(root, &args.checkpoint)?;
    let manifest_path = resolve(root, &args.manifest);
    let manifest = load_manifest(&manifest_path)?;
    let labels = manifest.load_labels(manifest_path.parent().unwrap_or(Path::new(".")))?;
    let prepared = args
        .input
        .as_ref()
        .map(|p| PreparedDataset::load(&resolve(root, p)))
        .transpose()?;
    let runs = evaluate_run(root, &run, &labels, prepared.as_ref())?;
    for r in &runs {
        let stem = format!("eval-s{}", r.seed);
        write_file(&resolve(root, &args.out.join(format!("{stem}.txt"))), r.to_text().as_bytes())?;
        write_file(&resolve(root, &args.out.join(format!("{stem}.csv"))), eval_csv(r).as_bytes())?;
    }
    Ok(runs)
}

/// Evaluation files named directly, plus `eval-s*.txt` inside directories.
pub fn collect_eval_files(root: &Path, inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for input in inputs {
        let p = resolve(root, input);
        if p.is_dir() {
            let rd = fs::read_dir(&p).map_err(|e| Error::InvalidInput(format!("{}: {e}", p.display())))?;
            let mut found: Vec<PathBuf> = rd
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| {
                    f.file_name()
                        .and_then(|n| n.to_str())
                        .is_some_and(|n| n.starts_with("eval-s") && n.ends_with(".txt"))
                })
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(p);
        }
    }
    if files.is_empty() {
        return Err(Error::InvalidInput("no evaluation files found".into()));
    }
    Ok(files)
}

pub fn report_command(root: &Path, args: &ReportArgs) -> Result<EvalReport> {
    let runs = collect_eval_files(root, &args.input)?
        .iter()
        .map(|f| EvalRun::parse(&haptic_core::io::read_text(f)?, f))
        .collect::<Result<Vec<_>>>()?;
    let report = aggregate(&runs)?;
    write_file(&resolve(root, &args.out.join("report.txt")), report.to_text().as_bytes())?;
    write_file(&resolve(root, &args.out.join("report.csv")), report.to_csv().as_bytes())?;
    Ok(report)
}

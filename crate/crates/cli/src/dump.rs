//! `dump-activations`: one instance's tap-layer output as a text grid.

use std::fmt::Write as _;
use std::path::Path;

use haptic_core::haptic::assemble_prepared;
use haptic_core::io::{load_checkpoint, write_file, PreparedDataset, RunIndex};
use haptic_core::model::Checkpoint;
use haptic_core::nn::Tensor;
use haptic_core::{Error, Result};

use crate::args::DumpArgs;
use crate::common::{load_entry_checkpoint, model_pca, resolve};

fn pick_checkpoint(root: &Path, args: &DumpArgs) -> Result<Checkpoint> {
    let path = resolve(root, &args.checkpoint);
    if path.extension().is_some_and(|e| e == "json") {
        let run = RunIndex::load(&path)?;
        let entry = run
            .entries
            .iter()
            .find(|e| e.split.seed == args.seed && args.adjective.as_ref().is_none_or(|a| *a == e.adjective))
            .ok_or_else(|| Error::InvalidInput(format!("run has no model for seed {} and the given adjective", args.seed)))?;
        load_entry_checkpoint(root, entry)
    } else {
        load_checkpoint(&path)
    }
}

/// Rows of whitespace-separated values; a rank-1 tensor is one row.
pub fn grid_text(t: &Tensor) -> String {
    let cols = *t.shape().last().unwrap_or(&0);
    let mut s = String::new();
    for row in t.data().chunks(cols.max(1)) {
        let line: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    s
}

pub fn dump_command(root: &Path, args: &DumpArgs) -> Result<Tensor> {
    let ckpt = pick_checkpoint(root, args)?;
    let prepared = PreparedDataset::load(&resolve(root, &args.input))?;
    let object = match args.object {
        Some(o) => o,
        None => *prepared
            .object_ids()
            .first()
            .ok_or_else(|| Error::InvalidInput("prepared archive has no objects".into()))?,
    };
    let trial = prepared
        .trials_of(object)
        .find(|t| t.trial_index == args.trial)
        .ok_or_else(|| Error::InvalidInput(format!("object {object} has no trial {}", args.trial)))?;
    let inst = assemble_prepared(trial, args.finger, args.offset, model_pca(&ckpt, &prepared))?;
    let idx = ckpt.network.graph.tap_index(&args.tap_layer)?;
    let shapes = ckpt.network.graph.validate()?;
    let act = ckpt.network.tap(&inst.data, &args.tap_layer)?.reshape(shapes[idx].clone())?;
    write_file(&resolve(root, &args.out), grid_text(&act).as_bytes())?;
    Ok(act)
}

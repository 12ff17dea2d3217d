//! `extract`: tap-layer features of every trial under each trained model.

use std::collections::BTreeMap;
use std::path::Path;

use haptic_core::haptic::assemble_prepared;
use haptic_core::io::{FeatureSet, PreparedDataset, RunIndex, RunKind};
use haptic_core::model::{combine_instances, FeatureVector};
use haptic_core::{Error, Result};

use crate::args::{Combine, ExtractArgs};
use crate::common::{load_entry_checkpoint, load_run, model_pca, model_stem, resolve};

pub const FEATURES_FILE: &str = "features.json";

/// Features for finger 0 at offset 0, one vector per trial, optionally
/// concatenated per object over its trials.
pub fn extract_features(
    root: &Path,
    prepared: &PreparedDataset,
    run: &RunIndex,
    tap: &str,
    combine: Combine,
    out: &Path,
) -> Result<RunIndex> {
    if run.kind == RunKind::Linear {
        return Err(Error::InvalidInput("features come from haptic CNN or LSTM runs".into()));
    }
    if combine == Combine::Views {
        return Err(Error::InvalidInput("extract combines over trials only; views are combined by `fuse`".into()));
    }
    let combine_name = if combine == Combine::Trials { "trials" } else { "none" };
    let mut index = RunIndex::new(run.kind, format!("{} tap={tap} combine={combine_name}", run.config));
    index.skipped = run.skipped.clone();
    for entry in &run.entries {
        let ckpt = load_entry_checkpoint(root, entry)?;
        let pca = model_pca(&ckpt, prepared);
        let mut per_object: BTreeMap<u32, Vec<FeatureVector>> = BTreeMap::new();
        for trial in &prepared.trials {
            let inst = assemble_prepared(trial, 0, 0, pca)?;
            per_object.entry(trial.object_id).or_default().push(FeatureVector {
                object_id: trial.object_id,
                index: Some(trial.trial_index),
                values: ckpt.network.tap(&inst.data, tap)?,
            });
        }
        let items = match combine {
            Combine::Trials => per_object
                .values()
                .map(|fs| combine_instances(fs, prepared.trials_per_object as usize))
                .collect::<Result<Vec<_>>>()?,
            _ => per_object.into_values().flatten().collect(),
        };
        let set = FeatureSet {
            description: format!("tap={tap} combine={combine_name}"),
            items,
        };
        let rel = out.join(format!("{}.feat", model_stem(&entry.adjective, entry.split.seed)));
        set.save(&resolve(root, &rel))?;
        let mut e = entry.clone();
        e.features = Some(rel);
        index.entries.push(e);
    }
    index.save(&resolve(root, &out.join(FEATURES_FILE)))?;
    Ok(index)
}

pub fn extract_command(root: &Path, args: &ExtractArgs) -> Result<RunIndex> {
    let prepared = PreparedDataset::load(&resolve(root, &args.input))?;
    let run = load_run(root, &args.checkpoint)?;
    extract_features(root, &prepared, &run, &args.tap_layer, args.combine, &args.out)
}

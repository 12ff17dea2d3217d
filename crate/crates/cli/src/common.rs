use std::path::{Path, PathBuf};

use haptic_core::adjectives::{adjective_index, AdjectiveLabelSet, ADJECTIVE_COUNT};
use haptic_core::haptic::{augment_prepared, PcaSet};
use haptic_core::io::{load_checkpoint, PreparedDataset, RunEntry, RunIndex};
use haptic_core::model::Checkpoint;
use haptic_core::{Error, Result};

/// `path` under `root`, unless it is already absolute.
pub fn resolve(root: &Path, path: &Path) -> PathBuf {
    root.join(path)
}

/// Adjective indices for the given names, or all of them when empty.
pub fn adjective_list(names: &[String]) -> Result<Vec<usize>> {
    if names.is_empty() {
        return Ok((0..ADJECTIVE_COUNT).collect());
    }
    let mut out = Vec::with_capacity(names.len());
    for n in names {
        let j = adjective_index(n)?;
        if !out.contains(&j) {
            out.push(j);
        }
    }
    out.sort_unstable();
    Ok(out)
}

/// Deterministic per-model seed from the run seed and the model identity.
pub fn derive_seed(seed: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(seed ^ 0x6A09_E667_F3BC_C908, |acc, p| {
        let mut z = (acc ^ p).wrapping_add(0x9E37_79B9_7F4A_7C15);
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    })
}

pub fn labels_by_id(labels: &[AdjectiveLabelSet], id: u32) -> Result<&AdjectiveLabelSet> {
    labels
        .iter()
        .find(|l| l.object_id == id)
        .ok_or_else(|| Error::InvalidInput(format!("no labels for object {id}")))
}

/// The PCA a haptic model was trained with, falling back to the dataset's.
pub fn model_pca<'a>(checkpoint: &'a Checkpoint, prepared: &'a PreparedDataset) -> &'a PcaSet {
    checkpoint.meta.pca.as_ref().unwrap_or(&prepared.global_pca)
}

/// Mean score over every augmented instance of every trial of `object`.
pub fn haptic_object_score(checkpoint: &Checkpoint, prepared: &PreparedDataset, object: u32) -> Result<f64> {
    let pca = model_pca(checkpoint, prepared);
    let (mut sum, mut n) = (0.0, 0usize);
    for trial in prepared.trials_of(object) {
        for inst in augment_prepared(trial, pca)? {
            sum += checkpoint.network.score(&inst.data)?;
            n += 1;
        }
    }
    if n == 0 {
        return Err(Error::InvalidInput(format!("object {object} has no prepared trials")));
    }
    Ok(sum / n as f64)
}

pub fn load_entry_checkpoint(root: &Path, entry: &RunEntry) -> Result<Checkpoint> {
    load_checkpoint(&resolve(root, &entry.checkpoint))
}

pub fn load_run(root: &Path, path: &Path) -> Result<RunIndex> {
    RunIndex::load(&resolve(root, path))
}

/// File stem for one (adjective, split seed) model.
pub fn model_stem(adjective: &str, seed: u64) -> String {
    format!("{adjective}-s{seed}")
}

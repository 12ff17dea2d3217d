//! On-disk formats: tensor archives and checkpoints, trial files, visual
//! feature maps, labels, manifests, run indexes; plus the synthetic
//! dataset writer and a converter boundary for external recordings.

mod archive;
mod checkpoint;
mod dataset;
mod features;
mod labels;
mod manifest;
mod prepared;
mod run_index;
mod trial;

pub use archive::{TensorArchive, ARCHIVE_MAGIC, ARCHIVE_VERSION};
pub use checkpoint::{checkpoint_from_archive, checkpoint_to_archive, load_checkpoint, save_checkpoint};
pub use dataset::{synth_generate, synth_manifest, MANIFEST_FILE};
pub use features::{
    decode_feature_maps, encode_feature_maps, read_feature_maps, write_feature_maps, FeatureSet,
    FEATURE_MAP_MAGIC, FEATURE_MAP_VERSION,
};
pub use labels::{decode_labels, encode_labels};
pub use manifest::{
    load_manifest, save_manifest, DatasetManifest, Finding, HapticFileEntry, ObjectEntry, PreprocessParams,
    VisualFileEntry, MANIFEST_FORMAT, MANIFEST_VERSION,
};
pub use prepared::PreparedDataset;
pub use run_index::{RunEntry, RunIndex, RunKind, SkippedEntry, RUN_FORMAT, RUN_VERSION};
pub use trial::{
    decode_trial_csv, encode_trial_csv, read_recording, trial_paths, write_recording, TrialSidecar, TRIAL_FORMAT,
    TRIAL_VERSION,
};

use std::path::Path;

use crate::error::{Error, Result};

/// Writes `bytes`, creating parent directories.
pub fn write_file(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(path, e))
}

/// Entry point for recordings in other archive layouts. Only the layout
/// written by [`synth_generate`] and [`write_recording`] is read natively;
/// an adapter for another source converts into those files.
pub fn convert_external(source: &Path, _out: &Path) -> Result<DatasetManifest> {
    Err(Error::UnsupportedFormat {
        path: source.display().to_string(),
        reason: "no converter is available for this layout; write trial CSVs, sidecars, feature maps, \
                 labels.csv and a manifest instead"
            .into(),
    })
}

//! Writes a synthetic dataset to disk in the standard layout.

use std::path::{Path, PathBuf};

use super::features::write_feature_maps;
use super::labels::encode_labels;
use super::manifest::{
    save_manifest, DatasetManifest, HapticFileEntry, ObjectEntry, PreprocessParams, VisualFileEntry,
    MANIFEST_FORMAT, MANIFEST_VERSION,
};
use super::trial::{trial_paths, write_recording};
use crate::error::{Error, Result};
use crate::haptic::{Ep, FINGERS};
use crate::synth::{Synth, SynthConfig};
use crate::visual::{ImageNormParams, VIEWS};

pub const MANIFEST_FILE: &str = "manifest.json";

fn object_name(id: u32) -> String {
    format!("object-{id:03}")
}

fn visual_path(id: u32) -> PathBuf {
    PathBuf::from(format!("visual/o{id:03}.hvfm"))
}

/// The manifest a config produces, without generating any data.
pub fn synth_manifest(config: &SynthConfig) -> Result<DatasetManifest> {
    config.validate()?;
    let objects = config.objects as u32;
    let mut haptic_files = Vec::new();
    for object_id in 0..objects {
        for trial in 0..config.trials as u32 {
            for finger in 0..FINGERS {
                for ep in Ep::ALL {
                    let (csv, sidecar) = trial_paths(object_id, trial, finger, ep);
                    haptic_files.push(HapticFileEntry {
                        object_id,
                        trial,
                        finger,
                        ep,
                        csv,
                        sidecar,
                    });
                }
            }
        }
    }
    Ok(DatasetManifest {
        format: MANIFEST_FORMAT.into(),
        version: MANIFEST_VERSION,
        name: config.name.clone(),
        trials_per_object: config.trials as u32,
        views: VIEWS as u32,
        objects: (0..objects).map(|id| ObjectEntry { id, name: object_name(id) }).collect(),
        labels_file: PathBuf::from("labels.csv"),
        haptic_files,
        visual_files: (0..objects)
            .map(|object_id| VisualFileEntry {
                object_id,
                path: visual_path(object_id),
            })
            .collect(),
        preprocessing: PreprocessParams::default(),
        image_norm: ImageNormParams::default(),
    })
}

/// Generates the dataset under `dir` and returns its manifest, which is
/// also written to `dir/manifest.json`. Output is byte-identical per config.
pub fn synth_generate(config: &SynthConfig, dir: &Path) -> Result<DatasetManifest> {
    let manifest = synth_manifest(config)?;
    let synth = Synth::new(config.clone())?;
    for o in 0..config.objects {
        for t in 0..config.trials {
            let trial = synth.trial(o, t);
            for ((finger, ep), map) in &trial.recordings {
                write_recording(dir, o as u32, t as u32, *finger, *ep, map)?;
            }
        }
        write_feature_maps(&dir.join(visual_path(o as u32)), &synth.views(o))?;
    }
    let rows: Vec<_> = synth
        .labels()?
        .into_iter()
        .map(|l| (l, object_name(l.object_id)))
        .collect();
    super::write_file(&dir.join(&manifest.labels_file), encode_labels(&rows)?.as_bytes())?;
    let json = serde_json::to_string_pretty(config).map_err(|e| Error::InvalidInput(e.to_string()))?;
    super::write_file(&dir.join("synth.json"), json.as_bytes())?;
    save_manifest(&dir.join(MANIFEST_FILE), &manifest)?;
    Ok(manifest)
}

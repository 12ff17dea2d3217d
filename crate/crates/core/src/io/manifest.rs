use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::features::read_feature_maps;
use super::labels::decode_labels;
use super::trial::read_recording;
use crate::adjectives::AdjectiveLabelSet;
use crate::error::{Error, Result};
use crate::haptic::{Channel, Ep, HapticTrial, FINGERS, INSTANCE_LEN, OFFSETS, PAC_DECIMATION, PCA_COMPONENTS};
use crate::visual::{ImageNormParams, VisualFeatureMap, VIEWS};

pub const MANIFEST_FORMAT: &str = "haptic-manifest";
pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObjectEntry {
    pub id: u32,
    pub name: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HapticFileEntry {
    pub object_id: u32,
    pub trial: u32,
    pub finger: u8,
    pub ep: Ep,
    pub csv: PathBuf,
    pub sidecar: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VisualFileEntry {
    pub object_id: u32,
    pub path: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PreprocessParams {
    pub instance_len: usize,
    pub decimation: usize,
    pub pca_components: usize,
    pub offsets: Vec<usize>,
}

impl Default for PreprocessParams {
    fn default() -> Self {
        Self {
            instance_len: INSTANCE_LEN,
            decimation: PAC_DECIMATION,
            pca_components: PCA_COMPONENTS,
            offsets: OFFSETS.to_vec(),
        }
    }
}

/// Index of a dataset on disk. File paths are relative to the manifest's
/// directory.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetManifest {
    pub format: String,
    pub version: u32,
    pub name: String,
    pub trials_per_object: u32,
    pub views: u32,
    pub objects: Vec<ObjectEntry>,
    pub labels_file: PathBuf,
    pub haptic_files: Vec<HapticFileEntry>,
    pub visual_files: Vec<VisualFileEntry>,
    pub preprocessing: PreprocessParams,
    pub image_norm: ImageNormParams,
}

/// One validation problem, located by file and field.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Finding {
    pub file: String,
    pub field: String,
    pub message: String,
}

impl fmt::Display for Finding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}: {}", self.file, self.field, self.message)
    }
}

pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let text = super::read_text(path)?;
    let m: DatasetManifest = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        reason: e.to_string(),
    })?;
    if m.format != MANIFEST_FORMAT || m.version != MANIFEST_VERSION {
        return Err(Error::UnsupportedFormat {
            path: path.display().to_string(),
            reason: format!("expected {MANIFEST_FORMAT} v{MANIFEST_VERSION}, got {} v{}", m.format, m.version),
        });
    }
    Ok(m)
}

pub fn save_manifest(path: &Path, m: &DatasetManifest) -> Result<()> {
    let json = serde_json::to_string_pretty(m).map_err(|e| Error::InvalidInput(e.to_string()))?;
    super::write_file(path, json.as_bytes())
}

impl DatasetManifest {
    /// Labels in object-table order.
    pub fn load_labels(&self, base: &Path) -> Result<Vec<AdjectiveLabelSet>> {
        let path = base.join(&self.labels_file);
        let rows = decode_labels(&super::read_text(&path)?, &path)?;
        let by_id: BTreeMap<u32, AdjectiveLabelSet> = rows.into_iter().map(|(l, _)| (l.object_id, l)).collect();
        self.objects
            .iter()
            .map(|o| {
                by_id.get(&o.id).copied().ok_or_else(|| Error::Parse {
                    path: path.display().to_string(),
                    reason: format!("no labels for object {}", o.id),
                })
            })
            .collect()
    }

    /// All recordings of one trial.
    pub fn load_trial(&self, base: &Path, object_id: u32, trial: u32) -> Result<HapticTrial> {
        let mut out = HapticTrial::new(object_id, trial);
        for e in self.haptic_files.iter().filter(|e| e.object_id == object_id && e.trial == trial) {
            let (side, map) = read_recording(&base.join(&e.csv), &base.join(&e.sidecar))?;
            if (side.object_id, side.trial, side.finger, side.ep) != (e.object_id, e.trial, e.finger, e.ep) {
                return Err(Error::Parse {
                    path: e.sidecar.display().to_string(),
                    reason: "sidecar identity differs from the manifest entry".into(),
                });
            }
            out.recordings.insert((e.finger, e.ep), map);
        }
        if out.recordings.is_empty() {
            return Err(Error::InvalidInput(format!("object {object_id} has no trial {trial}")));
        }
        Ok(out)
    }

    pub fn load_views(&self, base: &Path, object_id: u32) -> Result<Vec<VisualFeatureMap>> {
        let e = self
            .visual_files
            .iter()
            .find(|e| e.object_id == object_id)
            .ok_or_else(|| Error::InvalidInput(format!("object {object_id} has no visual feature file")))?;
        read_feature_maps(&base.join(&e.path), object_id)
    }

    /// Every check that can be made, as a list of findings; never fails.
    pub fn validate(&self, base: &Path) -> Vec<Finding> {
        let mut out = Vec::new();
        let mut find = |file: &str, field: &str, message: String| {
            out.push(Finding {
                file: file.to_string(),
                field: field.to_string(),
                message,
            })
        };
        let manifest = "manifest";
        if self.format != MANIFEST_FORMAT || self.version != MANIFEST_VERSION {
            find(manifest, "format", format!("unsupported {} v{}", self.format, self.version));
        }
        if self.objects.is_empty() {
            find(manifest, "objects", "object table is empty".into());
        }
        let mut ids = BTreeSet::new();
        for o in &self.objects {
            if !ids.insert(o.id) {
                find(manifest, "objects", format!("object id {} repeated", o.id));
            }
        }
        if self.views != VIEWS as u32 {
            find(manifest, "views", format!("{} views per object, expected {VIEWS}", self.views));
        }
        if self.preprocessing != PreprocessParams::default() {
            find(
                manifest,
                "preprocessing",
                format!("{:?} differs from the supported {:?}", self.preprocessing, PreprocessParams::default()),
            );
        }

        // Haptic file counts per object and trial.
        let mut per_trial: BTreeMap<(u32, u32), BTreeSet<(u8, Ep)>> = BTreeMap::new();
        for e in &self.haptic_files {
            if !ids.contains(&e.object_id) {
                find(manifest, "haptic_files", format!("{} refers to unknown object {}", e.csv.display(), e.object_id));
            }
            if e.finger >= FINGERS {
                find(manifest, "haptic_files", format!("{} has finger {}", e.csv.display(), e.finger));
            }
            if !per_trial.entry((e.object_id, e.trial)).or_default().insert((e.finger, e.ep)) {
                find(
                    manifest,
                    "haptic_files",
                    format!("object {} trial {} finger {} EP {} listed twice", e.object_id, e.trial, e.finger, e.ep),
                );
            }
        }
        let recordings = FINGERS as usize * Ep::ALL.len();
        for o in &self.objects {
            let trials: Vec<u32> = per_trial.range((o.id, 0)..=(o.id, u32::MAX)).map(|((_, t), _)| *t).collect();
            if trials.len() != self.trials_per_object as usize {
                find(
                    manifest,
                    "haptic_files",
                    format!("object {} has {} trials, expected {}", o.id, trials.len(), self.trials_per_object),
                );
            }
            for t in trials {
                let n = per_trial[&(o.id, t)].len();
                if n != recordings {
                    find(
                        manifest,
                        "haptic_files",
                        format!("object {} trial {t} has {n} recordings, expected {recordings}", o.id),
                    );
                }
            }
        }

        for e in &self.haptic_files {
            let file = e.csv.display().to_string();
            let (side, map) = match read_recording(&base.join(&e.csv), &base.join(&e.sidecar)) {
                Ok(r) => r,
                Err(err) => {
                    find(&file, "contents", err.to_string());
                    continue;
                }
            };
            if (side.object_id, side.trial, side.finger, side.ep) != (e.object_id, e.trial, e.finger, e.ep) {
                find(&e.sidecar.display().to_string(), "identity", "sidecar does not match the manifest entry".into());
            }
            for ch in Channel::all() {
                if !map.contains_key(&ch) {
                    find(&file, &ch.name(), "channel missing".into());
                }
            }
            let ratio = match (side.rates.get("P_AC"), side.rates.get("P_DC")) {
                (Some(a), Some(d)) if *d > 0.0 => a / d,
                _ => f64::NAN,
            };
            if (ratio - PAC_DECIMATION as f64).abs() > 1e-9 {
                find(&file, "rates", format!("P_AC/P_DC rate ratio {ratio}, expected {PAC_DECIMATION}"));
            }
            if let (Some(pac), Some(pdc)) = (map.get(&Channel::Pac), map.get(&Channel::Pdc)) {
                let len_ratio = pac.len() as f64 / pdc.len().max(1) as f64;
                if pac.len().abs_diff(PAC_DECIMATION * pdc.len()) > 1 {
                    find(
                        &file,
                        "P_AC",
                        format!("P_AC/P_DC length ratio {len_ratio:.2}, expected about {PAC_DECIMATION} (sample rate)"),
                    );
                }
                let slow = pdc.len();
                if let Some((ch, v)) = map.iter().find(|(c, v)| **c != Channel::Pac && v.len() != slow) {
                    find(&file, &ch.name(), format!("{} samples, P_DC has {slow}", v.len()));
                }
                if slow < INSTANCE_LEN + OFFSETS[OFFSETS.len() - 1] {
                    find(&file, "P_DC", format!("{slow} samples are too few for {INSTANCE_LEN} at every offset"));
                }
            }
        }

        let mut visual_ids = BTreeSet::new();
        for e in &self.visual_files {
            let file = e.path.display().to_string();
            if !visual_ids.insert(e.object_id) {
                find(manifest, "visual_files", format!("object {} has several feature files", e.object_id));
            }
            match read_feature_maps(&base.join(&e.path), e.object_id) {
                Ok(maps) if maps.len() != self.views as usize => {
                    find(&file, "views", format!("{} views, expected {}", maps.len(), self.views))
                }
                Ok(_) => {}
                Err(err) => find(&file, "contents", err.to_string()),
            }
        }
        for id in ids.difference(&visual_ids) {
            find(manifest, "visual_files", format!("object {id} has no feature file"));
        }

        let labels_file = self.labels_file.display().to_string();
        let labels_path = base.join(&self.labels_file);
        match super::read_text(&labels_path).and_then(|t| decode_labels(&t, &labels_path)) {
            Ok(rows) => {
                let labelled: BTreeSet<u32> = rows.iter().map(|(l, _)| l.object_id).collect();
                if labelled.len() != rows.len() {
                    find(&labels_file, "object_id", "an object is labelled twice".into());
                }
                for id in ids.difference(&labelled) {
                    find(&labels_file, "object_id", format!("object {id} has no labels"));
                }
                for id in labelled.difference(&ids) {
                    find(&labels_file, "object_id", format!("labels for unknown object {id}"));
                }
            }
            Err(err) => find(&labels_file, "contents", err.to_string()),
        }
        out
    }
}

//! Normalized, decimated recordings of every trial plus a PCA fitted on
//! all of them, as written by `preprocess`.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::archive::TensorArchive;
use crate::adjectives::AdjectiveLabelSet;
use crate::error::{Error, Result};
use crate::haptic::{Channel, Ep, PcaSet, PreparedRecording, PreparedTrial};
use crate::nn::Tensor;

const SCALARS: [&str; 4] = ["P_AC", "P_DC", "T_AC", "T_DC"];

#[derive(Clone, Debug, PartialEq)]
pub struct PreparedDataset {
    pub name: String,
    pub trials_per_object: u32,
    /// Object ids in table order with their labels.
    pub labels: Vec<AdjectiveLabelSet>,
    pub trials: Vec<PreparedTrial>,
    /// Electrode PCA fitted on every trial of every object.
    pub global_pca: PcaSet,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    kind: String,
    name: String,
    trials_per_object: u32,
    labels: Vec<(u32, Vec<bool>)>,
    trials: Vec<(u32, u32)>,
    constant_channels: BTreeMap<String, Vec<String>>,
    global_pca: PcaSet,
}

fn key(object: u32, trial: u32, finger: u8, ep: Ep) -> String {
    format!("o{object}/t{trial}/f{finger}/{}", ep.name())
}

impl PreparedDataset {
    pub fn object_ids(&self) -> Vec<u32> {
        self.labels.iter().map(|l| l.object_id).collect()
    }

    pub fn trials_of(&self, object: u32) -> impl Iterator<Item = &PreparedTrial> {
        self.trials.iter().filter(move |t| t.object_id == object)
    }

    pub fn to_archive(&self) -> Result<TensorArchive> {
        let mut tensors = BTreeMap::new();
        let mut constant_channels = BTreeMap::new();
        for t in &self.trials {
            for ((finger, ep), rec) in &t.recordings {
                let k = key(t.object_id, t.trial_index, *finger, *ep);
                for (name, series) in SCALARS.iter().zip(&rec.scalars) {
                    tensors.insert(format!("{k}/{name}"), Tensor::from_vec(series.clone()));
                }
                tensors.insert(format!("{k}/electrodes"), rec.electrodes.clone());
                if !rec.constant_channels.is_empty() {
                    constant_channels.insert(k, rec.constant_channels.iter().map(|c| c.name()).collect());
                }
            }
        }
        let header = Header {
            kind: "prepared".into(),
            name: self.name.clone(),
            trials_per_object: self.trials_per_object,
            labels: self.labels.iter().map(|l| (l.object_id, l.labels.to_vec())).collect(),
            trials: self.trials.iter().map(|t| (t.object_id, t.trial_index)).collect(),
            constant_channels,
            global_pca: self.global_pca.clone(),
        };
        let mut a = TensorArchive::new(serde_json::to_value(header).map_err(|e| Error::InvalidInput(e.to_string()))?);
        a.tensors = tensors;
        Ok(a)
    }

    pub fn from_archive(mut a: TensorArchive, origin: &Path) -> Result<Self> {
        let unsupported = |reason: String| Error::UnsupportedFormat {
            path: origin.display().to_string(),
            reason,
        };
        let header: Header = serde_json::from_value(a.header.clone()).map_err(|e| unsupported(e.to_string()))?;
        if header.kind != "prepared" {
            return Err(unsupported(format!("archive holds `{}`, not prepared trials", header.kind)));
        }
        let labels = header
            .labels
            .iter()
            .map(|(id, v)| {
                let labels = v
                    .as_slice()
                    .try_into()
                    .map_err(|_| unsupported(format!("object {id} has {} labels", v.len())))?;
                Ok(AdjectiveLabelSet { object_id: *id, labels })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut trials = Vec::with_capacity(header.trials.len());
        for (object_id, trial_index) in header.trials {
            let mut recordings = BTreeMap::new();
            for finger in 0..crate::haptic::FINGERS {
                for ep in Ep::ALL {
                    let k = key(object_id, trial_index, finger, ep);
                    let mut scalar = |name: &str| a.take(&format!("{k}/{name}")).map(Tensor::into_data);
                    let scalars = [scalar("P_AC")?, scalar("P_DC")?, scalar("T_AC")?, scalar("T_DC")?];
                    let electrodes = a.take(&format!("{k}/electrodes"))?;
                    let constant_channels = header
                        .constant_channels
                        .get(&k)
                        .map(|v| {
                            v.iter()
                                .map(|n| Channel::parse(n).ok_or_else(|| unsupported(format!("channel `{n}`"))))
                                .collect::<Result<Vec<_>>>()
                        })
                        .transpose()?
                        .unwrap_or_default();
                    recordings.insert(
                        (finger, ep),
                        PreparedRecording {
                            scalars,
                            electrodes,
                            constant_channels,
                        },
                    );
                }
            }
            trials.push(PreparedTrial {
                object_id,
                trial_index,
                recordings,
            });
        }
        if let Some(extra) = a.tensors.keys().next() {
            return Err(unsupported(format!("unexpected tensor `{extra}`")));
        }
        Ok(Self {
            name: header.name,
            trials_per_object: header.trials_per_object,
            labels,
            trials,
            global_pca: header.global_pca,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.to_archive()?.save(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_archive(TensorArchive::load(path)?, path)
    }
}

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::SplitPlan;

pub const RUN_FORMAT: &str = "haptic-run";
pub const RUN_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunKind {
    HapticCnn,
    HapticLstm,
    /// Linear classifier over extracted and/or visual features.
    Linear,
}

/// One trained per-adjective model. Paths are relative to the index file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunEntry {
    pub adjective: String,
    pub split: SplitPlan,
    pub checkpoint: PathBuf,
    /// Feature file the model scores, for linear runs.
    pub features: Option<PathBuf>,
}

/// A requested (adjective, split seed) that could not be trained.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SkippedEntry {
    pub adjective: String,
    pub seed: u64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunIndex {
    pub format: String,
    pub version: u32,
    pub kind: RunKind,
    /// Single-line description of the configuration, without seeds.
    pub config: String,
    pub entries: Vec<RunEntry>,
    pub skipped: Vec<SkippedEntry>,
}

impl RunIndex {
    pub fn new(kind: RunKind, config: String) -> Self {
        Self {
            format: RUN_FORMAT.into(),
            version: RUN_VERSION,
            kind,
            config,
            entries: Vec::new(),
            skipped: Vec::new(),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let json = serde_json::to_string_pretty(self).map_err(|e| Error::InvalidInput(e.to_string()))?;
        super::write_file(path, json.as_bytes())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = super::read_text(path)?;
        let r: Self = serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.display().to_string(),
            reason: e.to_string(),
        })?;
        if r.format != RUN_FORMAT || r.version != RUN_VERSION {
            return Err(Error::UnsupportedFormat {
                path: path.display().to_string(),
                reason: format!("expected {RUN_FORMAT} v{RUN_VERSION}, got {} v{}", r.format, r.version),
            });
        }
        Ok(r)
    }

    /// Split seeds in first-seen order.
    pub fn seeds(&self) -> Vec<u64> {
        let mut seeds: Vec<u64> = Vec::new();
        let all = self.entries.iter().map(|e| e.split.seed).chain(self.skipped.iter().map(|s| s.seed));
        for seed in all {
            if !seeds.contains(&seed) {
                seeds.push(seed);
            }
        }
        seeds
    }
}

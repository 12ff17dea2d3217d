//! One numeric text file per (object, trial, finger, EP) plus a JSON
//! sidecar with sample rates and channel lengths.
//!
//! The CSV has a header naming the 23 channels; row `i` holds sample `i`
//! of every channel that is long enough, the remaining cells are empty.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::haptic::{Channel, ChannelMap, Ep};

pub const TRIAL_FORMAT: &str = "haptic-trial";
pub const TRIAL_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrialSidecar {
    pub format: String,
    pub version: u32,
    pub object_id: u32,
    pub trial: u32,
    pub finger: u8,
    pub ep: Ep,
    /// Sample rate in Hz per channel name.
    pub rates: BTreeMap<String, f64>,
    /// Sample count per channel name.
    pub lengths: BTreeMap<String, usize>,
}

impl TrialSidecar {
    pub fn describe(object_id: u32, trial: u32, finger: u8, ep: Ep, map: &ChannelMap) -> Self {
        Self {
            format: TRIAL_FORMAT.into(),
            version: TRIAL_VERSION,
            object_id,
            trial,
            finger,
            ep,
            rates: map.keys().map(|c| (c.name(), c.rate_hz())).collect(),
            lengths: map.iter().map(|(c, v)| (c.name(), v.len())).collect(),
        }
    }

    pub fn parse(text: &str, origin: &Path) -> Result<Self> {
        let s: Self = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: origin.display().to_string(),
            reason: e.to_string(),
        })?;
        if s.format != TRIAL_FORMAT || s.version != TRIAL_VERSION {
            return Err(Error::UnsupportedFormat {
                path: origin.display().to_string(),
                reason: format!("expected {TRIAL_FORMAT} v{TRIAL_VERSION}, got {} v{}", s.format, s.version),
            });
        }
        Ok(s)
    }
}

/// Relative paths of the CSV and sidecar for one recording.
pub fn trial_paths(object_id: u32, trial: u32, finger: u8, ep: Ep) -> (PathBuf, PathBuf) {
    let stem = format!("haptic/o{object_id:03}/t{trial:02}-f{finger}-{}", ep.name());
    (PathBuf::from(format!("{stem}.csv")), PathBuf::from(format!("{stem}.json")))
}

pub fn encode_trial_csv(map: &ChannelMap) -> String {
    let channels: Vec<(&Channel, &Vec<f64>)> = map.iter().collect();
    let rows = channels.iter().map(|(_, v)| v.len()).max().unwrap_or(0);
    let names: Vec<String> = channels.iter().map(|(c, _)| c.name()).collect();
    let mut s = names.join(",");
    s.push('\n');
    for i in 0..rows {
        for (k, (_, v)) in channels.iter().enumerate() {
            if k > 0 {
                s.push(',');
            }
            if let Some(x) = v.get(i) {
                let _ = write!(s, "{x}");
            }
        }
        s.push('\n');
    }
    s
}

pub fn decode_trial_csv(text: &str, origin: &Path) -> Result<ChannelMap> {
    let err = |line: usize, reason: String| Error::Parse {
        path: origin.display().to_string(),
        reason: format!("line {line}: {reason}"),
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| err(1, "empty file".into()))?;
    let mut channels = Vec::new();
    for name in header.split(',') {
        let ch = Channel::parse(name.trim()).ok_or_else(|| err(1, format!("unknown channel `{name}`")))?;
        if channels.contains(&ch) {
            return Err(err(1, format!("channel `{name}` repeated")));
        }
        channels.push(ch);
    }
    let mut series: Vec<Vec<f64>> = vec![Vec::new(); channels.len()];
    let mut ended = vec![false; channels.len()];
    for (i, line) in lines.enumerate() {
        let n = i + 2;
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != channels.len() {
            return Err(err(n, format!("{} cells, expected {}", cells.len(), channels.len())));
        }
        for (k, cell) in cells.iter().enumerate() {
            let cell = cell.trim();
            if cell.is_empty() {
                ended[k] = true;
                continue;
            }
            if ended[k] {
                return Err(err(n, format!("channel {} resumes after ending", channels[k].name())));
            }
            let v: f64 = cell.parse().map_err(|_| err(n, format!("`{cell}` is not a number")))?;
            if !v.is_finite() {
                return Err(err(n, format!("non-finite value `{cell}`")));
            }
            series[k].push(v);
        }
    }
    Ok(channels.into_iter().zip(series).collect())
}

pub fn write_recording(root: &Path, object_id: u32, trial: u32, finger: u8, ep: Ep, map: &ChannelMap) -> Result<(PathBuf, PathBuf)> {
    let (csv, side) = trial_paths(object_id, trial, finger, ep);
    super::write_file(&root.join(&csv), encode_trial_csv(map).as_bytes())?;
    let sidecar = TrialSidecar::describe(object_id, trial, finger, ep, map);
    let json = serde_json::to_string_pretty(&sidecar).map_err(|e| Error::InvalidInput(e.to_string()))?;
    super::write_file(&root.join(&side), json.as_bytes())?;
    Ok((csv, side))
}

/// Reads a recording and checks it against its sidecar.
pub fn read_recording(csv: &Path, sidecar: &Path) -> Result<(TrialSidecar, ChannelMap)> {
    let side = TrialSidecar::parse(&super::read_text(sidecar)?, sidecar)?;
    let map = decode_trial_csv(&super::read_text(csv)?, csv)?;
    let mismatch = |reason: String| Error::Parse {
        path: csv.display().to_string(),
        reason,
    };
    if map.len() != side.lengths.len() {
        return Err(mismatch(format!(
            "{} channels in file, {} in sidecar",
            map.len(),
            side.lengths.len()
        )));
    }
    for (ch, v) in &map {
        match side.lengths.get(&ch.name()) {
            Some(n) if *n == v.len() => {}
            Some(n) => return Err(mismatch(format!("{} has {} samples, sidecar says {n}", ch.name(), v.len()))),
            None => return Err(mismatch(format!("{} missing from sidecar", ch.name()))),
        }
    }
    Ok((side, map))
}

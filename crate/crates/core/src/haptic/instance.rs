use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    decimate_pac, pca_fit, pca_project, resample_fixed, zscore_normalize, Channel, ChannelMap, Ep,
    HapticTrial, PcaModel, CHANNELS_PER_EP, ELECTRODES, FINGERS, INSTANCE_CHANNELS, INSTANCE_LEN,
    OFFSETS, PAC_DECIMATION,
};
use crate::error::{Error, Result};
use crate::nn::Tensor;

/// Where an instance came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Provenance {
    pub object_id: u32,
    pub trial_index: u32,
    pub finger: u8,
    pub offset: u8,
}

/// The 32 x 150 network input. Row `ep * 8 + c` holds channel `c` of
/// (P_AC, P_DC, T_AC, T_DC, pc1..pc4) for EP index `ep`.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceMatrix {
    pub data: Tensor,
    pub provenance: Provenance,
}

/// Per-EP PCA models for the electrode channels.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaSet {
    pub models: BTreeMap<Ep, PcaModel>,
}

impl PcaSet {
    pub fn get(&self, ep: Ep) -> Result<&PcaModel> {
        self.models
            .get(&ep)
            .ok_or_else(|| Error::InvalidInput(format!("no PCA model fitted for EP {ep}")))
    }
}

/// One (finger, EP) recording after normalization and P_AC decimation, the
/// part of the pipeline that does not depend on PCA.
#[derive(Clone, Debug, PartialEq)]
pub struct PreparedRecording {
    /// P_AC, P_DC, T_AC, T_DC at 100 Hz.
    pub scalars: [Vec<f64>; 4],
    /// `len x 19`, one row per time step.
    pub electrodes: Tensor,
    /// Channels that were constant and normalized to zeros.
    pub constant_channels: Vec<Channel>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PreparedTrial {
    pub object_id: u32,
    pub trial_index: u32,
    pub recordings: BTreeMap<(u8, Ep), PreparedRecording>,
}

fn channel<'a>(map: &'a ChannelMap, ch: Channel, finger: u8, ep: Ep, trial: &HapticTrial) -> Result<&'a [f64]> {
    map.get(&ch).map(Vec::as_slice).ok_or_else(|| {
        Error::InvalidInput(format!(
            "object {} trial {}: finger {finger} EP {ep} is missing channel {}",
            trial.object_id,
            trial.trial_index,
            ch.name()
        ))
    })
}

fn prepare_recording(map: &ChannelMap, finger: u8, ep: Ep, trial: &HapticTrial) -> Result<PreparedRecording> {
    let mut constant_channels = Vec::new();
    let mut norm = |ch: Channel| -> Result<Vec<f64>> {
        let z = zscore_normalize(channel(map, ch, finger, ep, trial)?)?;
        if z.constant {
            constant_channels.push(ch);
        }
        Ok(z.values)
    };
    let pac = decimate_pac(&norm(Channel::Pac)?)?;
    let pdc = norm(Channel::Pdc)?;
    let tac = norm(Channel::Tac)?;
    let tdc = norm(Channel::Tdc)?;
    let len = pdc.len();
    let mut electrodes = Vec::with_capacity(ELECTRODES);
    for i in 1..=ELECTRODES as u8 {
        electrodes.push(norm(Channel::Electrode(i))?);
    }
    if tac.len() != len || tdc.len() != len || electrodes.iter().any(|e| e.len() != len) {
        return Err(Error::InvalidInput(format!(
            "object {} trial {} finger {finger} EP {ep}: 100 Hz channels have unequal lengths",
            trial.object_id, trial.trial_index
        )));
    }
    let raw_pac = map[&Channel::Pac].len();
    if raw_pac.abs_diff(PAC_DECIMATION * len) > 1 {
        return Err(Error::InvalidInput(format!(
            "object {} trial {} finger {finger} EP {ep}: P_AC has {raw_pac} samples, expected about {}",
            trial.object_id,
            trial.trial_index,
            PAC_DECIMATION * len
        )));
    }
    let mut grid = vec![0.0; len * ELECTRODES];
    for (e, series) in electrodes.iter().enumerate() {
        for (t, v) in series.iter().enumerate() {
            grid[t * ELECTRODES + e] = *v;
        }
    }
    Ok(PreparedRecording {
        scalars: [pac, pdc, tac, tdc],
        electrodes: Tensor::new(vec![len, ELECTRODES], grid)?,
        constant_channels,
    })
}

/// Normalizes every channel and decimates P_AC for both fingers and all EPs.
pub fn prepare_trial(trial: &HapticTrial) -> Result<PreparedTrial> {
    let mut recordings = BTreeMap::new();
    for finger in 0..FINGERS {
        for ep in Ep::ALL {
            let map = trial.recordings.get(&(finger, ep)).ok_or_else(|| {
                Error::InvalidInput(format!(
                    "object {} trial {}: missing finger {finger} EP {ep}",
                    trial.object_id, trial.trial_index
                ))
            })?;
            recordings.insert((finger, ep), prepare_recording(map, finger, ep, trial)?);
        }
    }
    Ok(PreparedTrial {
        object_id: trial.object_id,
        trial_index: trial.trial_index,
        recordings,
    })
}

/// Fits one PCA model per EP on every electrode time step of the given
/// trials (both fingers).
pub fn fit_pca_set<'a, I>(trials: I, k: usize) -> Result<PcaSet>
where
    I: IntoIterator<Item = &'a PreparedTrial> + Clone,
{
    let mut models = BTreeMap::new();
    for ep in Ep::ALL {
        let mut rows = Vec::new();
        let mut n = 0;
        for trial in trials.clone() {
            for finger in 0..FINGERS {
                if let Some(rec) = trial.recordings.get(&(finger, ep)) {
                    rows.extend_from_slice(rec.electrodes.data());
                    n += rec.electrodes.shape()[0];
                }
            }
        }
        if n == 0 {
            return Err(Error::InvalidInput(format!("no electrode samples for EP {ep}")));
        }
        models.insert(ep, pca_fit(&Tensor::new(vec![n, ELECTRODES], rows)?, k)?);
    }
    Ok(PcaSet { models })
}

/// Projects electrodes, resamples to 150 steps at `offset` and stacks the 32
/// channels.
pub fn assemble_prepared(trial: &PreparedTrial, finger: u8, offset: usize, pca: &PcaSet) -> Result<InstanceMatrix> {
    let mut data = vec![0.0; INSTANCE_CHANNELS * INSTANCE_LEN];
    for ep in Ep::ALL {
        let rec = trial.recordings.get(&(finger, ep)).ok_or_else(|| {
            Error::InvalidInput(format!(
                "object {} trial {}: missing finger {finger} EP {ep}",
                trial.object_id, trial.trial_index
            ))
        })?;
        let model = pca.get(ep)?;
        let len = rec.electrodes.shape()[0];
        let mut pcs = vec![Vec::with_capacity(len); model.k()];
        for row in rec.electrodes.data().chunks_exact(ELECTRODES) {
            for (series, v) in pcs.iter_mut().zip(pca_project(model, row)?) {
                series.push(v);
            }
        }
        let base = ep.index() * CHANNELS_PER_EP;
        let channels = rec.scalars.iter().chain(pcs.iter());
        for (c, series) in channels.enumerate() {
            let row = resample_fixed(series, INSTANCE_LEN, offset)?;
            data[(base + c) * INSTANCE_LEN..(base + c + 1) * INSTANCE_LEN].copy_from_slice(&row);
        }
    }
    Ok(InstanceMatrix {
        data: Tensor::new(vec![INSTANCE_CHANNELS, INSTANCE_LEN], data)?,
        provenance: Provenance {
            object_id: trial.object_id,
            trial_index: trial.trial_index,
            finger,
            offset: offset as u8,
        },
    })
}

/// Full pipeline for one finger of a raw trial.
pub fn assemble_instance(trial: &HapticTrial, finger: u8, offset: usize, pca: &PcaSet) -> Result<InstanceMatrix> {
    let prepared = prepare_trial(trial)?;
    assemble_prepared(&prepared, finger, offset, pca)
}

/// Two fingers times five start offsets: ten instances per trial.
pub fn augment_prepared(trial: &PreparedTrial, pca: &PcaSet) -> Result<Vec<InstanceMatrix>> {
    let mut out = Vec::with_capacity(FINGERS as usize * OFFSETS.len());
    for finger in 0..FINGERS {
        for &offset in &OFFSETS {
            out.push(assemble_prepared(trial, finger, offset, pca)?);
        }
    }
    Ok(out)
}

pub fn augment(trial: &HapticTrial, pca: &PcaSet) -> Result<Vec<InstanceMatrix>> {
    augment_prepared(&prepare_trial(trial)?, pca)
}

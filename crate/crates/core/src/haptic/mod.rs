//! Haptic preprocessing: raw BioTac trials to the 32 x 150 network input.

mod instance;
mod pca;
mod signal;

pub use instance::{
    assemble_instance, assemble_prepared, augment, augment_prepared, fit_pca_set, prepare_trial,
    InstanceMatrix, PcaSet, PreparedRecording, PreparedTrial, Provenance,
};
pub use pca::{pca_fit, pca_project, PcaModel};
pub use signal::{decimate_pac, resample_fixed, zscore_normalize, ZScored};

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Decimation factor from the 2200 Hz P_AC rate to 100 Hz.
pub const PAC_DECIMATION: usize = 22;
pub const PAC_RATE_HZ: f64 = 2200.0;
pub const SLOW_RATE_HZ: f64 = 100.0;
pub const ELECTRODES: usize = 19;
pub const PCA_COMPONENTS: usize = 4;
pub const FINGERS: u8 = 2;
pub const INSTANCE_LEN: usize = 150;
/// Augmentation start offsets.
pub const OFFSETS: [usize; 5] = [0, 1, 2, 3, 4];
/// Channels per EP after PCA: P_AC, P_DC, T_AC, T_DC, pc1..pc4.
pub const CHANNELS_PER_EP: usize = 4 + PCA_COMPONENTS;
pub const INSTANCE_CHANNELS: usize = CHANNELS_PER_EP * Ep::ALL.len();

/// Exploratory procedure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Ep {
    Squeeze,
    Hold,
    SlowSlide,
    FastSlide,
}

impl Ep {
    pub const ALL: [Ep; 4] = [Ep::Squeeze, Ep::Hold, Ep::SlowSlide, Ep::FastSlide];

    pub fn name(self) -> &'static str {
        match self {
            Ep::Squeeze => "squeeze",
            Ep::Hold => "hold",
            Ep::SlowSlide => "slow-slide",
            Ep::FastSlide => "fast-slide",
        }
    }

    pub fn parse(s: &str) -> Option<Ep> {
        Ep::ALL.into_iter().find(|e| e.name() == s)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Ep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// A raw BioTac channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Channel {
    Pac,
    Pdc,
    Tac,
    Tdc,
    /// Electrode impedance `E_1 ..= E_19`.
    Electrode(u8),
}

impl Channel {
    /// All 23 raw channels in file column order.
    pub fn all() -> Vec<Channel> {
        let mut v = vec![Channel::Pac, Channel::Pdc, Channel::Tac, Channel::Tdc];
        v.extend((1..=ELECTRODES as u8).map(Channel::Electrode));
        v
    }

    pub fn name(self) -> String {
        match self {
            Channel::Pac => "P_AC".into(),
            Channel::Pdc => "P_DC".into(),
            Channel::Tac => "T_AC".into(),
            Channel::Tdc => "T_DC".into(),
            Channel::Electrode(i) => format!("E_{i}"),
        }
    }

    pub fn parse(s: &str) -> Option<Channel> {
        match s {
            "P_AC" => Some(Channel::Pac),
            "P_DC" => Some(Channel::Pdc),
            "T_AC" => Some(Channel::Tac),
            "T_DC" => Some(Channel::Tdc),
            _ => {
                let i: u8 = s.strip_prefix("E_")?.parse().ok()?;
                (1..=ELECTRODES as u8).contains(&i).then_some(Channel::Electrode(i))
            }
        }
    }

    pub fn rate_hz(self) -> f64 {
        match self {
            Channel::Pac => PAC_RATE_HZ,
            _ => SLOW_RATE_HZ,
        }
    }
}

pub type ChannelMap = BTreeMap<Channel, Vec<f64>>;

/// Raw signals of one trial on one object: per finger, per EP, per channel.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct HapticTrial {
    pub object_id: u32,
    pub trial_index: u32,
    pub recordings: BTreeMap<(u8, Ep), ChannelMap>,
}

impl HapticTrial {
    pub fn new(object_id: u32, trial_index: u32) -> Self {
        Self {
            object_id,
            trial_index,
            recordings: BTreeMap::new(),
        }
    }
}

//! The haptic CNN, haptic LSTM and linear fusion classifier; two-phase
//! training; activation extraction, instance combination and fusion.

mod features;
mod graph;
mod network;
mod train;

pub use features::{
    combine_instances, extract_activations, fuse_and_train, fuse_features, FeatureVector,
};
pub use graph::{
    build_haptic_cnn, build_haptic_lstm, build_linear_classifier, LayerSpec, ModelGraph,
    CNN_CHANNELS, CNN_GROUPS, LSTM_FC, LSTM_HIDDEN,
};
pub use network::{Gradients, LayerGradient, LayerState, Network, Trace};
pub use train::{mean_loss, score_all, train, LossPoint, PhasePlan, TrainOutcome, TrainSchedule};

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::haptic::PcaSet;
use crate::nn::Loss;

/// Training metadata stored alongside the weights.
#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct CheckpointMeta {
    pub schedule: Option<TrainSchedule>,
    /// Mean loss of the stored weights over the training set.
    pub final_loss: Option<f64>,
    pub final_phase: Option<Loss>,
    pub epochs_completed: usize,
    /// Electrode PCA the model's inputs were built with.
    pub pca: Option<PcaSet>,
    pub notes: BTreeMap<String, String>,
}

/// A trained network plus its metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub network: Network,
    pub meta: CheckpointMeta,
}

#[cfg(test)]
mod tests;

use super::{build_linear_classifier, train, Network, PhasePlan, TrainOutcome, TrainSchedule};
use crate::error::{Error, Result};
use crate::haptic::InstanceMatrix;
use crate::nn::Tensor;

/// A feature vector with object provenance. `index` is the trial or view
/// index for single-instance features and `None` once instances are combined.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureVector {
    pub object_id: u32,
    pub index: Option<u32>,
    pub values: Tensor,
}

/// Flattened tap-layer output for every instance.
pub fn extract_activations(net: &Network, instances: &[InstanceMatrix], tap_layer: &str) -> Result<Vec<FeatureVector>> {
    net.graph.tap_index(tap_layer)?;
    instances
        .iter()
        .map(|inst| {
            Ok(FeatureVector {
                object_id: inst.provenance.object_id,
                index: Some(inst.provenance.trial_index),
                values: net.tap(&inst.data, tap_layer)?,
            })
        })
        .collect()
}

/// Concatenates the per-trial (or per-view) features of one object in index
/// order, independent of arrival order.
pub fn combine_instances(features: &[FeatureVector], expected: usize) -> Result<FeatureVector> {
    if features.len() != expected {
        return Err(Error::InvalidInput(format!(
            "expected {expected} instances to combine, got {}",
            features.len()
        )));
    }
    let first = &features[0];
    let mut sorted: Vec<&FeatureVector> = features.iter().collect();
    sorted.sort_by_key(|f| f.index);
    for w in sorted.windows(2) {
        if w[0].index == w[1].index {
            return Err(Error::InvalidInput(format!("instance index {:?} repeated", w[0].index)));
        }
    }
    let mut data = Vec::with_capacity(expected * first.values.len());
    for f in &sorted {
        if f.object_id != first.object_id {
            return Err(Error::InvalidInput(format!(
                "cannot combine objects {} and {}",
                first.object_id, f.object_id
            )));
        }
        if f.index.is_none() {
            return Err(Error::InvalidInput("feature is already combined".into()));
        }
        if f.values.len() != first.values.len() {
            return Err(Error::InvalidInput("features have different lengths".into()));
        }
        data.extend_from_slice(f.values.data());
    }
    Ok(FeatureVector {
        object_id: first.object_id,
        index: None,
        values: Tensor::from_vec(data),
    })
}

/// `haptic ++ visual` for one object.
pub fn fuse_features(haptic: &FeatureVector, visual: &FeatureVector) -> Result<FeatureVector> {
    if haptic.object_id != visual.object_id {
        return Err(Error::InvalidInput(format!(
            "provenance mismatch: haptic object {} vs visual object {}",
            haptic.object_id, visual.object_id
        )));
    }
    let mut data = haptic.values.data().to_vec();
    data.extend_from_slice(visual.values.data());
    Ok(FeatureVector {
        object_id: haptic.object_id,
        index: haptic.index,
        values: Tensor::from_vec(data),
    })
}

/// Trains a single hinge-loss inner product on fused features; the upstream
/// feature extractors are not touched.
pub fn fuse_and_train(
    haptic: &[FeatureVector],
    visual: &[FeatureVector],
    labels: &[f64],
    schedule: &TrainSchedule,
) -> Result<TrainOutcome> {
    if haptic.len() != visual.len() {
        return Err(Error::InvalidInput(format!(
            "{} haptic features vs {} visual features",
            haptic.len(),
            visual.len()
        )));
    }
    let fused: Vec<Tensor> = haptic
        .iter()
        .zip(visual)
        .map(|(h, v)| fuse_features(h, v).map(|f| f.values))
        .collect::<Result<_>>()?;
    let dim = fused
        .first()
        .ok_or_else(|| Error::InvalidInput("no features to fuse".into()))?
        .len();
    let schedule = TrainSchedule {
        phases: PhasePlan::HingeOnly,
        ..schedule.clone()
    };
    train(&build_linear_classifier(dim), &fused, labels, &schedule)
}

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::{Checkpoint, CheckpointMeta, ModelGraph, Network};
use crate::error::{Error, Result};
use crate::nn::{seeded_rng, Loss, Sgd, Tensor};

const SHUFFLE_SALT: u64 = 0x5EED_0F_5A_u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PhasePlan {
    /// Logistic pretraining, then hinge fine-tuning.
    LogisticThenHinge,
    LogisticOnly,
    /// Hinge only; used when just the loss layer is learned.
    HingeOnly,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainSchedule {
    /// Epochs of the first phase.
    pub epochs: usize,
    /// Epochs of hinge fine-tuning after logistic pretraining.
    pub finetune_epochs: usize,
    /// Capped at the dataset size; the last batch of an epoch may be short.
    pub batch_size: usize,
    pub lr: f64,
    pub momentum: f64,
    pub seed: u64,
    pub phases: PhasePlan,
    /// Only the classifier layer learns during fine-tuning.
    pub freeze_features: bool,
    /// Fresh classifier weights at the start of fine-tuning.
    pub reinit_classifier: bool,
}

impl Default for TrainSchedule {
    fn default() -> Self {
        Self {
            epochs: 200,
            finetune_epochs: 50,
            batch_size: 1000,
            lr: 0.01,
            momentum: 0.9,
            seed: 0,
            phases: PhasePlan::LogisticThenHinge,
            freeze_features: false,
            reinit_classifier: true,
        }
    }
}

impl TrainSchedule {
    fn validate(&self) -> Result<()> {
        if self.batch_size == 0 || !(self.lr > 0.0) || !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidSpec(format!(
                "schedule needs batch >= 1, lr > 0, momentum in [0, 1): {self:?}"
            )));
        }
        Ok(())
    }

    fn phase_list(&self) -> Vec<(Loss, usize)> {
        match self.phases {
            PhasePlan::LogisticThenHinge => vec![(Loss::Logistic, self.epochs), (Loss::Hinge, self.finetune_epochs)],
            PhasePlan::LogisticOnly => vec![(Loss::Logistic, self.epochs)],
            PhasePlan::HingeOnly => vec![(Loss::Hinge, self.epochs)],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossPoint {
    pub phase: Loss,
    pub epoch: usize,
    pub loss: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub checkpoint: Checkpoint,
    pub loss_curve: Vec<LossPoint>,
}

/// Scores of every input under `net`.
pub fn score_all(net: &Network, inputs: &[Tensor]) -> Result<Vec<f64>> {
    inputs.iter().map(|x| net.score(x)).collect()
}

pub fn mean_loss(net: &Network, inputs: &[Tensor], labels: &[f64], loss: Loss) -> Result<f64> {
    let mut total = 0.0;
    for (x, y) in inputs.iter().zip(labels) {
        total += loss.eval(net.score(x)?, *y)?.0;
    }
    Ok(total / inputs.len() as f64)
}

fn snapshot(net: &Network, schedule: &TrainSchedule, epochs: usize, phase: Loss) -> Checkpoint {
    Checkpoint {
        network: net.clone(),
        meta: CheckpointMeta {
            schedule: Some(schedule.clone()),
            final_phase: Some(phase),
            epochs_completed: epochs,
            ..Default::default()
        },
    }
}

/// Mini-batch SGD with momentum over a seeded per-epoch shuffle.
///
/// Stored weights are rounded to `f32` at the end so that the recorded
/// `final_loss` is reproduced exactly by a checkpoint reload.
pub fn train(graph: &ModelGraph, instances: &[Tensor], labels: &[f64], schedule: &TrainSchedule) -> Result<TrainOutcome> {
    schedule.validate()?;
    if instances.is_empty() || instances.len() != labels.len() {
        return Err(Error::InvalidInput(format!(
            "{} instances with {} labels",
            instances.len(),
            labels.len()
        )));
    }
    if let Some(bad) = labels.iter().find(|y| **y != 1.0 && **y != -1.0) {
        return Err(Error::InvalidInput(format!("label {bad} is not -1 or +1")));
    }
    let n = instances.len();
    let batch = schedule.batch_size.min(n);
    let opt = Sgd {
        lr: schedule.lr,
        momentum: schedule.momentum,
    };
    let mut net = Network::init(graph, schedule.seed)?;
    let mut rng = seeded_rng(schedule.seed ^ SHUFFLE_SALT);
    let mut order: Vec<usize> = (0..n).collect();
    let mut curve = Vec::new();
    let mut epochs_done = 0;
    let mut last_phase = Loss::Logistic;
    let mut last_good = snapshot(&net, schedule, 0, last_phase);

    for (phase_idx, (loss, epochs)) in schedule.phase_list().into_iter().enumerate() {
        let finetune = phase_idx > 0;
        if finetune && schedule.reinit_classifier {
            net.reinit_layer(&graph.classifier, schedule.seed)?;
        }
        let classifier = graph.classifier.clone();
        let frozen = |name: &str| finetune && schedule.freeze_features && name != classifier;
        last_phase = loss;
        for epoch in 0..epochs {
            order.shuffle(&mut rng);
            let mut total = 0.0;
            for chunk in order.chunks(batch) {
                let mut acc = None;
                for &i in chunk {
                    let trace = net.forward_trace(&instances[i])?;
                    let (l, dl) = loss.eval(trace.score(), labels[i])?;
                    total += l;
                    if dl == 0.0 {
                        continue;
                    }
                    let g = net.backward(&trace, dl)?;
                    match acc.as_mut() {
                        None => acc = Some(g),
                        Some(a) => super::Gradients::accumulate(a, &g),
                    }
                }
                if !total.is_finite() {
                    return Err(Error::Diverged {
                        phase: format!("{loss:?}"),
                        epoch,
                        last_finite: Box::new(last_good),
                    });
                }
                if let Some(mut g) = acc {
                    g.scale(1.0 / chunk.len() as f64);
                    if let Err(e) = net.apply(&g, &opt, &frozen) {
                        return match e {
                            Error::NonFinite(_) => Err(Error::Diverged {
                                phase: format!("{loss:?}"),
                                epoch,
                                last_finite: Box::new(last_good),
                            }),
                            other => Err(other),
                        };
                    }
                }
            }
            epochs_done += 1;
            curve.push(LossPoint {
                phase: loss,
                epoch,
                loss: total / n as f64,
            });
            if !net.is_finite() {
                return Err(Error::Diverged {
                    phase: format!("{loss:?}"),
                    epoch,
                    last_finite: Box::new(last_good),
                });
            }
            last_good = snapshot(&net, schedule, epochs_done, loss);
        }
    }

    net.quantize_f32();
    let final_loss = mean_loss(&net, instances, labels, last_phase)?;
    let mut checkpoint = snapshot(&net, schedule, epochs_done, last_phase);
    checkpoint.meta.final_loss = Some(final_loss);
    Ok(TrainOutcome {
        checkpoint,
        loss_curve: curve,
    })
}

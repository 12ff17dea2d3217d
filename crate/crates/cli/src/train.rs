//! `train-haptic` and `train-lstm`.

use std::path::Path;

use haptic_core::adjectives::ADJECTIVES;
use haptic_core::eval::{make_split, DEFAULT_TRAIN_RATIO};
use haptic_core::haptic::{augment_prepared, fit_pca_set, PreparedTrial, PCA_COMPONENTS};
use haptic_core::io::{save_checkpoint, PreparedDataset, RunEntry, RunIndex, RunKind, SkippedEntry};
use haptic_core::model::{build_haptic_cnn, build_haptic_lstm, train, PhasePlan, TrainSchedule};
use haptic_core::nn::Tensor;
use haptic_core::{Error, Result};

use crate::args::{PcaScope, ScheduleArgs, TrainArgs};
use crate::common::{adjective_list, derive_seed, model_stem, resolve};

pub const RUN_FILE: &str = "run.json";

pub fn schedule_from(args: &ScheduleArgs, phases: PhasePlan) -> TrainSchedule {
    TrainSchedule {
        epochs: args.epochs,
        batch_size: args.batch,
        lr: args.lr,
        momentum: args.momentum,
        seed: args.seed,
        phases,
        ..TrainSchedule::default()
    }
}

/// Everything that shapes a haptic run except the seeds.
pub struct HapticRunConfig {
    pub kind: RunKind,
    pub adjectives: Vec<usize>,
    pub seed: u64,
    pub splits: u64,
    pub schedule: TrainSchedule,
    pub pca_scope: PcaScope,
}

impl HapticRunConfig {
    pub fn from_args(kind: RunKind, args: &TrainArgs) -> Result<Self> {
        let mut schedule = schedule_from(&args.schedule, PhasePlan::LogisticThenHinge);
        schedule.finetune_epochs = args.finetune_epochs;
        schedule.freeze_features = args.freeze_features;
        schedule.reinit_classifier = !args.keep_classifier;
        Ok(Self {
            kind,
            adjectives: adjective_list(&args.adjective)?,
            seed: args.schedule.seed,
            splits: args.splits.count(),
            schedule,
            pca_scope: args.pca_scope,
        })
    }

    /// One-line description used to tie evaluations to a configuration.
    pub fn describe(&self) -> String {
        let s = &self.schedule;
        serde_json::json!({
            "kind": self.kind,
            "epochs": s.epochs,
            "finetune_epochs": s.finetune_epochs,
            "batch": s.batch_size,
            "lr": s.lr,
            "momentum": s.momentum,
            "freeze_features": s.freeze_features,
            "reinit_classifier": s.reinit_classifier,
            "pca_scope": match self.pca_scope { PcaScope::Train => "train", PcaScope::All => "all" },
        })
        .to_string()
    }
}

/// Training tensors and ±1 labels for every augmented instance of `objects`.
pub fn haptic_training_set(
    prepared: &PreparedDataset,
    objects: &[u32],
    adjective: usize,
    pca: &haptic_core::haptic::PcaSet,
) -> Result<(Vec<Tensor>, Vec<f64>)> {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for &o in objects {
        let y = crate::common::labels_by_id(&prepared.labels, o)?.target(adjective);
        for trial in prepared.trials_of(o) {
            for inst in augment_prepared(trial, pca)? {
                xs.push(inst.data);
                ys.push(y);
            }
        }
    }
    Ok((xs, ys))
}

/// Trains one model per (split seed, adjective) and writes checkpoints
/// plus a run index under `out`, which is relative to `root`.
pub fn train_haptic(root: &Path, prepared: &PreparedDataset, config: &HapticRunConfig, out: &Path) -> Result<RunIndex> {
    let graph = match config.kind {
        RunKind::HapticCnn => build_haptic_cnn(),
        RunKind::HapticLstm => build_haptic_lstm(),
        RunKind::Linear => return Err(Error::InvalidInput("linear runs are trained by `fuse`".into())),
    };
    let mut index = RunIndex::new(config.kind, config.describe());
    for k in 0..config.splits {
        let split_seed = config.seed + k;
        for &j in &config.adjectives {
            let adjective = ADJECTIVES[j];
            let split = match make_split(&prepared.labels, j, DEFAULT_TRAIN_RATIO, split_seed) {
                Ok(s) => s,
                Err(e @ Error::InfeasibleSplit { .. }) => {
                    eprintln!("skipped adjective={adjective} seed={split_seed}: {e}");
                    index.skipped.push(SkippedEntry {
                        adjective: adjective.into(),
                        seed: split_seed,
                        reason: e.to_string(),
                    });
                    continue;
                }
                Err(e) => return Err(e),
            };
            let pca = match config.pca_scope {
                PcaScope::All => prepared.global_pca.clone(),
                PcaScope::Train => {
                    let trials: Vec<&PreparedTrial> =
                        prepared.trials.iter().filter(|t| split.train.contains(&t.object_id)).collect();
                    fit_pca_set(trials.iter().copied(), PCA_COMPONENTS)?
                }
            };
            let (xs, ys) = haptic_training_set(prepared, &split.train, j, &pca)?;
            let schedule = TrainSchedule {
                seed: derive_seed(config.seed, &[j as u64, split_seed]),
                ..config.schedule.clone()
            };
            let mut ckpt = train(&graph, &xs, &ys, &schedule)?.checkpoint;
            let meta = &mut ckpt.meta;
            meta.pca = Some(pca);
            meta.notes.insert("adjective".into(), adjective.into());
            meta.notes.insert("split_seed".into(), split_seed.to_string());
            let rel = out.join(format!("{}.ckpt", model_stem(adjective, split_seed)));
            save_checkpoint(&resolve(root, &rel), &ckpt)?;
            println!(
                "trained adjective={adjective} seed={split_seed} instances={} loss={}",
                xs.len(),
                ckpt.meta.final_loss.unwrap_or(f64::NAN)
            );
            index.entries.push(RunEntry {
                adjective: adjective.into(),
                split,
                checkpoint: rel,
                features: None,
            });
        }
    }
    index.save(&resolve(root, &out.join(RUN_FILE)))?;
    Ok(index)
}

pub fn train_command(root: &Path, kind: RunKind, args: &TrainArgs) -> Result<RunIndex> {
    let config = HapticRunConfig::from_args(kind, args)?;
    let prepared = PreparedDataset::load(&resolve(root, &args.input))?;
    train_haptic(root, &prepared, &config, &args.out)
}

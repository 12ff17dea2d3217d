//! `fuse`: linear classifiers over haptic features, visual features or both.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use haptic_core::adjectives::adjective_index;
use haptic_core::io::{load_manifest, save_checkpoint, DatasetManifest, FeatureSet, RunEntry, RunIndex, RunKind};
use haptic_core::model::{build_linear_classifier, combine_instances, fuse_features, train, FeatureVector, PhasePlan, TrainSchedule};
use haptic_core::visual::{combine_views, pool_normalize, VisualFeature};
use haptic_core::{Error, Result};

use crate::args::{Combine, FuseArgs, Modality};
use crate::common::{derive_seed, labels_by_id, load_run, model_stem, resolve};
use crate::train::{schedule_from, RUN_FILE};

/// Pooled, normalized views of every object.
pub fn visual_features(manifest: &DatasetManifest, base: &Path) -> Result<BTreeMap<u32, Vec<VisualFeature>>> {
    manifest
        .objects
        .iter()
        .map(|o| {
            let views = manifest
                .load_views(base, o.id)?
                .iter()
                .map(pool_normalize)
                .collect::<Result<Vec<_>>>()?;
            Ok((o.id, views))
        })
        .collect()
}

fn as_feature(v: &VisualFeature) -> FeatureVector {
    FeatureVector {
        object_id: v.object_id,
        index: v.view_index.map(u32::from),
        values: v.vector.clone(),
    }
}

/// Pairs haptic items with visual views according to `combine`:
/// `none` pairs trial t with view t mod 8, `trials` pairs the trial
/// concatenation with view 0, `views` pairs trial 0 with all views.
pub fn pair_features(
    haptic: &[FeatureVector],
    visual: &BTreeMap<u32, Vec<VisualFeature>>,
    combine: Combine,
    trials_per_object: usize,
) -> Result<Vec<(FeatureVector, FeatureVector)>> {
    let mut by_object: BTreeMap<u32, Vec<FeatureVector>> = BTreeMap::new();
    for f in haptic {
        by_object.entry(f.object_id).or_default().push(f.clone());
    }
    let mut out = Vec::new();
    for (object, items) in by_object {
        let views = visual
            .get(&object)
            .ok_or_else(|| Error::InvalidInput(format!("object {object} has no visual features")))?;
        let view = |v: usize| {
            views
                .iter()
                .find(|f| f.view_index == Some(v as u8))
                .ok_or_else(|| Error::InvalidInput(format!("object {object} lacks view {v}")))
        };
        let combined = items.iter().any(|f| f.index.is_none());
        match combine {
            Combine::None | Combine::Views if combined => {
                return Err(Error::InvalidInput(
                    "haptic features are combined over trials; use --combine trials".into(),
                ));
            }
            Combine::None => {
                for f in items {
                    let t = f.index.unwrap_or(0) as usize;
                    out.push((f, as_feature(view(t % views.len())?)));
                }
            }
            Combine::Trials => {
                let h = if combined { items[0].clone() } else { combine_instances(&items, trials_per_object)? };
                out.push((h, as_feature(view(0)?)));
            }
            Combine::Views => {
                let h = items
                    .iter()
                    .min_by_key(|f| f.index)
                    .cloned()
                    .ok_or_else(|| Error::InvalidInput(format!("object {object} has no haptic features")))?;
                out.push((h, as_feature(&combine_views(views)?)));
            }
        }
    }
    Ok(out)
}

/// Selects the modality; provenance is checked when both are kept.
pub fn select_modality(pair: &(FeatureVector, FeatureVector), modality: Modality) -> Result<FeatureVector> {
    let (h, v) = pair;
    match modality {
        Modality::Both => fuse_features(h, v),
        Modality::Haptic => Ok(h.clone()),
        Modality::Visual => Ok(FeatureVector {
            index: h.index,
            ..v.clone()
        }),
    }
}

pub struct FuseConfig {
    pub combine: Combine,
    pub modality: Modality,
    pub schedule: TrainSchedule,
}

impl FuseConfig {
    pub fn describe(&self, source: &str) -> String {
        let s = &self.schedule;
        serde_json::json!({
            "source": source,
            "combine": format!("{:?}", self.combine).to_lowercase(),
            "modality": format!("{:?}", self.modality).to_lowercase(),
            "epochs": s.epochs,
            "batch": s.batch_size,
            "lr": s.lr,
            "momentum": s.momentum,
        })
        .to_string()
    }
}

pub fn fuse_run(
    root: &Path,
    manifest: &DatasetManifest,
    manifest_base: &Path,
    features: &RunIndex,
    config: &FuseConfig,
    out: &Path,
) -> Result<RunIndex> {
    let labels = manifest.load_labels(manifest_base)?;
    let visual = visual_features(manifest, manifest_base)?;
    let mut index = RunIndex::new(RunKind::Linear, config.describe(&features.config));
    index.skipped = features.skipped.clone();
    for entry in &features.entries {
        let path: &PathBuf = entry
            .features
            .as_ref()
            .ok_or_else(|| Error::InvalidInput(format!("run entry `{}` has no feature file", entry.adjective)))?;
        let set = FeatureSet::load(&resolve(root, path))?;
        let pairs = pair_features(&set.items, &visual, config.combine, manifest.trials_per_object as usize)?;
        let items = pairs
            .iter()
            .map(|p| select_modality(p, config.modality))
            .collect::<Result<Vec<_>>>()?;
        let j = adjective_index(&entry.adjective)?;
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for f in items.iter().filter(|f| entry.split.train.contains(&f.object_id)) {
            xs.push(f.values.clone());
            ys.push(labels_by_id(&labels, f.object_id)?.target(j));
        }
        let dim = items
            .first()
            .ok_or_else(|| Error::InvalidInput("no features to fuse".into()))?
            .values
            .len();
        let schedule = TrainSchedule {
            seed: derive_seed(config.schedule.seed, &[j as u64, entry.split.seed, 0xF0]),
            phases: PhasePlan::HingeOnly,
            ..config.schedule.clone()
        };
        let outcome = train(&build_linear_classifier(dim), &xs, &ys, &schedule)?;
        let stem = model_stem(&entry.adjective, entry.split.seed);
        let ckpt = out.join(format!("{stem}.ckpt"));
        let feat = out.join(format!("{stem}.feat"));
        save_checkpoint(&resolve(root, &ckpt), &outcome.checkpoint)?;
        FeatureSet {
            description: config.describe(&set.description),
            items,
        }
        .save(&resolve(root, &feat))?;
        println!(
            "fused adjective={} seed={} instances={} loss={}",
            entry.adjective,
            entry.split.seed,
            xs.len(),
            outcome.checkpoint.meta.final_loss.unwrap_or(f64::NAN)
        );
        index.entries.push(RunEntry {
            adjective: entry.adjective.clone(),
            split: entry.split.clone(),
            checkpoint: ckpt,
            features: Some(feat),
        });
    }
    index.save(&resolve(root, &out.join(RUN_FILE)))?;
    Ok(index)
}

pub fn fuse_command(root: &Path, args: &FuseArgs) -> Result<RunIndex> {
    let manifest_path = resolve(root, &args.manifest);
    let manifest = load_manifest(&manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let features = load_run(root, &args.input)?;
    let config = FuseConfig {
        combine: args.combine,
        modality: args.modality,
        schedule: schedule_from(&args.schedule, PhasePlan::HingeOnly),
    };
    fuse_run(root, &manifest, base, &features, &config, &args.out)
}

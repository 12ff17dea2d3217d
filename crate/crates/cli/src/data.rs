//! `synth` and `preprocess`.

use std::collections::BTreeSet;
use std::path::Path;

use haptic_core::haptic::{fit_pca_set, prepare_trial, PCA_COMPONENTS};
use haptic_core::io::{load_manifest, synth_generate, DatasetManifest, PreparedDataset, MANIFEST_FILE};
use haptic_core::synth::SynthConfig;
use haptic_core::{Error, Result};

use crate::args::{Preset, PreprocessArgs, SynthArgs};
use crate::common::resolve;

pub fn synth_config(args: &SynthArgs) -> SynthConfig {
    let base = SynthConfig::default();
    let objects = args.objects.unwrap_or(base.objects);
    let trials = args.trials.unwrap_or(base.trials);
    let mut c = match args.preset {
        Preset::Default => SynthConfig {
            objects,
            trials,
            seed: args.seed,
            ..base
        },
        Preset::Separable => SynthConfig::separable(objects, trials, args.seed),
        Preset::TwoCue => SynthConfig::two_cue(objects, trials, args.seed),
    };
    if let Some(noise) = args.noise {
        c.noise = noise;
    }
    c
}

/// Writes a synthetic dataset; returns the manifest path relative to root.
pub fn synth(root: &Path, args: &SynthArgs) -> Result<(DatasetManifest, std::path::PathBuf)> {
    let config = synth_config(args);
    let manifest = synth_generate(&config, &resolve(root, &args.out))?;
    Ok((manifest, args.out.join(MANIFEST_FILE)))
}

/// Validates a manifest and prepares every trial it lists.
pub fn prepare(manifest_path: &Path) -> Result<PreparedDataset> {
    let manifest = load_manifest(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    let findings = manifest.validate(base);
    if let Some(first) = findings.first() {
        for f in &findings {
            eprintln!("finding: {f}");
        }
        return Err(Error::InvalidInput(format!(
            "manifest has {} problem(s); first: {first}",
            findings.len()
        )));
    }
    let labels = manifest.load_labels(base)?;
    let mut trials = Vec::new();
    for object in &manifest.objects {
        let indices: BTreeSet<u32> = manifest
            .haptic_files
            .iter()
            .filter(|e| e.object_id == object.id)
            .map(|e| e.trial)
            .collect();
        for t in indices {
            trials.push(prepare_trial(&manifest.load_trial(base, object.id, t)?)?);
        }
    }
    let global_pca = fit_pca_set(trials.iter(), PCA_COMPONENTS)?;
    Ok(PreparedDataset {
        name: manifest.name.clone(),
        trials_per_object: manifest.trials_per_object,
        labels,
        trials,
        global_pca,
    })
}

pub fn preprocess(root: &Path, args: &PreprocessArgs) -> Result<PreparedDataset> {
    let prepared = prepare(&resolve(root, &args.manifest))?;
    prepared.save(&resolve(root, &args.out))?;
    Ok(prepared)
}

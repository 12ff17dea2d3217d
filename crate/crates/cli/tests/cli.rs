use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

use haptic_cli::args::{Combine, Modality};
use haptic_cli::fuse::{pair_features, select_modality};
use haptic_core::model::FeatureVector;
use haptic_core::nn::Tensor;
use haptic_core::visual::VisualFeature;

fn run(root: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_haptic-adj"))
        .arg("--root")
        .arg(root)
        .args(args)
        .output()
        .unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn eval_without_checkpoint_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["eval", "--manifest", "m.json", "--out", "e"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--checkpoint"));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn unknown_flag_prints_usage() {
    let dir = tempfile::tempdir().unwrap();
    for args in [&["synth", "--out", "d", "--frobnicate"][..], &["--bogus"]] {
        let o = run(dir.path(), args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(stderr(&o).contains("Usage"), "{args:?}: {}", stderr(&o));
    }
}

#[test]
fn out_of_range_split_count_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["train-haptic", "--splits", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--splits"));
}

#[test]
fn runtime_failures_are_one_machine_readable_line() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &["eval", "--checkpoint", "missing.json", "--manifest", "m.json", "--out", "e"]);
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error kind=io msg=\""), "{err}");

    std::fs::write(dir.path().join("bad.json"), "{\"format\": 1}").unwrap();
    let o = run(dir.path(), &["preprocess", "--manifest", "bad.json", "--out", "p.htns"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error kind=parse "), "{}", stderr(&o));
}

#[test]
fn preprocess_refuses_a_damaged_dataset() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(dir.path(), &["synth", "--out", "d", "--objects", "4", "--trials", "1"]).status.success());
    std::fs::remove_file(dir.path().join("d/haptic/o001/t00-f1-hold.csv")).unwrap();
    let o = run(dir.path(), &["preprocess", "--manifest", "d/manifest.json", "--out", "p.htns"]);
    assert_eq!(o.status.code(), Some(1));
    let last = stderr(&o).lines().last().unwrap().to_string();
    assert!(last.starts_with("error kind=invalid-input "), "{last}");
    assert!(stderr(&o).contains("finding: "));
}

#[test]
fn report_averages_evaluation_files() {
    let dir = tempfile::tempdir().unwrap();
    let eval = |seed: u64, soft: &str, hard: &str| {
        format!("format=haptic-eval\nversion=1\nseed={seed}\nconfig=c\nauc.soft={soft}\nauc.hard={hard}\nmean=0\n")
    };
    std::fs::create_dir(dir.path().join("ev")).unwrap();
    std::fs::write(dir.path().join("ev/eval-s0.txt"), eval(0, "0.5", "1")).unwrap();
    std::fs::write(dir.path().join("ev/eval-s1.txt"), eval(1, "1", "n/a")).unwrap();
    let o = run(dir.path(), &["report", "--input", "ev", "--out", "rep"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("rep/report.txt")).unwrap();
    assert!(text.contains("adjective.soft.mean=0.75"), "{text}");
    assert!(text.contains("adjective.hard.mean=1"), "{text}");
    let csv = std::fs::read_to_string(dir.path().join("rep/report.csv")).unwrap();
    assert!(csv.starts_with("adjective,mean,seed_0,seed_1\n"), "{csv}");
}

#[test]
fn small_pipeline_dumps_conv3_grid() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let ok = |args: &[&str]| {
        let o = run(root, args);
        assert!(o.status.success(), "{args:?}: {}", stderr(&o));
        String::from_utf8_lossy(&o.stdout).into_owned()
    };
    ok(&["synth", "--out", "d", "--objects", "10", "--trials", "2", "--preset", "two-cue"]);
    ok(&["preprocess", "--manifest", "d/manifest.json", "--out", "p.htns"]);
    let out = ok(&[
        "train-lstm", "--input", "p.htns", "--adjective", "soft", "--splits", "1", "--epochs", "2", "--finetune-epochs",
        "1", "--out", "lstm",
    ]);
    assert!(out.contains("models=1"), "{out}");
    ok(&[
        "train-haptic", "--input", "p.htns", "--adjective", "soft", "--splits", "1", "--epochs", "2", "--finetune-epochs",
        "1", "--out", "cnn",
    ]);
    ok(&["dump-activations", "--checkpoint", "cnn/run.json", "--input", "p.htns", "--object", "3", "--out", "a.txt"]);
    let grid = std::fs::read_to_string(root.join("a.txt")).unwrap();
    let rows: Vec<Vec<f64>> = grid
        .lines()
        .map(|l| l.split_whitespace().map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 64);
    assert!(rows.iter().all(|r| r.len() == 19 && r.iter().all(|v| *v >= 0.0)));

    // LSTM runs have no conv3 to tap.
    let o = run(root, &["extract", "--input", "p.htns", "--checkpoint", "lstm/run.json", "--out", "f"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("conv3"), "{}", stderr(&o));

    // Trial-combined features cannot be paired trial by trial.
    ok(&["extract", "--input", "p.htns", "--checkpoint", "cnn/run.json", "--combine", "trials", "--out", "ft"]);
    let o = run(root, &["fuse", "--manifest", "d/manifest.json", "--input", "ft/features.json", "--out", "x"]);
    assert_eq!(o.status.code(), Some(1));
    ok(&[
        "fuse", "--manifest", "d/manifest.json", "--input", "ft/features.json", "--combine", "trials", "--epochs", "5",
        "--out", "fz",
    ]);
    let out = ok(&["eval", "--checkpoint", "fz/run.json", "--manifest", "d/manifest.json", "--out", "ev"]);
    assert!(out.contains("soft"), "{out}");
}

fn fv(object: u32, index: Option<u32>, v: f64) -> FeatureVector {
    FeatureVector {
        object_id: object,
        index,
        values: Tensor::from_vec(vec![v, v]),
    }
}

fn views(object: u32) -> Vec<VisualFeature> {
    (0..8)
        .map(|v| VisualFeature {
            object_id: object,
            view_index: Some(v),
            vector: Tensor::from_vec(vec![f64::from(v)]),
            degenerate: false,
        })
        .collect()
}

#[test]
fn pairing_follows_the_combine_mode() {
    let visual: BTreeMap<u32, Vec<VisualFeature>> = [(1, views(1)), (2, views(2))].into();
    let haptic: Vec<FeatureVector> = (1..=2).flat_map(|o| (0..10).map(move |t| fv(o, Some(t), f64::from(t)))).collect();

    let none = pair_features(&haptic, &visual, Combine::None, 10).unwrap();
    assert_eq!(none.len(), 20);
    assert!(none.iter().all(|(h, v)| v.values.data()[0] == f64::from(h.index.unwrap() % 8)));

    let trials = pair_features(&haptic, &visual, Combine::Trials, 10).unwrap();
    assert_eq!(trials.len(), 2);
    assert_eq!(trials[0].0.values.len(), 20);
    assert_eq!(trials[0].1.values.data(), &[0.0]);

    let all_views = pair_features(&haptic, &visual, Combine::Views, 10).unwrap();
    assert_eq!(all_views.len(), 2);
    assert_eq!(all_views[1].0.index, Some(0));
    assert_eq!(all_views[1].1.values.data(), &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0]);

    let fused = select_modality(&none[3], Modality::Both).unwrap();
    assert_eq!(fused.values.data(), &[3.0, 3.0, 3.0]);
    assert_eq!(select_modality(&none[3], Modality::Visual).unwrap().values.len(), 1);
    assert_eq!(select_modality(&none[3], Modality::Haptic).unwrap().values.len(), 2);
}

#[test]
fn pairing_rejects_missing_views() {
    let visual: BTreeMap<u32, Vec<VisualFeature>> = [(1, views(1))].into();
    assert!(pair_features(&[fv(9, Some(0), 0.0)], &visual, Combine::None, 1).is_err());
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Haptic adjective classification pipeline.
#[derive(Debug, Parser)]
#[command(name = "haptic-adj", version)]
pub struct Cli {
    /// Base directory for every relative path.
    #[arg(long, global = true, default_value = ".")]
    pub root: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset.
    Synth(SynthArgs),
    /// Normalize and decimate every trial of a dataset.
    Preprocess(PreprocessArgs),
    /// Train per-adjective haptic CNNs.
    TrainHaptic(TrainArgs),
    /// Train per-adjective haptic LSTMs.
    TrainLstm(TrainArgs),
    /// Write tap-layer activations of trained models.
    Extract(ExtractArgs),
    /// Train linear classifiers on haptic and/or visual features.
    Fuse(FuseArgs),
    /// Per-adjective test AUC of a run.
    Eval(EvalArgs),
    /// Average evaluation files over split seeds.
    Report(ReportArgs),
    /// Write one instance's tap-layer activations as a numeric grid.
    DumpActivations(DumpArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Default,
    Separable,
    TwoCue,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value = "default")]
    pub preset: Preset,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub objects: Option<usize>,
    #[arg(long)]
    pub trials: Option<usize>,
    #[arg(long)]
    pub noise: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PreprocessArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output archive.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Splits {
    #[value(name = "1")]
    One,
    #[value(name = "3")]
    Three,
}

impl Splits {
    pub fn count(self) -> u64 {
        match self {
            Splits::One => 1,
            Splits::Three => 3,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum PcaScope {
    /// Fit on the training objects of each split.
    Train,
    /// Fit on every object.
    All,
}

#[derive(Debug, Clone, Args)]
pub struct ScheduleArgs {
    #[arg(long, default_value_t = 200)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1000)]
    pub batch: usize,
    #[arg(long, default_value_t = 0.01)]
    pub lr: f64,
    #[arg(long, default_value_t = 0.9)]
    pub momentum: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Prepared archive written by `preprocess`.
    #[arg(long)]
    pub input: PathBuf,
    /// Accepted for symmetry with other commands; labels come from the archive.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    /// Adjectives to train (repeatable); all 24 when omitted.
    #[arg(long)]
    pub adjective: Vec<String>,
    #[arg(long, value_enum, default_value = "3")]
    pub splits: Splits,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    /// Hinge fine-tuning epochs after logistic pretraining.
    #[arg(long, default_value_t = 50)]
    pub finetune_epochs: usize,
    /// Only the classifier learns during fine-tuning.
    #[arg(long)]
    pub freeze_features: bool,
    /// Continue fine-tuning from the pretrained classifier weights.
    #[arg(long)]
    pub keep_classifier: bool,
    #[arg(long, value_enum, default_value = "train")]
    pub pca_scope: PcaScope,
    /// Output directory for checkpoints and `run.json`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Combine {
    None,
    Trials,
    Views,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Modality {
    Both,
    Haptic,
    Visual,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// Run index of trained haptic models.
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, default_value = "conv3")]
    pub tap_layer: String,
    #[arg(long, value_enum, default_value = "none")]
    pub combine: Combine,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Feature index written by `extract`.
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "none")]
    pub combine: Combine,
    #[arg(long, value_enum, default_value = "both")]
    pub modality: Modality,
    #[command(flatten)]
    pub schedule: ScheduleArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Run index to evaluate.
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Dataset manifest with the ground-truth labels.
    #[arg(long)]
    pub manifest: PathBuf,
    /// Prepared archive; required for haptic CNN and LSTM runs.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Directory for `eval-s<seed>.txt` and `.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Evaluation files or directories containing them (repeatable).
    #[arg(long, required = true)]
    pub input: Vec<PathBuf>,
    /// Directory for `report.txt` and `report.csv`.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct DumpArgs {
    /// A checkpoint file, or a run index together with `--adjective`.
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub adjective: Option<String>,
    /// Split seed of the run-index entry.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub object: Option<u32>,
    #[arg(long, default_value_t = 0)]
    pub trial: u32,
    #[arg(long, default_value_t = 0)]
    pub finger: u8,
    #[arg(long, default_value_t = 0)]
    pub offset: usize,
    #[arg(long, default_value = "conv3")]
    pub tap_layer: String,
    #[arg(long)]
    pub out: PathBuf,
}

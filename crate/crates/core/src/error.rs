use std::path::PathBuf;

/// Errors produced anywhere in the pipeline.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("non-finite value: {0}")]
    NonFinite(String),
    #[error("training diverged at {phase} epoch {epoch}")]
    Diverged {
        phase: String,
        epoch: usize,
        /// Last checkpoint whose loss was finite.
        last_finite: Box<crate::model::Checkpoint>,
    },
    #[error("plate not found: mask covers {coverage:.4} of the image")]
    PlateNotFound { coverage: f64 },
    #[error("infeasible split for adjective `{adjective}`: {reason}")]
    InfeasibleSplit { adjective: String, reason: String },
    #[error("AUC undefined: {0}")]
    UndefinedAuc(String),
    #[error("train/test leakage: object {0} appears on both sides")]
    Leakage(u32),
    #[error("unsupported format in {path}: {reason}")]
    UnsupportedFormat { path: String, reason: String },
    #[error("parse error in {path}: {reason}")]
    Parse { path: String, reason: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Short machine-readable category used by the CLI's one-line errors.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSpec(_) => "invalid-spec",
            Error::InvalidInput(_) => "invalid-input",
            Error::NonFinite(_) => "non-finite",
            Error::Diverged { .. } => "diverged",
            Error::PlateNotFound { .. } => "plate-not-found",
            Error::InfeasibleSplit { .. } => "infeasible-split",
            Error::UndefinedAuc(_) => "undefined-auc",
            Error::Leakage(_) => "leakage",
            Error::UnsupportedFormat { .. } => "unsupported-format",
            Error::Parse { .. } => "parse",
            Error::Io { .. } => "io",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

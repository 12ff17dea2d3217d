//! Multimodal haptic adjective classification.
//!
//! Raw tactile recordings are normalized, decimated, PCA-reduced and
//! resampled into 32 x 150 instances ([`haptic`]); a grouped temporal CNN or
//! an LSTM learns per-adjective classifiers ([`model`]) on top of a small
//! deterministic engine ([`nn`]); pooled image-network features form the
//! visual branch ([`visual`]); conv3 activations and visual features are
//! fused by a linear hinge classifier; [`eval`] runs object-level splits and
//! ROC-AUC. [`io`] holds the on-disk formats and [`synth`] generates
//! datasets with known structure.

pub mod adjectives;
pub mod error;
pub mod eval;
pub mod haptic;
pub mod io;
pub mod model;
pub mod nn;
pub mod synth;
pub mod visual;

pub use error::{Error, Result};

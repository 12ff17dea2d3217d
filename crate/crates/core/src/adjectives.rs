//! The 24 haptic adjectives in their fixed table order.

use crate::error::{Error, Result};

pub const ADJECTIVES: [&str; 24] = [
    "absorbent", "bumpy", "compressible", "cool", "crinkly", "fuzzy",
    "hairy", "hard", "metallic", "nice", "porous", "rough",
    "scratchy", "slippery", "smooth", "soft", "solid", "springy",
    "squishy", "sticky", "textured", "thick", "thin", "unpleasant",
];

pub const ADJECTIVE_COUNT: usize = ADJECTIVES.len();

pub fn adjective_index(name: &str) -> Result<usize> {
    ADJECTIVES
        .iter()
        .position(|a| *a == name)
        .ok_or_else(|| Error::InvalidInput(format!("unknown adjective `{name}`")))
}

/// One object's 24 binary labels in [`ADJECTIVES`] order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct AdjectiveLabelSet {
    pub object_id: u32,
    pub labels: [bool; ADJECTIVE_COUNT],
}

impl AdjectiveLabelSet {
    pub fn get(&self, adjective: usize) -> bool {
        self.labels[adjective]
    }

    /// `+1` / `-1` training target.
    pub fn target(&self, adjective: usize) -> f64 {
        if self.labels[adjective] {
            1.0
        } else {
            -1.0
        }
    }
}

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::adjectives::{adjective_index, AdjectiveLabelSet, ADJECTIVES, ADJECTIVE_COUNT};
use crate::error::{Error, Result};
use crate::nn::seeded_rng;

pub const DEFAULT_TRAIN_RATIO: f64 = 0.9;

/// Object-level train/test partition for one adjective.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitPlan {
    pub adjective: String,
    pub seed: u64,
    /// Sorted object ids.
    pub train: Vec<u32>,
    pub test: Vec<u32>,
}

impl SplitPlan {
    pub fn adjective_index(&self) -> Result<usize> {
        adjective_index(&self.adjective)
    }

    pub fn check_disjoint(&self) -> Result<()> {
        let train: std::collections::BTreeSet<&u32> = self.train.iter().collect();
        match self.test.iter().find(|id| train.contains(id)) {
            Some(id) => Err(Error::Leakage(*id)),
            None => Ok(()),
        }
    }

    pub fn is_test(&self, object: u32) -> bool {
        self.test.contains(&object)
    }
}

fn split_seed(seed: u64, adjective: usize) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ (adjective as u64 + 1).wrapping_mul(0xBF58_476D_1CE4_E5B9)
}

/// Seeded stratified object split.
///
/// The test side gets `max(1, round((1 - ratio) * N))` objects, raised to 2
/// when needed so both classes appear on it, with positives in proportion
/// to their share and at least one of each class left for training.
pub fn make_split(labels: &[AdjectiveLabelSet], adjective: usize, ratio: f64, seed: u64) -> Result<SplitPlan> {
    if adjective >= ADJECTIVE_COUNT {
        return Err(Error::InvalidInput(format!("adjective index {adjective} out of range")));
    }
    if !(ratio > 0.0 && ratio < 1.0) {
        return Err(Error::InvalidInput(format!("train ratio {ratio} must be in (0, 1)")));
    }
    let name = ADJECTIVES[adjective];
    let mut pos: Vec<u32> = labels.iter().filter(|l| l.get(adjective)).map(|l| l.object_id).collect();
    let mut neg: Vec<u32> = labels.iter().filter(|l| !l.get(adjective)).map(|l| l.object_id).collect();
    let mut ids: Vec<u32> = labels.iter().map(|l| l.object_id).collect();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::InvalidInput("duplicate object id in label table".into()));
    }
    if pos.len() < 2 || neg.len() < 2 {
        return Err(Error::InfeasibleSplit {
            adjective: name.to_string(),
            reason: format!(
                "{} positive and {} negative objects; both sides need one of each",
                pos.len(),
                neg.len()
            ),
        });
    }
    let n = labels.len();
    let test_n = (((1.0 - ratio) * n as f64).round() as usize).max(2);
    let test_pos = ((test_n as f64 * pos.len() as f64 / n as f64).round() as usize).clamp(1, pos.len() - 1);
    let test_neg = (test_n - test_pos.min(test_n - 1)).clamp(1, neg.len() - 1);

    pos.sort_unstable();
    neg.sort_unstable();
    let mut rng = seeded_rng(split_seed(seed, adjective));
    pos.shuffle(&mut rng);
    neg.shuffle(&mut rng);
    let mut test: Vec<u32> = pos[..test_pos].iter().chain(&neg[..test_neg]).copied().collect();
    let mut train: Vec<u32> = pos[test_pos..].iter().chain(&neg[test_neg..]).copied().collect();
    test.sort_unstable();
    train.sort_unstable();
    Ok(SplitPlan {
        adjective: name.to_string(),
        seed,
        train,
        test,
    })
}

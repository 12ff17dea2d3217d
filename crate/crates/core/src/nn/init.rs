use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Tensor;
use crate::error::{Error, Result};

/// Seeded generator used everywhere randomness is needed.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Xavier initialization with the fan-in-only uniform bound `sqrt(3 / fan_in)`,
/// giving weight variance `1 / fan_in`.
pub fn xavier_init(shape: &[usize], fan_in: usize, seed: u64) -> Result<Tensor> {
    if fan_in == 0 {
        return Err(Error::InvalidSpec("xavier fan_in must be >= 1".into()));
    }
    if shape.is_empty() || shape.iter().any(|&d| d == 0) {
        return Err(Error::InvalidSpec(format!(
            "xavier shape {shape:?} must be non-empty with positive extents"
        )));
    }
    let bound = (3.0 / fan_in as f64).sqrt();
    let mut rng = seeded_rng(seed);
    let n = shape.iter().product();
    let data = (0..n).map(|_| rng.random_range(-bound..=bound)).collect();
    Tensor::new(shape.to_vec(), data)
}

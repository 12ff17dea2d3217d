use super::Tensor;
use crate::error::{Error, Result};

/// Averages a `[..., C]` feature map over every non-channel position.
pub fn avg_pool(featmap: &Tensor) -> Result<Tensor> {
    let c = *featmap
        .shape()
        .last()
        .ok_or_else(|| Error::InvalidInput("empty feature map".into()))?;
    let positions = featmap.len() / c;
    let mut out = vec![0.0; c];
    for chunk in featmap.data().chunks_exact(c) {
        for (o, v) in out.iter_mut().zip(chunk) {
            *o += v;
        }
    }
    out.iter_mut().for_each(|v| *v /= positions as f64);
    Ok(Tensor::from_vec(out))
}

/// Result of [`l2_normalize`]. A zero input yields a zero vector with
/// `degenerate` set instead of a division by zero.
#[derive(Clone, Debug, PartialEq)]
pub struct Normalized {
    pub vector: Tensor,
    pub degenerate: bool,
}

pub fn l2_normalize(v: &Tensor) -> Normalized {
    let norm = v.data().iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 || !norm.is_finite() {
        return Normalized {
            vector: Tensor::zeros(v.shape()),
            degenerate: true,
        };
    }
    let mut vector = v.clone();
    vector.data_mut().iter_mut().for_each(|x| *x /= norm);
    Normalized {
        vector,
        degenerate: false,
    }
}

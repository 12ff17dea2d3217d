use super::{ensure_same_shape, Tensor};
use crate::error::Result;

/// Elementwise `max(0, x)`.
pub fn relu(input: &Tensor) -> Tensor {
    let mut out = input.clone();
    out.data_mut().iter_mut().for_each(|v| *v = v.max(0.0));
    out
}

/// Passes `grad_out` where `input > 0`; the subgradient at 0 is 0.
pub fn relu_backward(input: &Tensor, grad_out: &Tensor) -> Result<Tensor> {
    ensure_same_shape(input, grad_out, "relu backward")?;
    let data = input
        .data()
        .iter()
        .zip(grad_out.data())
        .map(|(x, g)| if *x > 0.0 { *g } else { 0.0 })
        .collect();
    Tensor::new(input.shape().to_vec(), data)
}

//! Minimal deterministic neural-network engine: tensors, the fixed layer set
//! with explicit forward/backward functions, losses and SGD with momentum.

mod activation;
mod conv;
pub mod gradcheck;
mod init;
mod linear;
mod loss;
mod lstm;
mod optim;
mod pool;
mod tensor;

pub use activation::{relu, relu_backward};
pub use conv::{conv1d_backward, conv1d_forward, ConvSpec};
pub use init::{seeded_rng, xavier_init};
pub use linear::{inner_product, inner_product_backward};
pub use loss::{hinge_loss, logistic_loss, Loss};
pub use lstm::{lstm_backward, lstm_forward, lstm_forward_cached, LstmCache, LstmGrads, LstmParams};
pub use optim::{sgd_momentum_step, Sgd};
pub use pool::{avg_pool, l2_normalize, Normalized};
pub use tensor::Tensor;

use crate::error::{Error, Result};

/// Weights and bias of a conv or inner-product layer plus their momentum buffers.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerParams {
    pub weights: Tensor,
    pub bias: Tensor,
    pub weight_velocity: Tensor,
    pub bias_velocity: Tensor,
}

impl LayerParams {
    /// Wraps weights and bias with zeroed velocity buffers.
    pub fn new(weights: Tensor, bias: Tensor) -> Self {
        let weight_velocity = Tensor::zeros(weights.shape());
        let bias_velocity = Tensor::zeros(bias.shape());
        Self {
            weights,
            bias,
            weight_velocity,
            bias_velocity,
        }
    }

    pub fn param_count(&self) -> usize {
        self.weights.len() + self.bias.len()
    }

    pub fn sgd_step(&mut self, grads: &LayerGrads, opt: &Sgd) -> Result<()> {
        opt.step(&mut self.weights, &mut self.weight_velocity, &grads.weights)?;
        opt.step(&mut self.bias, &mut self.bias_velocity, &grads.bias)
    }
}

/// Gradients for a [`LayerParams`].
#[derive(Clone, Debug, PartialEq)]
pub struct LayerGrads {
    pub weights: Tensor,
    pub bias: Tensor,
}

impl LayerGrads {
    pub fn zeros_like(p: &LayerParams) -> Self {
        Self {
            weights: Tensor::zeros(p.weights.shape()),
            bias: Tensor::zeros(p.bias.shape()),
        }
    }

    pub fn accumulate(&mut self, other: &LayerGrads) {
        add_into(&mut self.weights, &other.weights);
        add_into(&mut self.bias, &other.bias);
    }

    pub fn scale(&mut self, s: f64) {
        self.weights.data_mut().iter_mut().for_each(|v| *v *= s);
        self.bias.data_mut().iter_mut().for_each(|v| *v *= s);
    }
}

pub(crate) fn add_into(dst: &mut Tensor, src: &Tensor) {
    debug_assert_eq!(dst.shape(), src.shape());
    for (d, s) in dst.data_mut().iter_mut().zip(src.data()) {
        *d += s;
    }
}

pub(crate) fn ensure_same_shape(a: &Tensor, b: &Tensor, what: &str) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::InvalidSpec(format!(
            "{what}: shape {:?} != {:?}",
            a.shape(),
            b.shape()
        )));
    }
    Ok(())
}

use super::{ensure_same_shape, Tensor};
use crate::error::{Error, Result};

/// SGD with classical momentum: `v <- mu v - lr g; w <- w + v`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sgd {
    pub lr: f64,
    pub momentum: f64,
}

impl Default for Sgd {
    fn default() -> Self {
        Self {
            lr: 0.01,
            momentum: 0.9,
        }
    }
}

impl Sgd {
    pub fn step(&self, param: &mut Tensor, velocity: &mut Tensor, grad: &Tensor) -> Result<()> {
        sgd_momentum_step(param, velocity, grad, self.lr, self.momentum)
    }
}

/// One momentum update. A non-finite gradient aborts without touching state.
pub fn sgd_momentum_step(
    param: &mut Tensor,
    velocity: &mut Tensor,
    grad: &Tensor,
    lr: f64,
    momentum: f64,
) -> Result<()> {
    ensure_same_shape(param, grad, "sgd gradient")?;
    ensure_same_shape(param, velocity, "sgd velocity")?;
    if let Some(i) = grad.data().iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFinite(format!(
            "gradient entry {i} is {}",
            grad.data()[i]
        )));
    }
    for ((w, v), g) in param
        .data_mut()
        .iter_mut()
        .zip(velocity.data_mut())
        .zip(grad.data())
    {
        *v = momentum * *v - lr * g;
        *w += *v;
    }
    Ok(())
}

//! Grouped 1-D temporal convolution.
//!
//! Cross-correlation convention (the kernel is not flipped). Weights are laid
//! out `[out_channels, in_channels / groups, kernel_len]`; output channel `o`
//! belongs to group `o / (out_channels / groups)` and reads only the input
//! channels of that group.

use serde::{Deserialize, Serialize};

use super::{LayerGrads, LayerParams, Tensor};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConvSpec {
    pub in_channels: usize,
    pub out_channels: usize,
    pub kernel_len: usize,
    pub stride: usize,
    pub pad: usize,
    pub groups: usize,
}

impl ConvSpec {
    pub fn validate(&self) -> Result<()> {
        if self.groups == 0 || self.in_channels == 0 || self.out_channels == 0 {
            return Err(Error::InvalidSpec(format!(
                "conv channels and groups must be positive: {self:?}"
            )));
        }
        if self.in_channels % self.groups != 0 || self.out_channels % self.groups != 0 {
            return Err(Error::InvalidSpec(format!(
                "channels {}/{} not divisible by groups {}",
                self.in_channels, self.out_channels, self.groups
            )));
        }
        if self.kernel_len == 0 || self.stride == 0 {
            return Err(Error::InvalidSpec(format!(
                "kernel_len and stride must be >= 1: {self:?}"
            )));
        }
        Ok(())
    }

    pub fn in_per_group(&self) -> usize {
        self.in_channels / self.groups
    }

    pub fn out_per_group(&self) -> usize {
        self.out_channels / self.groups
    }

    pub fn weight_shape(&self) -> [usize; 3] {
        [self.out_channels, self.in_per_group(), self.kernel_len]
    }

    /// Number of weight values, `(C_in / G) * C_out * K`.
    pub fn weight_count(&self) -> usize {
        self.in_per_group() * self.out_channels * self.kernel_len
    }

    pub fn fan_in(&self) -> usize {
        self.in_per_group() * self.kernel_len
    }

    pub fn output_len(&self, input_len: usize) -> Result<usize> {
        let padded = input_len + 2 * self.pad;
        if padded < self.kernel_len {
            return Err(Error::InvalidInput(format!(
                "sequence of length {input_len} (pad {}) shorter than kernel {}",
                self.pad, self.kernel_len
            )));
        }
        Ok((padded - self.kernel_len) / self.stride + 1)
    }

    fn check(&self, input: &Tensor, params: &LayerParams) -> Result<(usize, usize)> {
        self.validate()?;
        if input.shape().len() != 2 || input.shape()[0] != self.in_channels {
            return Err(Error::InvalidSpec(format!(
                "conv expects [{} x T] input, got {:?}",
                self.in_channels,
                input.shape()
            )));
        }
        if params.weights.shape() != self.weight_shape() {
            return Err(Error::InvalidSpec(format!(
                "conv weight shape {:?} != {:?}",
                params.weights.shape(),
                self.weight_shape()
            )));
        }
        if params.bias.len() != self.out_channels {
            return Err(Error::InvalidSpec(format!(
                "conv bias length {} != {}",
                params.bias.len(),
                self.out_channels
            )));
        }
        let t_in = input.shape()[1];
        Ok((t_in, self.output_len(t_in)?))
    }
}

pub fn conv1d_forward(input: &Tensor, spec: &ConvSpec, params: &LayerParams) -> Result<Tensor> {
    let (t_in, t_out) = spec.check(input, params)?;
    let (cin_g, cout_g, k_len) = (spec.in_per_group(), spec.out_per_group(), spec.kernel_len);
    let x = input.data();
    let w = params.weights.data();
    let b = params.bias.data();
    let mut out = vec![0.0; spec.out_channels * t_out];
    for o in 0..spec.out_channels {
        let in_base = (o / cout_g) * cin_g;
        for t in 0..t_out {
            let start = (t * spec.stride) as isize - spec.pad as isize;
            let mut acc = b[o];
            for ci in 0..cin_g {
                let row = &x[(in_base + ci) * t_in..(in_base + ci + 1) * t_in];
                let wrow = &w[(o * cin_g + ci) * k_len..(o * cin_g + ci + 1) * k_len];
                for (k, wk) in wrow.iter().enumerate() {
                    let pos = start + k as isize;
                    if pos >= 0 && (pos as usize) < t_in {
                        acc += wk * row[pos as usize];
                    }
                }
            }
            out[o * t_out + t] = acc;
        }
    }
    Tensor::new(vec![spec.out_channels, t_out], out)
}

/// Returns `(grad_input, grads)` for the forward map at `input`.
pub fn conv1d_backward(
    input: &Tensor,
    spec: &ConvSpec,
    params: &LayerParams,
    grad_out: &Tensor,
) -> Result<(Tensor, LayerGrads)> {
    let (t_in, t_out) = spec.check(input, params)?;
    if grad_out.shape() != [spec.out_channels, t_out] {
        return Err(Error::InvalidSpec(format!(
            "conv grad_out shape {:?} != [{}, {t_out}]",
            grad_out.shape(),
            spec.out_channels
        )));
    }
    let (cin_g, cout_g, k_len) = (spec.in_per_group(), spec.out_per_group(), spec.kernel_len);
    let x = input.data();
    let w = params.weights.data();
    let g = grad_out.data();
    let mut gx = vec![0.0; x.len()];
    let mut gw = vec![0.0; w.len()];
    let mut gb = vec![0.0; spec.out_channels];
    for o in 0..spec.out_channels {
        let in_base = (o / cout_g) * cin_g;
        for t in 0..t_out {
            let go = g[o * t_out + t];
            if go == 0.0 {
                continue;
            }
            gb[o] += go;
            let start = (t * spec.stride) as isize - spec.pad as isize;
            for ci in 0..cin_g {
                let xi = (in_base + ci) * t_in;
                let wi = (o * cin_g + ci) * k_len;
                for k in 0..k_len {
                    let pos = start + k as isize;
                    if pos >= 0 && (pos as usize) < t_in {
                        let p = pos as usize;
                        gw[wi + k] += go * x[xi + p];
                        gx[xi + p] += go * w[wi + k];
                    }
                }
            }
        }
    }
    Ok((
        Tensor::new(input.shape().to_vec(), gx)?,
        LayerGrads {
            weights: Tensor::new(params.weights.shape().to_vec(), gw)?,
            bias: Tensor::from_vec(gb),
        },
    ))
}

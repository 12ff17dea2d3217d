use super::{LayerGrads, LayerParams, Tensor};
use crate::error::{Error, Result};

fn check(input: &Tensor, params: &LayerParams) -> Result<(usize, usize)> {
    let ws = params.weights.shape();
    if ws.len() != 2 || ws[1] != input.len() || params.bias.len() != ws[0] {
        return Err(Error::InvalidSpec(format!(
            "inner product weight {ws:?} / bias {:?} incompatible with input of {} values",
            params.bias.shape(),
            input.len()
        )));
    }
    Ok((ws[0], ws[1]))
}

/// `W x + b` with `W` of shape `[M, D]`; the input is read flattened.
pub fn inner_product(input: &Tensor, params: &LayerParams) -> Result<Tensor> {
    let (m, d) = check(input, params)?;
    let w = params.weights.data();
    let x = input.data();
    let out = (0..m)
        .map(|i| {
            let row = &w[i * d..(i + 1) * d];
            row.iter().zip(x).fold(params.bias.data()[i], |acc, (a, b)| acc + a * b)
        })
        .collect();
    Ok(Tensor::from_vec(out))
}

/// Returns `(grad_input, grads)`; `grad_input` has the input's shape.
pub fn inner_product_backward(
    input: &Tensor,
    params: &LayerParams,
    grad_out: &Tensor,
) -> Result<(Tensor, LayerGrads)> {
    let (m, d) = check(input, params)?;
    if grad_out.len() != m {
        return Err(Error::InvalidSpec(format!(
            "inner product grad_out has {} values, expected {m}",
            grad_out.len()
        )));
    }
    let w = params.weights.data();
    let x = input.data();
    let g = grad_out.data();
    let mut gx = vec![0.0; d];
    let mut gw = vec![0.0; m * d];
    for i in 0..m {
        let gi = g[i];
        if gi == 0.0 {
            continue;
        }
        let row = &w[i * d..(i + 1) * d];
        let grow = &mut gw[i * d..(i + 1) * d];
        for j in 0..d {
            grow[j] = gi * x[j];
            gx[j] += gi * row[j];
        }
    }
    Ok((
        Tensor::new(input.shape().to_vec(), gx)?,
        LayerGrads {
            weights: Tensor::new(vec![m, d], gw)?,
            bias: Tensor::from_vec(g.to_vec()),
        },
    ))
}

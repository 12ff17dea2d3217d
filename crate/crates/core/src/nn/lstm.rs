//! Single-layer LSTM with full backpropagation through time.
//!
//! Gate rows are stacked as input, forget, output, candidate: `w_input` is
//! `[4H, D]`, `w_hidden` is `[4H, H]` and `bias` is `[4H]`. The initial hidden
//! and cell states are zero.

use super::{add_into, Sgd, Tensor};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct LstmParams {
    pub hidden_size: usize,
    pub w_input: Tensor,
    pub w_hidden: Tensor,
    pub bias: Tensor,
    pub w_input_velocity: Tensor,
    pub w_hidden_velocity: Tensor,
    pub bias_velocity: Tensor,
}

impl LstmParams {
    pub fn new(w_input: Tensor, w_hidden: Tensor, bias: Tensor) -> Result<Self> {
        let four_h = bias.len();
        if four_h == 0 || four_h % 4 != 0 {
            return Err(Error::InvalidSpec(format!("lstm bias length {four_h} not 4*H")));
        }
        let h = four_h / 4;
        if w_input.shape().len() != 2 || w_input.shape()[0] != four_h {
            return Err(Error::InvalidSpec(format!(
                "lstm input weights {:?} must be [{four_h}, D]",
                w_input.shape()
            )));
        }
        if w_hidden.shape() != [four_h, h] {
            return Err(Error::InvalidSpec(format!(
                "lstm hidden weights {:?} must be [{four_h}, {h}]",
                w_hidden.shape()
            )));
        }
        Ok(Self {
            hidden_size: h,
            w_input_velocity: Tensor::zeros(w_input.shape()),
            w_hidden_velocity: Tensor::zeros(w_hidden.shape()),
            bias_velocity: Tensor::zeros(bias.shape()),
            w_input,
            w_hidden,
            bias,
        })
    }

    pub fn zeros(input_size: usize, hidden_size: usize) -> Self {
        Self::new(
            Tensor::zeros(&[4 * hidden_size, input_size]),
            Tensor::zeros(&[4 * hidden_size, hidden_size]),
            Tensor::zeros(&[4 * hidden_size]),
        )
        .expect("consistent zero shapes")
    }

    pub fn input_size(&self) -> usize {
        self.w_input.shape()[1]
    }

    pub fn param_count(&self) -> usize {
        self.w_input.len() + self.w_hidden.len() + self.bias.len()
    }

    pub fn sgd_step(&mut self, grads: &LstmGrads, opt: &Sgd) -> Result<()> {
        opt.step(&mut self.w_input, &mut self.w_input_velocity, &grads.w_input)?;
        opt.step(&mut self.w_hidden, &mut self.w_hidden_velocity, &grads.w_hidden)?;
        opt.step(&mut self.bias, &mut self.bias_velocity, &grads.bias)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LstmGrads {
    pub input: Tensor,
    pub w_input: Tensor,
    pub w_hidden: Tensor,
    pub bias: Tensor,
}

impl LstmGrads {
    pub fn accumulate(&mut self, other: &LstmGrads) {
        add_into(&mut self.w_input, &other.w_input);
        add_into(&mut self.w_hidden, &other.w_hidden);
        add_into(&mut self.bias, &other.bias);
    }

    pub fn scale(&mut self, s: f64) {
        for t in [&mut self.w_input, &mut self.w_hidden, &mut self.bias] {
            t.data_mut().iter_mut().for_each(|v| *v *= s);
        }
    }
}

/// Per-step activations kept for the backward pass.
#[derive(Clone, Debug)]
pub struct LstmCache {
    steps: usize,
    input: Tensor,
    /// `h_0 .. h_T`, `(T + 1) * H`.
    hidden: Vec<f64>,
    /// `c_0 .. c_T`, `(T + 1) * H`.
    cell: Vec<f64>,
    /// Activated gates per step, `T * 4H`.
    gates: Vec<f64>,
}

pub(crate) fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

fn check_sequence(sequence: &Tensor, params: &LstmParams) -> Result<(usize, usize)> {
    if sequence.shape().len() != 2 {
        return Err(Error::InvalidInput(format!(
            "lstm expects a [T x D] sequence, got {:?}",
            sequence.shape()
        )));
    }
    let (t, d) = (sequence.shape()[0], sequence.shape()[1]);
    if t == 0 {
        return Err(Error::InvalidInput("lstm sequence is empty".into()));
    }
    if d != params.input_size() {
        return Err(Error::InvalidSpec(format!(
            "lstm input size {d} != parameter input size {}",
            params.input_size()
        )));
    }
    Ok((t, d))
}

/// Runs the recurrence and returns the final hidden state `h_T`.
pub fn lstm_forward(sequence: &Tensor, params: &LstmParams) -> Result<Tensor> {
    let cache = lstm_forward_cached(sequence, params)?;
    let h = params.hidden_size;
    Ok(Tensor::from_vec(cache.hidden[cache.steps * h..].to_vec()))
}

pub fn lstm_forward_cached(sequence: &Tensor, params: &LstmParams) -> Result<LstmCache> {
    let (steps, d) = check_sequence(sequence, params)?;
    let h = params.hidden_size;
    let wi = params.w_input.data();
    let wh = params.w_hidden.data();
    let b = params.bias.data();
    let x = sequence.data();
    let mut hidden = vec![0.0; (steps + 1) * h];
    let mut cell = vec![0.0; (steps + 1) * h];
    let mut gates = vec![0.0; steps * 4 * h];
    let mut pre = vec![0.0; 4 * h];
    for t in 0..steps {
        let xt = &x[t * d..(t + 1) * d];
        let h_prev = &hidden[t * h..(t + 1) * h];
        for (r, p) in pre.iter_mut().enumerate() {
            let mut acc = b[r];
            for (w, v) in wi[r * d..(r + 1) * d].iter().zip(xt) {
                acc += w * v;
            }
            for (w, v) in wh[r * h..(r + 1) * h].iter().zip(h_prev) {
                acc += w * v;
            }
            *p = acc;
        }
        let g = &mut gates[t * 4 * h..(t + 1) * 4 * h];
        for j in 0..3 * h {
            g[j] = sigmoid(pre[j]);
        }
        for j in 3 * h..4 * h {
            g[j] = pre[j].tanh();
        }
        for j in 0..h {
            let c = g[h + j] * cell[t * h + j] + g[j] * g[3 * h + j];
            cell[(t + 1) * h + j] = c;
            hidden[(t + 1) * h + j] = g[2 * h + j] * c.tanh();
        }
    }
    Ok(LstmCache {
        steps,
        input: sequence.clone(),
        hidden,
        cell,
        gates,
    })
}

impl LstmCache {
    pub fn final_hidden(&self) -> Tensor {
        let h = self.hidden.len() / (self.steps + 1);
        Tensor::from_vec(self.hidden[self.steps * h..].to_vec())
    }
}

/// Backpropagation through time from a gradient on `h_T`.
pub fn lstm_backward(cache: &LstmCache, params: &LstmParams, grad_h: &Tensor) -> Result<LstmGrads> {
    let h = params.hidden_size;
    if grad_h.len() != h {
        return Err(Error::InvalidSpec(format!(
            "lstm grad_h has {} values, expected {h}",
            grad_h.len()
        )));
    }
    let d = params.input_size();
    let wi = params.w_input.data();
    let wh = params.w_hidden.data();
    let x = cache.input.data();
    let mut gwi = vec![0.0; wi.len()];
    let mut gwh = vec![0.0; wh.len()];
    let mut gb = vec![0.0; 4 * h];
    let mut gx = vec![0.0; x.len()];
    let mut dh = grad_h.data().to_vec();
    let mut dc = vec![0.0; h];
    let mut da = vec![0.0; 4 * h];
    for t in (0..cache.steps).rev() {
        let g = &cache.gates[t * 4 * h..(t + 1) * 4 * h];
        let c_prev = &cache.cell[t * h..(t + 1) * h];
        let c_t = &cache.cell[(t + 1) * h..(t + 2) * h];
        for j in 0..h {
            let (i, f, o, cand) = (g[j], g[h + j], g[2 * h + j], g[3 * h + j]);
            let tc = c_t[j].tanh();
            let d_o = dh[j] * tc;
            let dct = dc[j] + dh[j] * o * (1.0 - tc * tc);
            da[j] = dct * cand * i * (1.0 - i);
            da[h + j] = dct * c_prev[j] * f * (1.0 - f);
            da[2 * h + j] = d_o * o * (1.0 - o);
            da[3 * h + j] = dct * i * (1.0 - cand * cand);
            dc[j] = dct * f;
        }
        let xt = &x[t * d..(t + 1) * d];
        let h_prev = &cache.hidden[t * h..(t + 1) * h];
        let gxt = &mut gx[t * d..(t + 1) * d];
        dh.iter_mut().for_each(|v| *v = 0.0);
        for r in 0..4 * h {
            let a = da[r];
            gb[r] += a;
            for k in 0..d {
                gwi[r * d + k] += a * xt[k];
                gxt[k] += a * wi[r * d + k];
            }
            for k in 0..h {
                gwh[r * h + k] += a * h_prev[k];
                dh[k] += a * wh[r * h + k];
            }
        }
    }
    Ok(LstmGrads {
        input: Tensor::new(cache.input.shape().to_vec(), gx)?,
        w_input: Tensor::new(params.w_input.shape().to_vec(), gwi)?,
        w_hidden: Tensor::new(params.w_hidden.shape().to_vec(), gwh)?,
        bias: Tensor::from_vec(gb),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::gradcheck::{central_difference, max_relative_error};
    use crate::nn::init::seeded_rng;
    use rand::Rng;

    fn random_params(d: usize, h: usize, seed: u64) -> LstmParams {
        let mut rng = seeded_rng(seed);
        let mut draw = |n: usize| (0..n).map(|_| rng.random_range(-0.8..0.8)).collect::<Vec<_>>();
        LstmParams::new(
            Tensor::new(vec![4 * h, d], draw(4 * h * d)).unwrap(),
            Tensor::new(vec![4 * h, h], draw(4 * h * h)).unwrap(),
            Tensor::from_vec(draw(4 * h)),
        )
        .unwrap()
    }

    #[test]
    fn zero_weights_give_zero_state() {
        let p = LstmParams::zeros(3, 10);
        let seq = Tensor::new(vec![4, 3], (0..12).map(|v| v as f64).collect()).unwrap();
        assert!(lstm_forward(&seq, &p).unwrap().data().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn scalar_two_step_recurrence() {
        // H = 1, D = 1; weights per gate (i, f, o, g).
        let wi = [0.5, -0.3, 0.8, 1.2];
        let wh = [0.1, 0.4, -0.6, 0.7];
        let b = [0.05, 0.2, -0.1, 0.0];
        let p = LstmParams::new(
            Tensor::new(vec![4, 1], wi.to_vec()).unwrap(),
            Tensor::new(vec![4, 1], wh.to_vec()).unwrap(),
            Tensor::from_vec(b.to_vec()),
        )
        .unwrap();
        let xs = [0.7, -1.3];
        let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
        let (mut hh, mut cc) = (0.0f64, 0.0f64);
        for x in xs {
            let i = sig(wi[0] * x + wh[0] * hh + b[0]);
            let f = sig(wi[1] * x + wh[1] * hh + b[1]);
            let o = sig(wi[2] * x + wh[2] * hh + b[2]);
            let g = (wi[3] * x + wh[3] * hh + b[3]).tanh();
            cc = f * cc + i * g;
            hh = o * cc.tanh();
        }
        let out = lstm_forward(&Tensor::new(vec![2, 1], xs.to_vec()).unwrap(), &p).unwrap();
        assert!((out.data()[0] - hh).abs() < 1e-12);
    }

    #[test]
    fn empty_sequence_rejected() {
        let p = LstmParams::zeros(2, 3);
        // A [T x D] tensor cannot have T = 0, so an empty sequence can only
        // arrive as a wrong-rank tensor.
        assert!(matches!(
            lstm_forward(&Tensor::from_vec(vec![1.0, 2.0]), &p),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn bptt_matches_finite_differences() {
        let (t, d, h) = (5, 4, 3);
        let p = random_params(d, h, 21);
        let mut rng = seeded_rng(22);
        let seq = Tensor::new(vec![t, d], (0..t * d).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap();
        let r: Vec<f64> = (0..h).map(|_| rng.random_range(-1.0..1.0)).collect();
        let f = |s: &Tensor, p: &LstmParams| -> f64 {
            lstm_forward(s, p).unwrap().data().iter().zip(&r).map(|(a, b)| a * b).sum()
        };
        let cache = lstm_forward_cached(&seq, &p).unwrap();
        let g = lstm_backward(&cache, &p, &Tensor::from_vec(r.clone())).unwrap();

        let nx = central_difference(seq.data(), 1e-5, |v| f(&Tensor::new(vec![t, d], v.to_vec()).unwrap(), &p));
        assert!(max_relative_error(g.input.data(), &nx) < 1e-4);
        let nwi = central_difference(p.w_input.data(), 1e-5, |v| {
            let mut q = p.clone();
            q.w_input.data_mut().copy_from_slice(v);
            f(&seq, &q)
        });
        assert!(max_relative_error(g.w_input.data(), &nwi) < 1e-4);
        let nwh = central_difference(p.w_hidden.data(), 1e-5, |v| {
            let mut q = p.clone();
            q.w_hidden.data_mut().copy_from_slice(v);
            f(&seq, &q)
        });
        assert!(max_relative_error(g.w_hidden.data(), &nwh) < 1e-4);
        let nb = central_difference(p.bias.data(), 1e-5, |v| {
            let mut q = p.clone();
            q.bias.data_mut().copy_from_slice(v);
            f(&seq, &q)
        });
        assert!(max_relative_error(g.bias.data(), &nb) < 1e-4);
    }

    #[test]
    fn finite_for_huge_inputs() {
        let p = random_params(2, 3, 5);
        let seq = Tensor::new(vec![3, 2], vec![1e6, -1e6, 5e5, 1e6, -1e6, 0.0]).unwrap();
        let cache = lstm_forward_cached(&seq, &p).unwrap();
        assert!(cache.final_hidden().is_finite());
        let g = lstm_backward(&cache, &p, &Tensor::from_vec(vec![1.0; 3])).unwrap();
        assert!(g.w_input.is_finite() && g.input.is_finite());
    }
}

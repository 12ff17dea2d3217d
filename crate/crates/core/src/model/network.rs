use std::collections::BTreeMap;

use super::graph::{LayerSpec, ModelGraph};
use crate::error::{Error, Result};
use crate::nn::{
    conv1d_backward, conv1d_forward, inner_product, inner_product_backward, lstm_backward,
    lstm_forward_cached, relu, relu_backward, xavier_init, LayerGrads, LayerParams, LstmCache,
    LstmGrads, LstmParams, Sgd, Tensor,
};

#[derive(Clone, Debug, PartialEq)]
pub enum LayerState {
    Affine(LayerParams),
    Lstm(LstmParams),
    Stateless,
}

#[derive(Clone, Debug)]
pub enum LayerGradient {
    Affine(LayerGrads),
    Lstm(LstmGrads),
    Stateless,
}

impl LayerGradient {
    fn accumulate(&mut self, other: &LayerGradient) {
        match (self, other) {
            (LayerGradient::Affine(a), LayerGradient::Affine(b)) => a.accumulate(b),
            (LayerGradient::Lstm(a), LayerGradient::Lstm(b)) => a.accumulate(b),
            _ => {}
        }
    }

    fn scale(&mut self, s: f64) {
        match self {
            LayerGradient::Affine(g) => g.scale(s),
            LayerGradient::Lstm(g) => g.scale(s),
            LayerGradient::Stateless => {}
        }
    }
}

/// Gradients for every layer of a [`Network`].
#[derive(Clone, Debug)]
pub struct Gradients(pub Vec<LayerGradient>);

impl Gradients {
    pub fn accumulate(&mut self, other: &Gradients) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            a.accumulate(b);
        }
    }

    pub fn scale(&mut self, s: f64) {
        self.0.iter_mut().for_each(|g| g.scale(s));
    }
}

/// Layer inputs recorded by a forward pass.
pub struct Trace {
    /// `activations[i]` is the input of layer `i`; the last entry is the score.
    pub activations: Vec<Tensor>,
    lstm: BTreeMap<usize, LstmCache>,
}

impl Trace {
    pub fn score(&self) -> f64 {
        self.activations.last().expect("non-empty trace").data()[0]
    }
}

/// Splits a 64-bit seed into independent per-layer seeds.
fn layer_seed(seed: u64, layer: usize, slot: u64) -> u64 {
    let mut z = seed
        .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul(layer as u64 + 1))
        .wrapping_add(slot.wrapping_mul(0xD1B5_4A32_D192_ED03));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// A model graph with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Network {
    pub graph: ModelGraph,
    pub layers: Vec<LayerState>,
}

impl Network {
    /// Xavier-initialized weights and zero biases.
    pub fn init(graph: &ModelGraph, seed: u64) -> Result<Self> {
        graph.validate()?;
        let layers = (0..graph.layers.len())
            .map(|i| init_layer(&graph.layers[i], layer_seed(seed, i, 0)))
            .collect::<Result<_>>()?;
        Ok(Self {
            graph: graph.clone(),
            layers,
        })
    }

    /// All parameters zero.
    pub fn zeros(graph: &ModelGraph) -> Result<Self> {
        graph.validate()?;
        let layers = graph
            .layers
            .iter()
            .map(|l| match l {
                LayerSpec::Conv { spec, .. } => LayerState::Affine(LayerParams::new(
                    Tensor::zeros(&spec.weight_shape()),
                    Tensor::zeros(&[spec.out_channels]),
                )),
                LayerSpec::InnerProduct { inputs, outputs, .. } => LayerState::Affine(LayerParams::new(
                    Tensor::zeros(&[*outputs, *inputs]),
                    Tensor::zeros(&[*outputs]),
                )),
                LayerSpec::Lstm {
                    input_size,
                    hidden_size,
                    ..
                } => LayerState::Lstm(LstmParams::zeros(*input_size, *hidden_size)),
                _ => LayerState::Stateless,
            })
            .collect();
        Ok(Self {
            graph: graph.clone(),
            layers,
        })
    }

    /// Fresh Xavier weights and zero velocity for the named layer.
    pub fn reinit_layer(&mut self, name: &str, seed: u64) -> Result<()> {
        let i = self
            .graph
            .layer_index(name)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown layer `{name}`")))?;
        self.layers[i] = init_layer(&self.graph.layers[i], layer_seed(seed, i, 1))?;
        Ok(())
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| match l {
                LayerState::Affine(p) => p.param_count(),
                LayerState::Lstm(p) => p.param_count(),
                LayerState::Stateless => 0,
            })
            .sum()
    }

    fn check_input(&self, input: &Tensor) -> Result<()> {
        let want: usize = self.graph.input_shape.iter().product();
        if input.shape() != self.graph.input_shape.as_slice() && input.len() != want {
            return Err(Error::InvalidInput(format!(
                "model `{}` expects input {:?}, got {:?}",
                self.graph.name,
                self.graph.input_shape,
                input.shape()
            )));
        }
        Ok(())
    }

    /// Runs every layer, keeping the inputs needed for [`Network::backward`].
    pub fn forward_trace(&self, input: &Tensor) -> Result<Trace> {
        self.forward_until(input, self.layers.len())
    }

    fn forward_until(&self, input: &Tensor, stop: usize) -> Result<Trace> {
        self.check_input(input)?;
        let x = input.clone().reshape(self.graph.input_shape.clone())?;
        let mut activations = Vec::with_capacity(stop + 1);
        let mut lstm = BTreeMap::new();
        activations.push(x);
        for (i, (spec, state)) in self.graph.layers.iter().zip(&self.layers).take(stop).enumerate() {
            let x = activations.last().expect("input pushed");
            let y = match (spec, state) {
                (LayerSpec::Conv { spec, .. }, LayerState::Affine(p)) => conv1d_forward(x, spec, p)?,
                (LayerSpec::Relu { .. }, _) => relu(x),
                (LayerSpec::Flatten { .. }, _) => x.clone().reshape(vec![x.len()])?,
                (LayerSpec::Transpose { .. }, _) => x.transpose2()?,
                (LayerSpec::InnerProduct { .. }, LayerState::Affine(p)) => inner_product(x, p)?,
                (LayerSpec::Lstm { .. }, LayerState::Lstm(p)) => {
                    let cache = lstm_forward_cached(x, p)?;
                    let h = cache.final_hidden();
                    lstm.insert(i, cache);
                    h
                }
                _ => {
                    return Err(Error::InvalidSpec(format!(
                        "layer `{}` has mismatched parameters",
                        spec.name()
                    )))
                }
            };
            activations.push(y);
        }
        Ok(Trace { activations, lstm })
    }

    pub fn score(&self, input: &Tensor) -> Result<f64> {
        Ok(self.forward_trace(input)?.score())
    }

    /// Output of a tap layer (post-ReLU when a ReLU follows it), flattened.
    pub fn tap(&self, input: &Tensor, name: &str) -> Result<Tensor> {
        let i = self.graph.tap_index(name)?;
        let mut trace = self.forward_until(input, i + 1)?;
        let out = trace.activations.pop().expect("tap output");
        out.clone().reshape(vec![out.len()])
    }

    /// Backpropagates `d score` through the trace.
    pub fn backward(&self, trace: &Trace, grad_score: f64) -> Result<Gradients> {
        let n = self.layers.len();
        let mut grads: Vec<LayerGradient> = (0..n).map(|_| LayerGradient::Stateless).collect();
        let mut g = Tensor::from_vec(vec![grad_score]);
        for i in (0..n).rev() {
            let x = &trace.activations[i];
            let (spec, state) = (&self.graph.layers[i], &self.layers[i]);
            g = match (spec, state) {
                (LayerSpec::Conv { spec, .. }, LayerState::Affine(p)) => {
                    let (gx, gp) = conv1d_backward(x, spec, p, &g)?;
                    grads[i] = LayerGradient::Affine(gp);
                    gx
                }
                (LayerSpec::Relu { .. }, _) => relu_backward(x, &g.reshape(x.shape().to_vec())?)?,
                (LayerSpec::Flatten { .. }, _) => g.reshape(x.shape().to_vec())?,
                (LayerSpec::Transpose { .. }, _) => g.reshape(vec![x.shape()[1], x.shape()[0]])?.transpose2()?,
                (LayerSpec::InnerProduct { .. }, LayerState::Affine(p)) => {
                    let (gx, gp) = inner_product_backward(x, p, &g)?;
                    grads[i] = LayerGradient::Affine(gp);
                    gx
                }
                (LayerSpec::Lstm { .. }, LayerState::Lstm(p)) => {
                    let cache = trace
                        .lstm
                        .get(&i)
                        .ok_or_else(|| Error::InvalidInput("trace lacks LSTM cache".into()))?;
                    let lg = lstm_backward(cache, p, &g)?;
                    let gx = lg.input.clone();
                    grads[i] = LayerGradient::Lstm(lg);
                    gx
                }
                _ => {
                    return Err(Error::InvalidSpec(format!(
                        "layer `{}` has mismatched parameters",
                        spec.name()
                    )))
                }
            };
        }
        Ok(Gradients(grads))
    }

    /// Applies one SGD step; layers for which `frozen` returns true are skipped.
    pub fn apply(&mut self, grads: &Gradients, opt: &Sgd, frozen: impl Fn(&str) -> bool) -> Result<()> {
        for ((spec, state), g) in self.graph.layers.iter().zip(&mut self.layers).zip(&grads.0) {
            if frozen(spec.name()) {
                continue;
            }
            match (state, g) {
                (LayerState::Affine(p), LayerGradient::Affine(g)) => p.sgd_step(g, opt)?,
                (LayerState::Lstm(p), LayerGradient::Lstm(g)) => p.sgd_step(g, opt)?,
                _ => {}
            }
        }
        Ok(())
    }

    /// Named parameter and velocity tensors (`<param>` and `<param>.velocity`).
    pub fn named_tensors(&self) -> BTreeMap<String, Tensor> {
        let mut out = BTreeMap::new();
        for (spec, state) in self.graph.layers.iter().zip(&self.layers) {
            let names = spec.param_names();
            let tensors: Vec<(&Tensor, &Tensor)> = match state {
                LayerState::Affine(p) => vec![(&p.weights, &p.weight_velocity), (&p.bias, &p.bias_velocity)],
                LayerState::Lstm(p) => vec![
                    (&p.w_input, &p.w_input_velocity),
                    (&p.w_hidden, &p.w_hidden_velocity),
                    (&p.bias, &p.bias_velocity),
                ],
                LayerState::Stateless => Vec::new(),
            };
            for (name, (value, velocity)) in names.into_iter().zip(tensors) {
                out.insert(format!("{name}.velocity"), velocity.clone());
                out.insert(name, value.clone());
            }
        }
        out
    }

    /// Rebuilds a network from [`Network::named_tensors`] output.
    pub fn from_named(graph: &ModelGraph, tensors: &BTreeMap<String, Tensor>) -> Result<Self> {
        let mut net = Network::zeros(graph)?;
        let fetch = |name: &str, like: &Tensor| -> Result<Tensor> {
            let t = tensors
                .get(name)
                .ok_or_else(|| Error::InvalidInput(format!("missing tensor `{name}`")))?;
            if t.shape() != like.shape() {
                return Err(Error::InvalidInput(format!(
                    "tensor `{name}` has shape {:?}, expected {:?}",
                    t.shape(),
                    like.shape()
                )));
            }
            Ok(t.clone())
        };
        for (spec, state) in net.graph.layers.iter().zip(&mut net.layers) {
            let names = spec.param_names();
            match state {
                LayerState::Affine(p) => {
                    p.weights = fetch(&names[0], &p.weights)?;
                    p.bias = fetch(&names[1], &p.bias)?;
                    p.weight_velocity = fetch(&format!("{}.velocity", names[0]), &p.weight_velocity)?;
                    p.bias_velocity = fetch(&format!("{}.velocity", names[1]), &p.bias_velocity)?;
                }
                LayerState::Lstm(p) => {
                    p.w_input = fetch(&names[0], &p.w_input)?;
                    p.w_hidden = fetch(&names[1], &p.w_hidden)?;
                    p.bias = fetch(&names[2], &p.bias)?;
                    p.w_input_velocity = fetch(&format!("{}.velocity", names[0]), &p.w_input_velocity)?;
                    p.w_hidden_velocity = fetch(&format!("{}.velocity", names[1]), &p.w_hidden_velocity)?;
                    p.bias_velocity = fetch(&format!("{}.velocity", names[2]), &p.bias_velocity)?;
                }
                LayerState::Stateless => {}
            }
        }
        Ok(net)
    }

    pub fn quantize_f32(&mut self) {
        for state in &mut self.layers {
            match state {
                LayerState::Affine(p) => {
                    for t in [&mut p.weights, &mut p.bias, &mut p.weight_velocity, &mut p.bias_velocity] {
                        t.quantize_f32();
                    }
                }
                LayerState::Lstm(p) => {
                    for t in [
                        &mut p.w_input,
                        &mut p.w_hidden,
                        &mut p.bias,
                        &mut p.w_input_velocity,
                        &mut p.w_hidden_velocity,
                        &mut p.bias_velocity,
                    ] {
                        t.quantize_f32();
                    }
                }
                LayerState::Stateless => {}
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.named_tensors().values().all(Tensor::is_finite)
    }
}

fn init_layer(spec: &LayerSpec, seed: u64) -> Result<LayerState> {
    Ok(match spec {
        LayerSpec::Conv { spec, .. } => LayerState::Affine(LayerParams::new(
            xavier_init(&spec.weight_shape(), spec.fan_in(), seed)?,
            Tensor::zeros(&[spec.out_channels]),
        )),
        LayerSpec::InnerProduct { inputs, outputs, .. } => LayerState::Affine(LayerParams::new(
            xavier_init(&[*outputs, *inputs], *inputs, seed)?,
            Tensor::zeros(&[*outputs]),
        )),
        LayerSpec::Lstm {
            input_size,
            hidden_size,
            ..
        } => LayerState::Lstm(LstmParams::new(
            xavier_init(&[4 * hidden_size, *input_size], *input_size, seed)?,
            xavier_init(&[4 * hidden_size, *hidden_size], *hidden_size, seed ^ 0x5555)?,
            Tensor::zeros(&[4 * hidden_size]),
        )?),
        _ => LayerState::Stateless,
    })
}

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::haptic::{INSTANCE_CHANNELS, INSTANCE_LEN};
use crate::nn::ConvSpec;

/// Width of the haptic CNN's convolutional layers.
pub const CNN_CHANNELS: usize = 64;
/// Channel groups in every haptic convolution: one per input signal.
pub const CNN_GROUPS: usize = 32;
pub const LSTM_HIDDEN: usize = 10;
pub const LSTM_FC: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum LayerSpec {
    Conv { name: String, spec: ConvSpec },
    Relu { name: String },
    Flatten { name: String },
    /// Swaps `[C, T]` to `[T, C]`.
    Transpose { name: String },
    InnerProduct { name: String, inputs: usize, outputs: usize },
    Lstm { name: String, input_size: usize, hidden_size: usize },
}

impl LayerSpec {
    pub fn name(&self) -> &str {
        match self {
            LayerSpec::Conv { name, .. }
            | LayerSpec::Relu { name }
            | LayerSpec::Flatten { name }
            | LayerSpec::Transpose { name }
            | LayerSpec::InnerProduct { name, .. }
            | LayerSpec::Lstm { name, .. } => name,
        }
    }

    /// Names of the trainable tensors this layer owns.
    pub fn param_names(&self) -> Vec<String> {
        let n = self.name();
        match self {
            LayerSpec::Conv { .. } | LayerSpec::InnerProduct { .. } => {
                vec![format!("{n}.weight"), format!("{n}.bias")]
            }
            LayerSpec::Lstm { .. } => vec![
                format!("{n}.w_input"),
                format!("{n}.w_hidden"),
                format!("{n}.bias"),
            ],
            _ => Vec::new(),
        }
    }

    fn output_shape(&self, input: &[usize]) -> Result<Vec<usize>> {
        let bad = |why: String| Error::InvalidSpec(format!("layer `{}`: {why}", self.name()));
        match self {
            LayerSpec::Conv { spec, .. } => {
                spec.validate()?;
                if input.len() != 2 || input[0] != spec.in_channels {
                    return Err(bad(format!("expects [{} x T], got {input:?}", spec.in_channels)));
                }
                Ok(vec![spec.out_channels, spec.output_len(input[1])?])
            }
            LayerSpec::Relu { .. } => Ok(input.to_vec()),
            LayerSpec::Flatten { .. } => Ok(vec![input.iter().product()]),
            LayerSpec::Transpose { .. } => {
                if input.len() != 2 {
                    return Err(bad(format!("expects rank 2, got {input:?}")));
                }
                Ok(vec![input[1], input[0]])
            }
            LayerSpec::InnerProduct { inputs, outputs, .. } => {
                let n: usize = input.iter().product();
                if n != *inputs || *outputs == 0 {
                    return Err(bad(format!("expects {inputs} inputs, got {input:?}")));
                }
                Ok(vec![*outputs])
            }
            LayerSpec::Lstm {
                input_size,
                hidden_size,
                ..
            } => {
                if input.len() != 2 || input[1] != *input_size || *hidden_size == 0 {
                    return Err(bad(format!("expects [T x {input_size}], got {input:?}")));
                }
                Ok(vec![*hidden_size])
            }
        }
    }
}

/// Ordered layer list with a named classifier layer and activation taps.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelGraph {
    pub name: String,
    pub input_shape: Vec<usize>,
    pub layers: Vec<LayerSpec>,
    /// Final inner product, reinitialized for hinge fine-tuning.
    pub classifier: String,
    pub taps: Vec<String>,
}

impl ModelGraph {
    /// Checks names and adjacent shapes; returns the output shape of every layer.
    pub fn validate(&self) -> Result<Vec<Vec<usize>>> {
        let mut names = BTreeSet::new();
        for l in &self.layers {
            if !names.insert(l.name()) {
                return Err(Error::InvalidSpec(format!("duplicate layer name `{}`", l.name())));
            }
        }
        let mut shapes = Vec::with_capacity(self.layers.len());
        let mut shape = self.input_shape.clone();
        for l in &self.layers {
            shape = l.output_shape(&shape)?;
            shapes.push(shape.clone());
        }
        if shape != [1] {
            return Err(Error::InvalidSpec(format!(
                "model `{}` must end in a scalar score, ends in {shape:?}",
                self.name
            )));
        }
        match self.layer_index(&self.classifier) {
            Some(i) if matches!(self.layers[i], LayerSpec::InnerProduct { .. }) => {}
            _ => {
                return Err(Error::InvalidSpec(format!(
                    "classifier `{}` is not an inner-product layer",
                    self.classifier
                )))
            }
        }
        for t in &self.taps {
            if self.layer_index(t).is_none() {
                return Err(Error::InvalidSpec(format!("unknown tap layer `{t}`")));
            }
        }
        Ok(shapes)
    }

    pub fn layer_index(&self, name: &str) -> Option<usize> {
        self.layers.iter().position(|l| l.name() == name)
    }

    /// Index of the layer whose output a tap on `name` reads: the layer
    /// itself, or the ReLU directly after it.
    pub fn tap_index(&self, name: &str) -> Result<usize> {
        let i = self
            .layer_index(name)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown tap layer `{name}`")))?;
        Ok(match self.layers.get(i + 1) {
            Some(LayerSpec::Relu { .. }) => i + 1,
            _ => i,
        })
    }

    pub fn param_count(&self) -> usize {
        self.layers
            .iter()
            .map(|l| match l {
                LayerSpec::Conv { spec, .. } => spec.weight_count() + spec.out_channels,
                LayerSpec::InnerProduct { inputs, outputs, .. } => inputs * outputs + outputs,
                LayerSpec::Lstm {
                    input_size,
                    hidden_size,
                    ..
                } => 4 * hidden_size * (input_size + hidden_size + 1),
                _ => 0,
            })
            .sum()
    }
}

fn conv(name: &str, in_channels: usize, kernel_len: usize) -> LayerSpec {
    LayerSpec::Conv {
        name: name.into(),
        spec: ConvSpec {
            in_channels,
            out_channels: CNN_CHANNELS,
            kernel_len,
            stride: 2,
            pad: kernel_len / 2,
            groups: CNN_GROUPS,
        },
    }
}

/// Three grouped temporal convolutions (kernels 7/5/3, stride 2, 64
/// channels, 32 groups) with ReLUs, then one inner product to a score.
/// Signals only mix in the inner product. `conv3` is the feature tap.
pub fn build_haptic_cnn() -> ModelGraph {
    let mut layers = vec![
        conv("conv1", INSTANCE_CHANNELS, 7),
        LayerSpec::Relu { name: "relu1".into() },
        conv("conv2", CNN_CHANNELS, 5),
        LayerSpec::Relu { name: "relu2".into() },
        conv("conv3", CNN_CHANNELS, 3),
        LayerSpec::Relu { name: "relu3".into() },
        LayerSpec::Flatten { name: "flatten".into() },
    ];
    let mut graph = ModelGraph {
        name: "haptic-cnn".into(),
        input_shape: vec![INSTANCE_CHANNELS, INSTANCE_LEN],
        layers: Vec::new(),
        classifier: "fc".into(),
        taps: vec!["conv3".into()],
    };
    // Flattened conv3 width depends on the conv arithmetic.
    let mut shape = graph.input_shape.clone();
    for l in &layers {
        shape = l.output_shape(&shape).expect("static CNN spec");
    }
    layers.push(LayerSpec::InnerProduct {
        name: "fc".into(),
        inputs: shape[0],
        outputs: 1,
    });
    graph.layers = layers;
    graph
}

/// LSTM with 10 units over the 150 time steps of 32-channel input, then a
/// 10-unit inner product with ReLU and a scalar inner product.
pub fn build_haptic_lstm() -> ModelGraph {
    ModelGraph {
        name: "haptic-lstm".into(),
        input_shape: vec![INSTANCE_CHANNELS, INSTANCE_LEN],
        layers: vec![
            LayerSpec::Transpose { name: "time-major".into() },
            LayerSpec::Lstm {
                name: "lstm".into(),
                input_size: INSTANCE_CHANNELS,
                hidden_size: LSTM_HIDDEN,
            },
            LayerSpec::InnerProduct {
                name: "fc1".into(),
                inputs: LSTM_HIDDEN,
                outputs: LSTM_FC,
            },
            LayerSpec::Relu { name: "relu1".into() },
            LayerSpec::InnerProduct {
                name: "fc2".into(),
                inputs: LSTM_FC,
                outputs: 1,
            },
        ],
        classifier: "fc2".into(),
        taps: vec!["lstm".into()],
    }
}

/// A single inner product over a feature vector; used for instance
/// combination and multimodal fusion, where only the loss layer is learned.
pub fn build_linear_classifier(inputs: usize) -> ModelGraph {
    ModelGraph {
        name: "linear".into(),
        input_shape: vec![inputs],
        layers: vec![LayerSpec::InnerProduct {
            name: "fc".into(),
            inputs,
            outputs: 1,
        }],
        classifier: "fc".into(),
        taps: Vec::new(),
    }
}

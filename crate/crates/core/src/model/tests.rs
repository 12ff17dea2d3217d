use rand::Rng;

use super::*;
use crate::error::Error;
use crate::haptic::{InstanceMatrix, Provenance};
use crate::nn::{
    conv1d_forward, inner_product, lstm_forward, relu, seeded_rng,
    ConvSpec, Loss, Tensor,
};
use crate::nn::gradcheck::{central_difference, max_relative_error};
use crate::synth::separable_instances;

fn random_tensor(shape: &[usize], seed: u64) -> Tensor {
    let mut rng = seeded_rng(seed);
    let n = shape.iter().product();
    Tensor::new(shape.to_vec(), (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap()
}

fn affine(net: &Network, i: usize) -> &crate::nn::LayerParams {
    match &net.layers[i] {
        LayerState::Affine(p) => p,
        _ => panic!("layer {i} is not affine"),
    }
}

fn conv_spec(net: &Network, i: usize) -> &ConvSpec {
    match &net.graph.layers[i] {
        LayerSpec::Conv { spec, .. } => spec,
        _ => panic!("layer {i} is not a conv"),
    }
}

fn accuracy(scores: &[f64], labels: &[f64]) -> f64 {
    let hits = scores.iter().zip(labels).filter(|(s, y)| (**s > 0.0) == (**y > 0.0)).count();
    hits as f64 / scores.len() as f64
}

#[test]
fn group_isolation_probe() {
    let net = Network::init(&build_haptic_cnn(), 3).unwrap();
    let x = random_tensor(&[32, 150], 4);
    // Input of layer 5 is conv3's pre-activation output.
    let base = net.forward_trace(&x).unwrap().activations[5].clone();
    assert_eq!(base.shape(), &[64, 19]);
    for c in 0..32 {
        let mut probe = x.clone();
        for t in 0..150 {
            probe.data_mut()[c * 150 + t] += 0.5 + 0.01 * t as f64;
        }
        let out = net.forward_trace(&probe).unwrap().activations[5].clone();
        for o in 0..64 {
            let row = |t: &Tensor| t.data()[o * 19..(o + 1) * 19].to_vec();
            if o / 2 == c {
                assert_ne!(row(&out), row(&base), "group {c} output {o} did not react");
            } else {
                assert_eq!(row(&out), row(&base), "channel {c} leaked into output {o}");
            }
        }
    }
}

#[test]
fn grouping_divides_weights_by_32() {
    let g = build_haptic_cnn();
    for l in &g.layers {
        if let LayerSpec::Conv { spec, .. } = l {
            let dense = ConvSpec { groups: 1, ..*spec };
            assert_eq!(dense.weight_count(), 32 * spec.weight_count());
        }
    }
    assert_eq!(Network::init(&g, 0).unwrap().param_count(), g.param_count());
}

#[test]
fn zero_lstm_scores_zero() {
    let net = Network::zeros(&build_haptic_lstm()).unwrap();
    for seed in 0..5 {
        assert_eq!(net.score(&random_tensor(&[32, 150], seed)).unwrap(), 0.0);
    }
}

#[test]
fn cnn_matches_hand_composition() {
    let net = Network::init(&build_haptic_cnn(), 11).unwrap();
    let x = random_tensor(&[32, 150], 12);
    let mut h = x.clone();
    for i in [0, 2, 4] {
        h = relu(&conv1d_forward(&h, conv_spec(&net, i), affine(&net, i)).unwrap());
    }
    let flat = h.clone().reshape(vec![h.len()]).unwrap();
    let want = inner_product(&flat, affine(&net, 7)).unwrap().data()[0];
    assert!((net.score(&x).unwrap() - want).abs() <= 1e-12);
}

#[test]
fn lstm_matches_hand_composition() {
    let net = Network::init(&build_haptic_lstm(), 21).unwrap();
    let x = random_tensor(&[32, 150], 22);
    let lstm = match &net.layers[1] {
        LayerState::Lstm(p) => p,
        _ => unreachable!(),
    };
    let h = lstm_forward(&x.transpose2().unwrap(), lstm).unwrap();
    let h = relu(&inner_product(&h, affine(&net, 2)).unwrap());
    let want = inner_product(&h, affine(&net, 4)).unwrap().data()[0];
    assert!((net.score(&x).unwrap() - want).abs() <= 1e-12);
}

/// Central differences of the score with respect to every parameter and
/// input value of a network, compared to backprop.
fn check_network_gradients(graph: &ModelGraph, input_shape: &[usize], seed: u64, stride: usize) {
    // Nonzero biases keep pre-activations away from the ReLU kink, which
    // zero biases hit exactly wherever an input window is all zero.
    let mut named = Network::init(graph, seed).unwrap().named_tensors();
    for (name, t) in named.iter_mut() {
        if name.ends_with(".bias") {
            let shape = t.shape().to_vec();
            *t = random_tensor(&shape, seed + name.len() as u64);
        }
    }
    let net = Network::from_named(graph, &named).unwrap();
    let x = random_tensor(input_shape, seed + 100);
    let trace = net.forward_trace(&x).unwrap();
    let grads = net.backward(&trace, 1.0).unwrap();
    for (li, (spec, g)) in graph.layers.iter().zip(&grads.0).enumerate() {
        let analytic: Vec<&Tensor> = match g {
            LayerGradient::Affine(g) => vec![&g.weights, &g.bias],
            LayerGradient::Lstm(g) => vec![&g.w_input, &g.w_hidden, &g.bias],
            LayerGradient::Stateless => continue,
        };
        for (name, a) in spec.param_names().iter().zip(analytic) {
            let base = named[name].data().to_vec();
            let idx: Vec<usize> = (0..base.len()).step_by(stride).collect();
            let probe: Vec<f64> = idx.iter().map(|&i| base[i]).collect();
            let numeric = central_difference(&probe, 1e-5, |p| {
                let mut tensors = named.clone();
                let t = tensors.get_mut(name).unwrap();
                for (&i, v) in idx.iter().zip(p) {
                    t.data_mut()[i] = *v;
                }
                Network::from_named(graph, &tensors).unwrap().score(&x).unwrap()
            });
            let analytic: Vec<f64> = idx.iter().map(|&i| a.data()[i]).collect();
            let err = max_relative_error(&analytic, &numeric);
            assert!(err < 1e-4, "layer {li} `{name}`: relative error {err}");
        }
    }
}

#[test]
fn cnn_gradients_match_finite_differences() {
    check_network_gradients(&build_haptic_cnn(), &[32, 150], 5, 7);
}

#[test]
fn lstm_gradients_match_finite_differences() {
    check_network_gradients(&build_haptic_lstm(), &[32, 150], 6, 5);
}

#[test]
fn training_is_deterministic_and_converges() {
    let (x, y) = separable_instances(200, 1);
    let schedule = TrainSchedule {
        epochs: 150,
        finetune_epochs: 50,
        ..TrainSchedule::default()
    };
    let graph = build_haptic_cnn();
    let a = train(&graph, &x, &y, &schedule).unwrap();
    assert!(a.loss_curve.iter().all(|p| p.loss.is_finite()));
    assert_eq!(a.loss_curve.len(), 200);
    let logistic: Vec<f64> = a.loss_curve.iter().filter(|p| p.phase == Loss::Logistic).map(|p| p.loss).collect();
    assert!(logistic.last().unwrap() <= logistic.first().unwrap());
    let net = &a.checkpoint.network;
    assert!(accuracy(&score_all(net, &x).unwrap(), &y) >= 0.99);
    assert_eq!(
        mean_loss(net, &x, &y, Loss::Hinge).unwrap(),
        a.checkpoint.meta.final_loss.unwrap()
    );

    let short = TrainSchedule {
        epochs: 3,
        finetune_epochs: 2,
        batch_size: 64,
        seed: 9,
        ..TrainSchedule::default()
    };
    let r1 = train(&graph, &x[..50], &y[..50], &short).unwrap();
    let r2 = train(&graph, &x[..50], &y[..50], &short).unwrap();
    assert_eq!(r1.checkpoint, r2.checkpoint);
    assert_eq!(r1.loss_curve, r2.loss_curve);
    let r3 = train(&graph, &x[..50], &y[..50], &TrainSchedule { seed: 10, ..short }).unwrap();
    assert_ne!(r1.checkpoint, r3.checkpoint);
}

#[test]
fn freeze_flag_keeps_features() {
    let (x, y) = separable_instances(20, 2);
    let graph = build_haptic_cnn();
    let pre = TrainSchedule {
        epochs: 2,
        phases: PhasePlan::LogisticOnly,
        ..TrainSchedule::default()
    };
    let frozen = TrainSchedule {
        finetune_epochs: 2,
        phases: PhasePlan::LogisticThenHinge,
        freeze_features: true,
        ..pre.clone()
    };
    let mut a = train(&graph, &x, &y, &pre).unwrap().checkpoint.network;
    let b = train(&graph, &x, &y, &frozen).unwrap().checkpoint.network;
    a.quantize_f32();
    for i in [0, 2, 4] {
        assert_eq!(affine(&a, i).weights, affine(&b, i).weights);
    }
    assert_ne!(affine(&a, 7).weights, affine(&b, 7).weights);
}

#[test]
fn train_rejects_bad_labels_and_reports_divergence() {
    let graph = build_linear_classifier(3);
    let x = vec![Tensor::from_vec(vec![1.0, 2.0, 3.0]); 2];
    let err = train(&graph, &x, &[1.0, 0.0], &TrainSchedule::default()).unwrap_err();
    assert!(matches!(err, Error::InvalidInput(_)));
    assert!(train(&graph, &[], &[], &TrainSchedule::default()).is_err());

    let huge = vec![Tensor::from_vec(vec![1e300, -1e300, 1e300]); 2];
    let schedule = TrainSchedule {
        epochs: 5,
        lr: 1e10,
        ..TrainSchedule::default()
    };
    match train(&graph, &huge, &[1.0, -1.0], &schedule) {
        Err(Error::Diverged { last_finite, .. }) => assert!(last_finite.network.is_finite()),
        other => panic!("expected divergence, got {other:?}"),
    }
}

fn instance(object: u32, trial: u32, seed: u64) -> InstanceMatrix {
    InstanceMatrix {
        data: random_tensor(&[32, 150], seed),
        provenance: Provenance {
            object_id: object,
            trial_index: trial,
            finger: 0,
            offset: 0,
        },
    }
}

#[test]
fn extraction_is_pure_and_nonnegative() {
    let net = Network::init(&build_haptic_cnn(), 1).unwrap();
    let a = instance(0, 0, 7);
    let feats = extract_activations(&net, &[a.clone(), a.clone()], "conv3").unwrap();
    assert_eq!(feats[0].values.len(), 64 * 19);
    assert_eq!(feats[0].values, feats[1].values);
    assert!(feats[0].values.data().iter().all(|v| *v >= 0.0));
    assert!(matches!(
        extract_activations(&net, &[a], "conv9"),
        Err(Error::InvalidSpec(_))
    ));
}

fn feature(object: u32, index: u32, len: usize) -> FeatureVector {
    FeatureVector {
        object_id: object,
        index: Some(index),
        values: Tensor::from_vec((0..len).map(|i| (index * 100 + i as u32) as f64).collect()),
    }
}

#[test]
fn combine_orders_and_slices() {
    let feats: Vec<FeatureVector> = (0..10).map(|t| feature(4, t, 6)).collect();
    let mut shuffled = feats.clone();
    shuffled.reverse();
    shuffled.swap(2, 7);
    let a = combine_instances(&feats, 10).unwrap();
    let b = combine_instances(&shuffled, 10).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.values.len(), 60);
    for (t, f) in feats.iter().enumerate() {
        assert_eq!(&a.values.data()[t * 6..(t + 1) * 6], f.values.data());
    }
    assert!(combine_instances(&feats[..9], 10).is_err());
    let mut dup = feats.clone();
    dup[3].index = Some(4);
    assert!(combine_instances(&dup, 10).is_err());
    let mut mixed = feats;
    mixed[0].object_id = 5;
    assert!(combine_instances(&mixed, 10).is_err());
}

#[test]
fn fusion_is_affine_in_features() {
    let haptic: Vec<FeatureVector> = (0..8).map(|o| feature(o, 0, 5)).collect();
    let visual: Vec<FeatureVector> = (0..8).map(|o| feature(o, 0, 3)).collect();
    assert_eq!(fuse_features(&haptic[0], &visual[0]).unwrap().values.len(), 8);
    assert!(fuse_features(&haptic[0], &visual[1]).is_err());

    let labels: Vec<f64> = (0..8).map(|o| if o % 2 == 0 { 1.0 } else { -1.0 }).collect();
    let schedule = TrainSchedule {
        epochs: 5,
        ..TrainSchedule::default()
    };
    let out = fuse_and_train(&haptic, &visual, &labels, &schedule).unwrap();
    assert_eq!(out.checkpoint.meta.final_phase, Some(Loss::Hinge));
    let net = &out.checkpoint.network;
    let x = random_tensor(&[8], 1);
    let alpha = 0.37;
    let scaled = Tensor::from_vec(x.data().iter().map(|v| alpha * v).collect());
    let bias = net.score(&Tensor::zeros(&[8])).unwrap();
    let lhs = net.score(&scaled).unwrap();
    let rhs = alpha * net.score(&x).unwrap() + (1.0 - alpha) * bias;
    assert!((lhs - rhs).abs() < 1e-12);

    // With the visual half zeroed, scores depend only on the haptic segment.
    let w = affine(net, 0).weights.data();
    let mut hv = x.clone();
    hv.data_mut()[5..].fill(0.0);
    let want: f64 = bias + w[..5].iter().zip(&x.data()[..5]).map(|(a, b)| a * b).sum::<f64>();
    assert!((net.score(&hv).unwrap() - want).abs() < 1e-12);
    assert!(fuse_and_train(&haptic, &visual[..7], &labels, &schedule).is_err());
}

//! Synthetic datasets with known latent structure.
//!
//! Every object draws a latent factor vector. Haptic channels are mixtures
//! of two orthogonal zero-mean templates whose mixing angle follows the
//! haptic-visible factors, so the information survives per-series
//! z-scoring. Electrodes are a fixed 19 x 4 mixing of four such latent
//! series. Visual feature maps are a positive base plus factor-driven
//! low-rank structure. Labels threshold factor sums at a fixed prevalence.

use std::collections::BTreeMap;
use std::f64::consts::{FRAC_PI_4, PI};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::adjectives::{AdjectiveLabelSet, ADJECTIVE_COUNT};
use crate::error::{Error, Result};
use crate::haptic::{Channel, Ep, HapticTrial, ELECTRODES, FINGERS, INSTANCE_CHANNELS, INSTANCE_LEN, PAC_DECIMATION, PCA_COMPONENTS};
use crate::nn::{seeded_rng, Tensor};
use crate::visual::{VisualFeatureMap, VIEWS};

/// Strength of the latent cue in visual feature maps.
const VISUAL_GAIN: f64 = 1.5;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub name: String,
    pub objects: usize,
    pub trials: usize,
    pub latent_factors: usize,
    pub noise: f64,
    pub seed: u64,
    /// Per factor: `[haptic weight, visual weight]`.
    pub informativeness: Vec<[f64; 2]>,
    /// Factors whose sum decides each adjective.
    pub adjective_factors: Vec<Vec<usize>>,
    /// Samples per 100 Hz channel for the fixed-length EPs.
    pub base_len: usize,
    /// Squeeze recordings get up to this many extra samples.
    pub squeeze_extra: usize,
    /// Feature map `[H, W, C]` of each view.
    pub feature_map: [usize; 3],
}

impl Default for SynthConfig {
    fn default() -> Self {
        let k = 4;
        Self {
            name: "synthetic".into(),
            objects: 53,
            trials: 10,
            latent_factors: k,
            noise: 0.05,
            seed: 0,
            informativeness: vec![[1.0, 1.0]; k],
            adjective_factors: (0..ADJECTIVE_COUNT).map(|j| vec![j % k]).collect(),
            base_len: 160,
            squeeze_extra: 40,
            feature_map: [4, 4, 32],
        }
    }
}

impl SynthConfig {
    /// One factor visible to both modalities, low noise: every label is
    /// recoverable from haptics alone.
    pub fn separable(objects: usize, trials: usize, seed: u64) -> Self {
        Self {
            name: "separable".into(),
            objects,
            trials,
            latent_factors: 1,
            noise: 0.02,
            seed,
            informativeness: vec![[1.0, 1.0]],
            adjective_factors: vec![vec![0]; ADJECTIVE_COUNT],
            ..Self::default()
        }
    }

    /// Labels follow `z0 + z1`, with `z0` only visible to touch and `z1` only
    /// visible to vision.
    pub fn two_cue(objects: usize, trials: usize, seed: u64) -> Self {
        Self {
            name: "two-cue".into(),
            objects,
            trials,
            latent_factors: 2,
            noise: 0.05,
            seed,
            informativeness: vec![[1.0, 0.0], [0.0, 1.0]],
            adjective_factors: vec![vec![0, 1]; ADJECTIVE_COUNT],
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |why: &str| Err(Error::InvalidInput(format!("synth config: {why}")));
        if self.objects < 2 || self.trials < 1 || self.latent_factors < 1 {
            return bad("need >= 2 objects, >= 1 trial and >= 1 latent factor");
        }
        if !(self.noise >= 0.0) {
            return bad("noise must be >= 0");
        }
        if self.informativeness.len() != self.latent_factors {
            return bad("informativeness needs one row per latent factor");
        }
        if self.adjective_factors.len() != ADJECTIVE_COUNT
            || self
                .adjective_factors
                .iter()
                .any(|f| f.is_empty() || f.iter().any(|&i| i >= self.latent_factors))
        {
            return bad("adjective_factors needs 24 non-empty lists of valid factor indices");
        }
        if self.base_len < INSTANCE_LEN + 4 {
            return bad("base_len must leave room for 150 samples at offset 4");
        }
        if self.feature_map.iter().any(|&d| d == 0) {
            return bad("feature map dims must be positive");
        }
        Ok(())
    }

    /// Share of positive objects for adjective `j`.
    pub fn prevalence(j: usize) -> f64 {
        [0.3, 0.4, 0.5][j % 3]
    }
}

/// Structure shared by all objects of a dataset.
struct World {
    /// Per EP, per scalar channel: template frequencies, phases and factor
    /// sensitivities.
    scalar: Vec<Vec<Template>>,
    /// Per EP: four electrode latent templates and the 19 x 4 mixing.
    electrode_latent: Vec<Vec<Template>>,
    mixing: Vec<Vec<[f64; PCA_COMPONENTS]>>,
    electrode_offset: Vec<f64>,
    /// Per factor: direction in feature-channel space and a spatial pattern.
    visual_dirs: Vec<Vec<f64>>,
    visual_spatial: Vec<Vec<f64>>,
    visual_base: Vec<f64>,
}

struct Template {
    freq_a: f64,
    freq_b: f64,
    phase_a: f64,
    phase_b: f64,
    sensitivity: Vec<f64>,
    offset: f64,
    scale: f64,
}

impl Template {
    fn draw(rng: &mut ChaCha8Rng, factors: usize) -> Self {
        let fa = rng.random_range(1..=3) as f64;
        let fb = fa + rng.random_range(1..=2) as f64;
        let norm = 1.0 / (factors as f64).sqrt();
        Self {
            freq_a: fa,
            freq_b: fb,
            phase_a: rng.random_range(0.0..2.0 * PI),
            phase_b: rng.random_range(0.0..2.0 * PI),
            sensitivity: (0..factors)
                .map(|_| {
                    let s: f64 = StandardNormal.sample(rng);
                    // Keep every channel clearly responsive.
                    (s.signum() * (0.5 + s.abs())) * norm
                })
                .collect(),
            offset: rng.random_range(-500.0..2500.0),
            scale: rng.random_range(5.0..200.0),
        }
    }

    /// Mixing angle in (0, pi/2) for a haptic cue vector.
    fn angle(&self, cue: &[f64], jitter: f64) -> f64 {
        let theta: f64 = self.sensitivity.iter().zip(cue).map(|(s, a)| s * a).sum::<f64>() + jitter;
        FRAC_PI_4 * theta.tanh() + FRAC_PI_4
    }

    /// Zero-mean unit-amplitude shape at phase `u` in [0, 1).
    fn shape(&self, u: f64, angle: f64) -> f64 {
        angle.cos() * (2.0 * PI * self.freq_a * u + self.phase_a).sin()
            + angle.sin() * (2.0 * PI * self.freq_b * u + self.phase_b).sin()
    }
}

impl World {
    fn new(config: &SynthConfig) -> Self {
        let mut rng = seeded_rng(config.seed ^ 0xA11CE);
        let k = config.latent_factors;
        let scalar = Ep::ALL
            .iter()
            .map(|_| (0..4).map(|_| Template::draw(&mut rng, k)).collect())
            .collect();
        let electrode_latent = Ep::ALL
            .iter()
            .map(|_| (0..PCA_COMPONENTS).map(|_| Template::draw(&mut rng, k)).collect())
            .collect();
        let mixing = Ep::ALL
            .iter()
            .map(|_| {
                (0..ELECTRODES)
                    .map(|_| std::array::from_fn(|_| StandardNormal.sample(&mut rng)))
                    .collect()
            })
            .collect();
        let electrode_offset = (0..ELECTRODES).map(|_| rng.random_range(2000.0..3500.0)).collect();
        let [h, w, c] = config.feature_map;
        let visual_dirs = (0..k)
            .map(|_| (0..c).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        let visual_spatial = (0..k)
            .map(|_| (0..h * w).map(|_| rng.random_range(0.5..1.5)).collect())
            .collect();
        let visual_base = (0..c).map(|_| rng.random_range(1.0..2.0)).collect();
        Self {
            scalar,
            electrode_latent,
            mixing,
            electrode_offset,
            visual_dirs,
            visual_spatial,
            visual_base,
        }
    }
}

/// Per-object latent factors.
fn latents(config: &SynthConfig) -> Vec<Vec<f64>> {
    let mut rng = seeded_rng(config.seed ^ 0x1A7E);
    (0..config.objects)
        .map(|_| (0..config.latent_factors).map(|_| StandardNormal.sample(&mut rng)).collect())
        .collect()
}

fn mix_seed(seed: u64, parts: &[u64]) -> u64 {
    parts.iter().fold(seed ^ 0xC0FFEE, |acc, p| {
        let z = (acc ^ p).wrapping_mul(0x9E37_79B9_7F4A_7C15);
        z ^ (z >> 29)
    })
}

/// Labels from latent factor sums, thresholded so that a fixed share of
/// objects is positive for each adjective.
pub fn synth_labels(config: &SynthConfig) -> Result<Vec<AdjectiveLabelSet>> {
    config.validate()?;
    let z = latents(config);
    let mut out: Vec<AdjectiveLabelSet> = (0..config.objects)
        .map(|o| AdjectiveLabelSet {
            object_id: o as u32,
            labels: [false; ADJECTIVE_COUNT],
        })
        .collect();
    for (j, factors) in config.adjective_factors.iter().enumerate() {
        let score = |o: usize| factors.iter().map(|&f| z[o][f]).sum::<f64>();
        let mut order: Vec<usize> = (0..config.objects).collect();
        order.sort_by(|&a, &b| score(b).total_cmp(&score(a)).then(a.cmp(&b)));
        let positives = ((SynthConfig::prevalence(j) * config.objects as f64).round() as usize)
            .clamp(1, config.objects - 1);
        for &o in &order[..positives] {
            out[o].labels[j] = true;
        }
    }
    Ok(out)
}

/// Generator bound to one config; trials and views are produced on demand.
pub struct Synth {
    config: SynthConfig,
    world: World,
    latents: Vec<Vec<f64>>,
}

impl Synth {
    pub fn new(config: SynthConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            world: World::new(&config),
            latents: latents(&config),
            config,
        })
    }

    pub fn config(&self) -> &SynthConfig {
        &self.config
    }

    pub fn latent(&self, object: usize) -> &[f64] {
        &self.latents[object]
    }

    fn cue(&self, object: usize, modality: usize) -> Vec<f64> {
        self.latents[object]
            .iter()
            .zip(&self.config.informativeness)
            .map(|(z, w)| z * w[modality])
            .collect()
    }

    fn recording_len(&self, object: usize, ep: Ep) -> usize {
        if ep == Ep::Squeeze && self.config.squeeze_extra > 0 {
            let mut rng = seeded_rng(mix_seed(self.config.seed, &[object as u64, 0x5A]));
            self.config.base_len + rng.random_range(0..=self.config.squeeze_extra)
        } else {
            self.config.base_len
        }
    }

    /// Raw signals for one trial of one object.
    pub fn trial(&self, object: usize, trial: usize) -> HapticTrial {
        let noise = self.config.noise;
        let cue = self.cue(object, 0);
        let mut out = HapticTrial::new(object as u32, trial as u32);
        for finger in 0..FINGERS {
            for ep in Ep::ALL {
                let mut rng = seeded_rng(mix_seed(
                    self.config.seed,
                    &[object as u64, trial as u64, finger as u64, ep.index() as u64],
                ));
                let len = self.recording_len(object, ep);
                let mut map = BTreeMap::new();
                let scalars = &self.world.scalar[ep.index()];
                let channels = [Channel::Pac, Channel::Pdc, Channel::Tac, Channel::Tdc];
                for (tpl, ch) in scalars.iter().zip(channels) {
                    let jitter: f64 = noise * Distribution::<f64>::sample(&StandardNormal, &mut rng);
                    let angle = tpl.angle(&cue, jitter);
                    let series: Vec<f64> = if ch == Channel::Pac {
                        let n = len * PAC_DECIMATION;
                        (0..n)
                            .map(|i| {
                                let u = i as f64 / n as f64;
                                // 300 Hz vibration: three full cycles per decimation window.
                                let vib = 0.3 * (2.0 * PI * 300.0 * i as f64 / 2200.0).sin();
                                let e: f64 = StandardNormal.sample(&mut rng);
                                tpl.offset + tpl.scale * (tpl.shape(u, angle) + vib + noise * e)
                            })
                            .collect()
                    } else {
                        (0..len)
                            .map(|i| {
                                let e: f64 = StandardNormal.sample(&mut rng);
                                tpl.offset + tpl.scale * (tpl.shape(i as f64 / len as f64, angle) + noise * e)
                            })
                            .collect()
                    };
                    map.insert(ch, series);
                }
                let latent_tpl = &self.world.electrode_latent[ep.index()];
                let angles: Vec<f64> = latent_tpl
                    .iter()
                    .map(|t| t.angle(&cue, noise * Distribution::<f64>::sample(&StandardNormal, &mut rng)))
                    .collect();
                let latent: Vec<[f64; PCA_COMPONENTS]> = (0..len)
                    .map(|i| {
                        let u = i as f64 / len as f64;
                        std::array::from_fn(|j| latent_tpl[j].shape(u, angles[j]))
                    })
                    .collect();
                let mixing = &self.world.mixing[ep.index()];
                for e in 0..ELECTRODES {
                    let series = latent
                        .iter()
                        .map(|l| {
                            let v: f64 = mixing[e].iter().zip(l).map(|(m, x)| m * x).sum();
                            let n: f64 = StandardNormal.sample(&mut rng);
                            self.world.electrode_offset[e] + 40.0 * (v + 0.1 * noise * n)
                        })
                        .collect();
                    map.insert(Channel::Electrode(e as u8 + 1), series);
                }
                out.recordings.insert((finger, ep), map);
            }
        }
        out
    }

    /// Feature map of one view of one object.
    pub fn view(&self, object: usize, view: usize) -> VisualFeatureMap {
        let [h, w, c] = self.config.feature_map;
        let cue = self.cue(object, 1);
        let mut rng = seeded_rng(mix_seed(self.config.seed, &[object as u64, 0xF00D, view as u64]));
        let noise = self.config.noise;
        // Viewpoint and lighting shift the whole map; pooling cannot remove
        // it, but averaging over views can.
        let shift: Vec<f64> = (0..c)
            .map(|_| (1.5 + 20.0 * noise) * Distribution::<f64>::sample(&StandardNormal, &mut rng))
            .collect();
        let mut data = vec![0.0; h * w * c];
        for p in 0..h * w {
            for ch in 0..c {
                let mut v = self.world.visual_base[ch] + shift[ch];
                for (f, a) in cue.iter().enumerate() {
                    v += VISUAL_GAIN * a * self.world.visual_dirs[f][ch] * self.world.visual_spatial[f][p];
                }
                let e: f64 = StandardNormal.sample(&mut rng);
                data[p * c + ch] = (v + 0.2 * e).max(0.0);
            }
        }
        VisualFeatureMap {
            object_id: object as u32,
            view_index: view as u8,
            map: Tensor::new(vec![h, w, c], data).expect("consistent dims"),
        }
    }

    pub fn views(&self, object: usize) -> Vec<VisualFeatureMap> {
        (0..VIEWS).map(|v| self.view(object, v)).collect()
    }

    pub fn labels(&self) -> Result<Vec<AdjectiveLabelSet>> {
        synth_labels(&self.config)
    }
}

/// `n` electrode vectors generated from a 4-dim latent through a fixed
/// 19 x 4 mixing, plus isotropic noise of relative size `noise`.
pub fn latent_electrodes(n: usize, noise: f64, seed: u64) -> Tensor {
    let mut rng = seeded_rng(seed);
    let mixing: Vec<[f64; PCA_COMPONENTS]> = (0..ELECTRODES)
        .map(|_| std::array::from_fn(|_| StandardNormal.sample(&mut rng)))
        .collect();
    let mut data = Vec::with_capacity(n * ELECTRODES);
    for _ in 0..n {
        let l: [f64; PCA_COMPONENTS] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
        for row in &mixing {
            let v: f64 = row.iter().zip(&l).map(|(m, x)| m * x).sum();
            let e: f64 = StandardNormal.sample(&mut rng);
            data.push(1000.0 + v + noise * e);
        }
    }
    Tensor::new(vec![n, ELECTRODES], data).expect("consistent dims")
}

/// Labeled 32 x 150 instances: four channels carry a sustained level shift
/// of `+0.5` (positives) or `-0.5` (negatives) on top of random sinusoidal
/// backgrounds and white noise.
pub fn separable_instances(n: usize, seed: u64) -> (Vec<Tensor>, Vec<f64>) {
    let mut rng = seeded_rng(seed);
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    let marked = [1usize, 9, 17, 26];
    for i in 0..n {
        let y = if i % 2 == 0 { 1.0 } else { -1.0 };
        let mut data = vec![0.0; INSTANCE_CHANNELS * INSTANCE_LEN];
        for c in 0..INSTANCE_CHANNELS {
            let freq = rng.random_range(1.0..4.0);
            let phase = rng.random_range(0.0..2.0 * PI);
            for t in 0..INSTANCE_LEN {
                let u = t as f64 / INSTANCE_LEN as f64;
                let e: f64 = StandardNormal.sample(&mut rng);
                let mut v = (2.0 * PI * freq * u + phase).sin() + 0.3 * e;
                if marked.contains(&c) {
                    v += 0.5 * y;
                }
                data[c * INSTANCE_LEN + t] = v;
            }
        }
        xs.push(Tensor::new(vec![INSTANCE_CHANNELS, INSTANCE_LEN], data).expect("consistent dims"));
        ys.push(y);
    }
    (xs, ys)
}

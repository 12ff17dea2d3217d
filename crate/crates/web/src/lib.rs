//! WebAssembly bindings for the static demo page in `static/`.
//!
//! Each operation is a plain Rust function with a thin `wasm_bindgen`
//! wrapper, so the logic is tested natively.

use haptic_core::eval::{roc_auc, roc_curve};
use haptic_core::model::{build_haptic_cnn, Network};
use haptic_core::nn::{seeded_rng, Tensor};
use haptic_core::visual::{crop_rect, PlateGeometry};
use rand::Rng;
use wasm_bindgen::prelude::*;

/// Channels and length of the network input.
const IN_CHANNELS: usize = 32;
const IN_LEN: usize = 150;

/// Rows and columns of the conv3 output.
pub const CONV3_SHAPE: [usize; 2] = [64, 19];

/// Which conv3 outputs react when input channel `channel` is bumped.
///
/// Returns `|Δ|` of conv3's pre-activation output, row-major 64 x 19, for
/// a randomly initialized CNN. Grouping keeps the response inside rows
/// `2 * channel` and `2 * channel + 1`.
pub fn group_response(channel: usize, seed: u64) -> Result<Vec<f64>, String> {
    if channel >= IN_CHANNELS {
        return Err(format!("channel {channel} out of range 0..{IN_CHANNELS}"));
    }
    let graph = build_haptic_cnn();
    let net = Network::init(&graph, seed).map_err(|e| e.to_string())?;
    let at = graph.layer_index("conv3").ok_or("network has no conv3")? + 1;
    let mut rng = seeded_rng(seed ^ 0xD3);
    let base: Vec<f64> = (0..IN_CHANNELS * IN_LEN)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    let mut bumped = base.clone();
    for t in 0..IN_LEN {
        bumped[channel * IN_LEN + t] += 1.0;
    }
    let conv3 = |data: Vec<f64>| -> Result<Tensor, String> {
        let x = Tensor::new(vec![IN_CHANNELS, IN_LEN], data).map_err(|e| e.to_string())?;
        let trace = net.forward_trace(&x).map_err(|e| e.to_string())?;
        Ok(trace.activations[at].clone())
    };
    let (a, b) = (conv3(base)?, conv3(bumped)?);
    Ok(a.data().iter().zip(b.data()).map(|(x, y)| (x - y).abs()).collect())
}

/// Parses `score,label` lines; blank lines and `#` comments are skipped.
pub fn parse_scored(text: &str) -> Result<(Vec<f64>, Vec<bool>), String> {
    let (mut scores, mut labels) = (Vec::new(), Vec::new());
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (s, l) = line
            .split_once([',', ' ', '\t'])
            .ok_or_else(|| format!("line {}: expected `score,label`", i + 1))?;
        let score: f64 = s.trim().parse().map_err(|_| format!("line {}: bad score `{s}`", i + 1))?;
        let label = match l.trim() {
            "1" | "true" | "+1" => true,
            "0" | "false" | "-1" => false,
            other => return Err(format!("line {}: bad label `{other}`", i + 1)),
        };
        scores.push(score);
        labels.push(label);
    }
    Ok((scores, labels))
}

/// AUC followed by the ROC points as `fpr, tpr` pairs.
pub fn roc_summary(text: &str) -> Result<Vec<f64>, String> {
    let (scores, labels) = parse_scored(text)?;
    let auc = roc_auc(&scores, &labels).map_err(|e| e.to_string())?;
    let curve = roc_curve(&scores, &labels).map_err(|e| e.to_string())?;
    let mut out = vec![auc];
    out.extend(curve.into_iter().flat_map(|(f, t)| [f, t]));
    Ok(out)
}

/// `[x0, y0, x1, y1, clamped]` of the crop above a plate.
pub fn crop_for(cx: f64, cy: f64, radius: f64, width: u32, height: u32) -> Result<Vec<f64>, String> {
    if !(radius > 0.0) || !cx.is_finite() || !cy.is_finite() {
        return Err("plate needs a finite center and a positive radius".into());
    }
    let c = crop_rect(&PlateGeometry { cx, cy, radius }, width, height);
    Ok(vec![c.x0, c.y0, c.x1, c.y1, if c.clamped { 1.0 } else { 0.0 }])
}

#[wasm_bindgen(js_name = groupResponse)]
pub fn group_response_js(channel: usize, seed: u32) -> Result<Vec<f64>, JsError> {
    group_response(channel, u64::from(seed)).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = rocSummary)]
pub fn roc_summary_js(text: &str) -> Result<Vec<f64>, JsError> {
    roc_summary(text).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen(js_name = cropFor)]
pub fn crop_for_js(cx: f64, cy: f64, radius: f64, width: u32, height: u32) -> Result<Vec<f64>, JsError> {
    crop_for(cx, cy, radius, width, height).map_err(|e| JsError::new(&e))
}

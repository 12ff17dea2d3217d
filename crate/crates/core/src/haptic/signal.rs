use super::PAC_DECIMATION;
use crate::error::{Error, Result};

/// Output of [`zscore_normalize`]; a constant series maps to zeros with
/// `constant` set.
#[derive(Clone, Debug, PartialEq)]
pub struct ZScored {
    pub values: Vec<f64>,
    pub constant: bool,
}

/// `(s - mean) / sigma` with the population standard deviation.
pub fn zscore_normalize(series: &[f64]) -> Result<ZScored> {
    if series.is_empty() {
        return Err(Error::InvalidInput("cannot normalize an empty series".into()));
    }
    let n = series.len() as f64;
    let mean = series.iter().sum::<f64>() / n;
    let var = series.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sigma = var.sqrt();
    // Rounding leaves a tiny spread on series that are constant in exact
    // arithmetic; treat anything at that level as constant.
    let scale = mean.abs().max(1.0);
    if !(sigma > 1e-12 * scale) {
        return Ok(ZScored {
            values: vec![0.0; series.len()],
            constant: true,
        });
    }
    Ok(ZScored {
        values: series.iter().map(|v| (v - mean) / sigma).collect(),
        constant: false,
    })
}

/// 2200 Hz to 100 Hz by non-overlapping 22-sample window means; a trailing
/// partial window is dropped.
pub fn decimate_pac(series: &[f64]) -> Result<Vec<f64>> {
    if series.len() < PAC_DECIMATION {
        return Err(Error::InvalidInput(format!(
            "P_AC series of {} samples is shorter than one {PAC_DECIMATION}-sample window",
            series.len()
        )));
    }
    Ok(series
        .chunks_exact(PAC_DECIMATION)
        .map(|w| w.iter().sum::<f64>() / PAC_DECIMATION as f64)
        .collect())
}

/// Indices picked by [`resample_fixed`]:
/// `offset + round(j * (len - 1 - offset) / (target - 1))`.
pub fn resample_indices(len: usize, target: usize, offset: usize) -> Result<Vec<usize>> {
    if target < 2 {
        return Err(Error::InvalidInput(format!("resample target {target} must be >= 2")));
    }
    if len < target + offset {
        return Err(Error::InvalidInput(format!(
            "series of length {len} too short for {target} samples at offset {offset}"
        )));
    }
    let span = len - 1 - offset;
    let denom = target - 1;
    // Integer round-half-up of j * span / denom.
    Ok((0..target)
        .map(|j| offset + (2 * j * span + denom) / (2 * denom))
        .collect())
}

/// Uniform index subsampling to `target` samples starting at `offset`.
pub fn resample_fixed(series: &[f64], target: usize, offset: usize) -> Result<Vec<f64>> {
    Ok(resample_indices(series.len(), target, offset)?
        .into_iter()
        .map(|i| series[i])
        .collect())
}

//! Principal component analysis by cyclic Jacobi eigendecomposition of the
//! sample covariance.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Tensor;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    /// Per-dimension means of the fitting data.
    pub mean: Vec<f64>,
    /// `k` orthonormal components of length `dim`, eigenvalue-descending.
    pub components: Vec<Vec<f64>>,
    /// Variance share of each retained component.
    pub explained_ratio: Vec<f64>,
}

impl PcaModel {
    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    pub fn total_explained(&self) -> f64 {
        self.explained_ratio.iter().sum()
    }
}

/// Fits the top-`k` components of an `N x D` sample matrix. Each component's
/// sign is fixed so that its largest-magnitude entry is positive.
pub fn pca_fit(samples: &Tensor, k: usize) -> Result<PcaModel> {
    if samples.shape().len() != 2 {
        return Err(Error::InvalidInput(format!(
            "pca expects an N x D matrix, got {:?}",
            samples.shape()
        )));
    }
    let (n, d) = (samples.shape()[0], samples.shape()[1]);
    if k == 0 || k > d {
        return Err(Error::InvalidInput(format!("cannot keep {k} of {d} components")));
    }
    if n < k {
        return Err(Error::InvalidInput(format!(
            "pca needs at least {k} samples, got {n}"
        )));
    }
    let x = samples.data();
    let mut mean = vec![0.0; d];
    for row in x.chunks_exact(d) {
        for (m, v) in mean.iter_mut().zip(row) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);

    let mut cov = vec![0.0; d * d];
    let mut centered = vec![0.0; d];
    for row in x.chunks_exact(d) {
        for j in 0..d {
            centered[j] = row[j] - mean[j];
        }
        for a in 0..d {
            let ca = centered[a];
            for b in a..d {
                cov[a * d + b] += ca * centered[b];
            }
        }
    }
    let denom = (n.max(2) - 1) as f64;
    for a in 0..d {
        for b in a..d {
            let v = cov[a * d + b] / denom;
            cov[a * d + b] = v;
            cov[b * d + a] = v;
        }
    }

    let (values, vectors) = jacobi_eigen(cov, d);
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| values[b].total_cmp(&values[a]).then(a.cmp(&b)));
    let total: f64 = values.iter().map(|v| v.max(0.0)).sum();

    let mut components = Vec::with_capacity(k);
    let mut explained_ratio = Vec::with_capacity(k);
    for &idx in order.iter().take(k) {
        let mut v: Vec<f64> = (0..d).map(|r| vectors[r * d + idx]).collect();
        let pivot = v
            .iter()
            .copied()
            .fold(0.0f64, |best, x| if x.abs() > best.abs() { x } else { best });
        if pivot < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
        components.push(v);
        explained_ratio.push(if total > 0.0 {
            values[idx].max(0.0) / total
        } else {
            0.0
        });
    }
    Ok(PcaModel {
        mean,
        components,
        explained_ratio,
    })
}

/// Coordinates of `x - mean` along each retained component.
pub fn pca_project(model: &PcaModel, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != model.dim() {
        return Err(Error::InvalidInput(format!(
            "pca projection of a {}-vector with a {}-dim model",
            x.len(),
            model.dim()
        )));
    }
    Ok(model
        .components
        .iter()
        .map(|c| {
            c.iter()
                .zip(x.iter().zip(&model.mean))
                .map(|(ci, (xi, mi))| ci * (xi - mi))
                .sum()
        })
        .collect())
}

/// Cyclic Jacobi rotations on a symmetric `d x d` matrix (row-major).
/// Returns eigenvalues and the eigenvector matrix with vectors as columns.
fn jacobi_eigen(mut a: Vec<f64>, d: usize) -> (Vec<f64>, Vec<f64>) {
    let mut v = vec![0.0; d * d];
    for i in 0..d {
        v[i * d + i] = 1.0;
    }
    let scale: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    if scale == 0.0 {
        return (vec![0.0; d], v);
    }
    for _sweep in 0..100 {
        let off: f64 = (0..d)
            .flat_map(|p| (0..d).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[p * d + q].powi(2))
            .sum::<f64>()
            .sqrt();
        if off <= 1e-15 * scale {
            break;
        }
        for p in 0..d {
            for q in p + 1..d {
                let apq = a[p * d + q];
                if apq.abs() <= f64::MIN_POSITIVE {
                    continue;
                }
                let theta = (a[q * d + q] - a[p * d + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..d {
                    let akp = a[k * d + p];
                    let akq = a[k * d + q];
                    a[k * d + p] = c * akp - s * akq;
                    a[k * d + q] = s * akp + c * akq;
                }
                for k in 0..d {
                    let apk = a[p * d + k];
                    let aqk = a[q * d + k];
                    a[p * d + k] = c * apk - s * aqk;
                    a[q * d + k] = s * apk + c * aqk;
                }
                for k in 0..d {
                    let vkp = v[k * d + p];
                    let vkq = v[k * d + q];
                    v[k * d + p] = c * vkp - s * vkq;
                    v[k * d + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..d).map(|i| a[i * d + i]).collect(), v)
}

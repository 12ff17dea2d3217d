//! Visual feature-map files and stored feature sets.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::archive::TensorArchive;
use crate::error::{Error, Result};
use crate::model::FeatureVector;
use crate::nn::Tensor;
use crate::visual::VisualFeatureMap;

pub const FEATURE_MAP_MAGIC: &[u8; 4] = b"HVFM";
pub const FEATURE_MAP_VERSION: u32 = 1;

/// Encodes all views of one object: magic, `u32` version, `u32` dims
/// (views, H, W, C), then `f32` little-endian values.
pub fn encode_feature_maps(maps: &[VisualFeatureMap]) -> Result<Vec<u8>> {
    let first = maps
        .first()
        .ok_or_else(|| Error::InvalidInput("no feature maps to write".into()))?;
    let dims = first.map.shape().to_vec();
    if dims.len() != 3 {
        return Err(Error::InvalidInput(format!("feature map must be H x W x C, got {dims:?}")));
    }
    let mut out = Vec::with_capacity(24 + maps.len() * first.map.len() * 4);
    out.extend_from_slice(FEATURE_MAP_MAGIC);
    out.extend_from_slice(&FEATURE_MAP_VERSION.to_le_bytes());
    for d in std::iter::once(maps.len()).chain(dims.iter().copied()) {
        let d = u32::try_from(d).map_err(|_| Error::InvalidInput(format!("dimension {d} too large")))?;
        out.extend_from_slice(&d.to_le_bytes());
    }
    for (v, m) in maps.iter().enumerate() {
        if m.map.shape() != dims.as_slice() || m.object_id != first.object_id || m.view_index as usize != v {
            return Err(Error::InvalidInput(format!(
                "view {v} of object {} does not match the first view",
                first.object_id
            )));
        }
        for x in m.map.data() {
            let f = *x as f32;
            if !f.is_finite() {
                return Err(Error::NonFinite(format!("feature map value {x}")));
            }
            out.extend_from_slice(&f.to_le_bytes());
        }
    }
    Ok(out)
}

pub fn decode_feature_maps(bytes: &[u8], object_id: u32, origin: &Path) -> Result<Vec<VisualFeatureMap>> {
    let unsupported = |reason: String| Error::UnsupportedFormat {
        path: origin.display().to_string(),
        reason,
    };
    if bytes.len() < 24 || &bytes[..4] != FEATURE_MAP_MAGIC {
        return Err(unsupported("missing feature-map header".into()));
    }
    let word = |i: usize| u32::from_le_bytes([bytes[i], bytes[i + 1], bytes[i + 2], bytes[i + 3]]) as usize;
    let version = word(4) as u32;
    if version != FEATURE_MAP_VERSION {
        return Err(unsupported(format!("unsupported feature-map version {version}")));
    }
    let (views, h, w, c) = (word(8), word(12), word(16), word(20));
    let per_view = h.checked_mul(w).and_then(|x| x.checked_mul(c));
    let expected = per_view.and_then(|p| p.checked_mul(views)).and_then(|n| n.checked_mul(4));
    if expected != Some(bytes.len() - 24) {
        return Err(unsupported(format!(
            "dims {views}x{h}x{w}x{c} do not match {} data bytes",
            bytes.len() - 24
        )));
    }
    let per_view = per_view.unwrap_or(0);
    let values: Vec<f64> = bytes[24..]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
        .collect();
    values
        .chunks(per_view.max(1))
        .take(views)
        .enumerate()
        .map(|(v, chunk)| {
            Ok(VisualFeatureMap {
                object_id,
                view_index: u8::try_from(v).map_err(|_| unsupported(format!("{views} views")))?,
                map: Tensor::new(vec![h, w, c], chunk.to_vec())?,
            })
        })
        .collect()
}

pub fn write_feature_maps(path: &Path, maps: &[VisualFeatureMap]) -> Result<()> {
    super::write_file(path, &encode_feature_maps(maps)?)
}

pub fn read_feature_maps(path: &Path, object_id: u32) -> Result<Vec<VisualFeatureMap>> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_feature_maps(&bytes, object_id, path)
}

/// Feature vectors with provenance, as written by `extract` and `fuse`.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureSet {
    pub description: String,
    pub items: Vec<FeatureVector>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FeatureHeader {
    kind: String,
    description: String,
    items: Vec<(u32, Option<u32>)>,
}

impl FeatureSet {
    pub fn to_archive(&self) -> Result<TensorArchive> {
        let dim = self.items.first().map_or(0, |f| f.values.len());
        let mut data = Vec::with_capacity(self.items.len() * dim);
        for f in &self.items {
            if f.values.len() != dim {
                return Err(Error::InvalidInput("feature vectors differ in length".into()));
            }
            data.extend_from_slice(f.values.data());
        }
        let header = FeatureHeader {
            kind: "features".into(),
            description: self.description.clone(),
            items: self.items.iter().map(|f| (f.object_id, f.index)).collect(),
        };
        let mut a = TensorArchive::new(
            serde_json::to_value(header).map_err(|e| Error::InvalidInput(format!("feature header: {e}")))?,
        );
        a.insert("features", Tensor::new(vec![self.items.len(), dim], data)?);
        Ok(a)
    }

    pub fn from_archive(mut a: TensorArchive, origin: &Path) -> Result<Self> {
        let unsupported = |reason: String| Error::UnsupportedFormat {
            path: origin.display().to_string(),
            reason,
        };
        let header: FeatureHeader =
            serde_json::from_value(a.header.clone()).map_err(|e| unsupported(format!("feature header: {e}")))?;
        if header.kind != "features" {
            return Err(unsupported(format!("archive holds `{}`, not features", header.kind)));
        }
        let t = a.take("features")?;
        if t.shape().len() != 2 || t.shape()[0] != header.items.len() {
            return Err(unsupported(format!("feature tensor {:?} vs {} items", t.shape(), header.items.len())));
        }
        let dim = t.shape()[1];
        let items = header
            .items
            .iter()
            .enumerate()
            .map(|(i, (object_id, index))| FeatureVector {
                object_id: *object_id,
                index: *index,
                values: Tensor::from_vec(t.data()[i * dim..(i + 1) * dim].to_vec()),
            })
            .collect();
        Ok(Self {
            description: header.description,
            items,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        self.to_archive()?.save(path)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_archive(TensorArchive::load(path)?, path)
    }
}

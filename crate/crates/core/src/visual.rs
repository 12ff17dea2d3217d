//! Visual branch around ingested feature maps: plate crop geometry, image
//! normalization parameters, the average-pool + L2 head and multi-view
//! concatenation. The pretrained image trunk itself is external.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{avg_pool, l2_normalize, Tensor};

pub const VIEWS: usize = 8;
/// Input resolution of the external image network.
pub const TARGET_SIZE: (u32, u32) = (224, 224);
/// Minimum share of pixels the plate mask must cover.
pub const MIN_PLATE_COVERAGE: f64 = 0.005;

#[derive(Clone, Debug, PartialEq)]
pub struct RgbImage {
    pub width: u32,
    pub height: u32,
    /// Row-major pixels.
    pub pixels: Vec<[u8; 3]>,
}

impl RgbImage {
    pub fn filled(width: u32, height: u32, color: [u8; 3]) -> Self {
        Self {
            width,
            height,
            pixels: vec![color; (width * height) as usize],
        }
    }

    pub fn put(&mut self, x: u32, y: u32, color: [u8; 3]) {
        self.pixels[(y * self.width + x) as usize] = color;
    }

    /// Paints a filled disk.
    pub fn fill_disk(&mut self, cx: f64, cy: f64, r: f64, color: [u8; 3]) {
        for y in 0..self.height {
            for x in 0..self.width {
                let (dx, dy) = (x as f64 + 0.5 - cx, y as f64 + 0.5 - cy);
                if dx * dx + dy * dy <= r * r {
                    self.put(x, y, color);
                }
            }
        }
    }
}

/// Inclusive per-channel RGB range identifying plate pixels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColorBand {
    pub min: [u8; 3],
    pub max: [u8; 3],
}

impl ColorBand {
    pub fn contains(&self, p: [u8; 3]) -> bool {
        (0..3).all(|i| self.min[i] <= p[i] && p[i] <= self.max[i])
    }
}

impl Default for ColorBand {
    /// Brushed-aluminum grey.
    fn default() -> Self {
        Self {
            min: [170, 170, 170],
            max: [215, 215, 225],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlateGeometry {
    pub cx: f64,
    pub cy: f64,
    pub radius: f64,
}

/// Centroid of the plate-colored mask and the radius of a disk with the
/// mask's area. Occlusion shrinks the mask, so `radius` underestimates the
/// true radius of a partly covered plate.
pub fn detect_plate(image: &RgbImage, band: &ColorBand) -> Result<PlateGeometry> {
    let (mut n, mut sx, mut sy) = (0u64, 0.0f64, 0.0f64);
    for y in 0..image.height {
        for x in 0..image.width {
            if band.contains(image.pixels[(y * image.width + x) as usize]) {
                n += 1;
                sx += x as f64 + 0.5;
                sy += y as f64 + 0.5;
            }
        }
    }
    let coverage = n as f64 / (image.width as f64 * image.height as f64).max(1.0);
    if n == 0 || coverage < MIN_PLATE_COVERAGE {
        return Err(Error::PlateNotFound { coverage });
    }
    Ok(PlateGeometry {
        cx: sx / n as f64,
        cy: sy / n as f64,
        radius: (n as f64 / std::f64::consts::PI).sqrt(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CropRect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
    /// Set when any edge was moved to stay inside the image.
    pub clamped: bool,
}

impl CropRect {
    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }
}

/// The `2R x R` rectangle centered `R` above the plate center, clamped to
/// the image.
pub fn crop_rect(geometry: &PlateGeometry, width: u32, height: u32) -> CropRect {
    let r = geometry.radius;
    let (cx, cy) = (geometry.cx, geometry.cy - r);
    let raw = [cx - r, cy - r / 2.0, cx + r, cy + r / 2.0];
    let (w, h) = (width as f64, height as f64);
    let x0 = raw[0].clamp(0.0, w);
    let y0 = raw[1].clamp(0.0, h);
    let x1 = raw[2].clamp(0.0, w);
    let y1 = raw[3].clamp(0.0, h);
    CropRect {
        x0,
        y0,
        x1,
        y1,
        clamped: [x0, y0, x1, y1] != raw,
    }
}

/// Preprocessing handed to the external feature extractor.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ImageNormParams {
    /// Per-channel RGB means subtracted before resizing.
    pub mean_rgb: [f64; 3],
    pub target_size: (u32, u32),
}

impl Default for ImageNormParams {
    fn default() -> Self {
        image_norm_params([123.68, 116.779, 103.939])
    }
}

pub fn image_norm_params(mean_rgb: [f64; 3]) -> ImageNormParams {
    ImageNormParams {
        mean_rgb,
        target_size: TARGET_SIZE,
    }
}

/// Activations of the frozen image trunk for one view, `[H, W, C]`.
#[derive(Clone, Debug, PartialEq)]
pub struct VisualFeatureMap {
    pub object_id: u32,
    pub view_index: u8,
    pub map: Tensor,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VisualFeature {
    pub object_id: u32,
    /// `Some` for a single view, `None` once views are combined.
    pub view_index: Option<u8>,
    pub vector: Tensor,
    pub degenerate: bool,
}

/// Spatial average pooling followed by L2 normalization.
pub fn pool_normalize(featmap: &VisualFeatureMap) -> Result<VisualFeature> {
    if featmap.map.shape().len() != 3 {
        return Err(Error::InvalidInput(format!(
            "feature map must be [H, W, C], got {:?}",
            featmap.map.shape()
        )));
    }
    let pooled = avg_pool(&featmap.map)?;
    let n = l2_normalize(&pooled);
    Ok(VisualFeature {
        object_id: featmap.object_id,
        view_index: Some(featmap.view_index),
        vector: n.vector,
        degenerate: n.degenerate,
    })
}

/// Concatenates the eight views of one object in view-index order.
pub fn combine_views(features: &[VisualFeature]) -> Result<VisualFeature> {
    let first = features
        .first()
        .ok_or_else(|| Error::InvalidInput("no views to combine".into()))?;
    let mut slots: [Option<&VisualFeature>; VIEWS] = [None; VIEWS];
    for f in features {
        if f.object_id != first.object_id {
            return Err(Error::InvalidInput(format!(
                "views of objects {} and {} mixed",
                first.object_id, f.object_id
            )));
        }
        let v = f
            .view_index
            .ok_or_else(|| Error::InvalidInput("cannot combine an already combined feature".into()))?
            as usize;
        if v >= VIEWS {
            return Err(Error::InvalidInput(format!("view index {v} out of range")));
        }
        if slots[v].replace(f).is_some() {
            return Err(Error::InvalidInput(format!("view {v} given twice")));
        }
        if f.vector.len() != first.vector.len() {
            return Err(Error::InvalidInput("views have different feature lengths".into()));
        }
    }
    let mut data = Vec::with_capacity(VIEWS * first.vector.len());
    let mut degenerate = false;
    for (v, slot) in slots.iter().enumerate() {
        let f = slot.ok_or_else(|| {
            Error::InvalidInput(format!("object {}: view {v} is missing", first.object_id))
        })?;
        data.extend_from_slice(f.vector.data());
        degenerate |= f.degenerate;
    }
    Ok(VisualFeature {
        object_id: first.object_id,
        view_index: None,
        vector: Tensor::from_vec(data),
        degenerate,
    })
}

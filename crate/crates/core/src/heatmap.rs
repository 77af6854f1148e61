//! Gaussian heatmap targets, local-maximum peak reading and the HMAP codec.

use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::image::Point;

pub const HMAP_MAGIC: &[u8; 4] = b"HMAP";
pub const HMAP_VERSION: u32 = 1;
const HEADER_LEN: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    width: usize,
    height: usize,
    values: Vec<f64>,
    /// Kernel width when the map was rendered from points.
    sigma: Option<f64>,
}

impl Heatmap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != width * height {
            return Err(Error::BufferSize {
                expected: width * height,
                actual: values.len(),
            });
        }
        if let Some((index, &value)) = values.iter().enumerate().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(Error::IntensityOutOfRange { index, value });
        }
        Ok(Self {
            width,
            height,
            values,
            sigma: None,
        })
    }

    pub fn zeros(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            values: alloc::vec![0.0; width * height],
            sigma: None,
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sigma(&self) -> Option<f64> {
        self.sigma
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }
}

/// Peak value of one event's kernel at pixel `(px, py)`:
/// `exp(-((lx - px)^2 + (ly - py)^2) / sigma^2)`.
///
/// The denominator is `sigma^2`, not `2 sigma^2`.
pub fn kernel(event: Point, px: f64, py: f64, sigma: f64) -> f64 {
    let (dx, dy) = (event.x - px, event.y - py);
    libm::exp(-(dx * dx + dy * dy) / (sigma * sigma))
}

/// Max-fused Gaussian targets for `events` on a `width`x`height` grid.
pub fn render_targets(events: &[Point], width: usize, height: usize, sigma: f64) -> Result<Heatmap> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::InvalidConfig("heatmap sigma must be positive"));
    }
    let mut values = alloc::vec![0.0f64; width * height];
    for (i, v) in values.iter_mut().enumerate() {
        let (px, py) = ((i % width) as f64, (i / width) as f64);
        for e in events {
            let k = kernel(*e, px, py, sigma);
            if k > *v {
                *v = k;
            }
        }
    }
    Ok(Heatmap {
        width,
        height,
        values,
        sigma: Some(sigma),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct PeakParams {
    pub threshold: f64,
    pub nms_radius: f64,
}

impl Default for PeakParams {
    fn default() -> Self {
        Self {
            threshold: 0.3,
            nms_radius: 4.0,
        }
    }
}

impl PeakParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::InvalidConfig("peak threshold must lie in (0, 1)"));
        }
        if !(self.nms_radius >= 1.0 && self.nms_radius.is_finite()) {
            return Err(Error::InvalidConfig("nms radius must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Detection {
    pub t: usize,
    pub x: f64,
    pub y: f64,
    pub score: f64,
}

/// Pixels that are `>=` all of their in-bounds 8-neighbours and `>= threshold`.
fn local_maxima(h: &Heatmap, threshold: f64) -> Vec<(usize, usize, f64)> {
    let (w, ht) = (h.width, h.height);
    let mut out = Vec::new();
    for y in 0..ht {
        for x in 0..w {
            let v = h.get(x, y);
            if v < threshold {
                continue;
            }
            let mut is_max = true;
            'nb: for ny in y.saturating_sub(1)..=(y + 1).min(ht - 1) {
                for nx in x.saturating_sub(1)..=(x + 1).min(w - 1) {
                    if (nx, ny) != (x, y) && h.get(nx, ny) > v {
                        is_max = false;
                        break 'nb;
                    }
                }
            }
            if is_max {
                out.push((x, y, v));
            }
        }
    }
    out
}

/// Read point detections off `h` for frame `t`.
///
/// Candidates are sorted by value (descending, ties by row then column) and
/// kept greedily when at least `nms_radius` away from every kept peak.
pub fn extract_peaks(h: &Heatmap, t: usize, params: &PeakParams) -> Vec<Detection> {
    if h.width == 0 || h.height == 0 {
        return Vec::new();
    }
    let mut candidates = local_maxima(h, params.threshold);
    candidates.sort_by(|a, b| {
        b.2.partial_cmp(&a.2)
            .unwrap_or(Ordering::Equal)
            .then(a.1.cmp(&b.1))
            .then(a.0.cmp(&b.0))
    });
    let r2 = params.nms_radius * params.nms_radius;
    let mut kept: Vec<Detection> = Vec::new();
    for (x, y, v) in candidates {
        let (fx, fy) = (x as f64, y as f64);
        if kept.iter().all(|d| {
            let (dx, dy) = (d.x - fx, d.y - fy);
            dx * dx + dy * dy >= r2
        }) {
            kept.push(Detection {
                t,
                x: fx,
                y: fy,
                score: v,
            });
        }
    }
    kept
}

/// Serialise to the little-endian HMAP layout: `"HMAP"`, u32 width, u32
/// height, u32 version, then `width * height` f32 values row-major.
pub fn encode_hmap(h: &Heatmap) -> Vec<u8> {
    let mut out = Vec::with_capacity(HEADER_LEN + 4 * h.values.len());
    out.extend_from_slice(HMAP_MAGIC);
    out.extend_from_slice(&(h.width as u32).to_le_bytes());
    out.extend_from_slice(&(h.height as u32).to_le_bytes());
    out.extend_from_slice(&HMAP_VERSION.to_le_bytes());
    for v in &h.values {
        out.extend_from_slice(&(*v as f32).to_le_bytes());
    }
    out
}

pub fn decode_hmap(bytes: &[u8]) -> Result<Heatmap> {
    if bytes.len() < HEADER_LEN || &bytes[..4] != HMAP_MAGIC {
        return Err(Error::BadMagic);
    }
    let word = |i: usize| u32::from_le_bytes([bytes[i], bytes[i + 1], bytes[i + 2], bytes[i + 3]]);
    let (width, height, version) = (word(4) as usize, word(8) as usize, word(12));
    if version != HMAP_VERSION {
        return Err(Error::UnsupportedVersion(version));
    }
    let payload = &bytes[HEADER_LEN..];
    let expected = width
        .checked_mul(height)
        .and_then(|n| n.checked_mul(4))
        .ok_or(Error::PayloadSize {
            expected: usize::MAX,
            actual: payload.len(),
        })?;
    if payload.len() != expected {
        return Err(Error::PayloadSize {
            expected,
            actual: payload.len(),
        });
    }
    let values = payload
        .chunks_exact(4)
        .map(|c| f64::from(f32::from_le_bytes([c[0], c[1], c[2], c[3]])))
        .collect();
    Heatmap::new(width, height, values)
}

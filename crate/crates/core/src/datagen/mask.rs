//! Gaussian-feathered disk masks for alpha-blended pasting.

use alloc::vec::Vec;

/// Per-pixel blend weights for an `size`x`size` patch, peak 1 at the centre.
#[derive(Debug, Clone, PartialEq)]
pub struct BlendMask {
    size: usize,
    sigma: f64,
    alpha: Vec<f64>,
}

impl BlendMask {
    /// Constant mask, mostly useful for tests and for direct pasting.
    pub fn uniform(size: usize, value: f64) -> Self {
        Self {
            size,
            sigma: 0.0,
            alpha: alloc::vec![value.clamp(0.0, 1.0); size * size],
        }
    }

    pub fn from_values(size: usize, alpha: Vec<f64>) -> Option<Self> {
        (alpha.len() == size * size && alpha.iter().all(|a| (0.0..=1.0).contains(a))).then_some(Self {
            size,
            sigma: 0.0,
            alpha,
        })
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.alpha[y * self.size + x]
    }
}

/// Normalised 1-D Gaussian taps truncated at `4 sigma`.
pub fn gaussian_kernel(sigma: f64) -> Vec<f64> {
    let radius = libm::ceil(4.0 * sigma) as isize;
    let inv = 1.0 / (2.0 * sigma * sigma);
    let mut taps: Vec<f64> = (-radius..=radius).map(|i| libm::exp(-((i * i) as f64) * inv)).collect();
    let sum: f64 = taps.iter().sum();
    for v in &mut taps {
        *v /= sum;
    }
    taps
}

/// Separable Gaussian blur with zero padding outside the grid.
pub fn blur_zero_padded(data: &[f64], width: usize, height: usize, sigma: f64) -> Vec<f64> {
    let taps = gaussian_kernel(sigma);
    let r = (taps.len() / 2) as isize;
    let mut tmp = alloc::vec![0.0; data.len()];
    for y in 0..height {
        let row = &data[y * width..(y + 1) * width];
        for x in 0..width {
            let mut acc = 0.0;
            for (k, w) in taps.iter().enumerate() {
                let sx = x as isize + k as isize - r;
                if sx >= 0 && (sx as usize) < width {
                    acc += w * row[sx as usize];
                }
            }
            tmp[y * width + x] = acc;
        }
    }
    let mut out = alloc::vec![0.0; data.len()];
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            for (k, w) in taps.iter().enumerate() {
                let sy = y as isize + k as isize - r;
                if sy >= 0 && (sy as usize) < height {
                    acc += w * tmp[sy as usize * width + x];
                }
            }
            out[y * width + x] = acc;
        }
    }
    out
}

/// Binary disk of `radius` around pixel `(size/2, size/2)`.
pub fn disk(size: usize, radius: f64) -> Vec<f64> {
    let c = (size / 2) as f64;
    let mut out = alloc::vec![0.0; size * size];
    for y in 0..size {
        for x in 0..size {
            let (dx, dy) = (x as f64 - c, y as f64 - c);
            if dx * dx + dy * dy <= radius * radius {
                out[y * size + x] = 1.0;
            }
        }
    }
    out
}

/// Blur a centred disk of `disk_radius` with a Gaussian of std `sigma` and
/// rescale so the largest weight is exactly 1.
///
/// The caller guarantees `0 < disk_radius < size / 2` and `sigma > 0`.
pub fn make_blend_mask(size: usize, disk_radius: f64, sigma: f64) -> BlendMask {
    let blurred = blur_zero_padded(&disk(size, disk_radius), size, size, sigma);
    let peak = blurred.iter().copied().fold(0.0, f64::max);
    let alpha = blurred
        .into_iter()
        .map(|v| if peak > 0.0 { (v / peak).clamp(0.0, 1.0) } else { 0.0 })
        .collect();
    BlendMask { size, sigma, alpha }
}

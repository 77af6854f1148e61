//! Seeded fluorescence time-lapse simulator with exact division ground truth.
//!
//! Nuclei are additive isotropic Gaussian blobs that perform independent
//! Gaussian random walks, reflecting off the image border. A dividing cell is
//! drawn 1.25x brighter for one frame; on the next frame it is replaced by two
//! daughters at 0.8x its amplitude, half of `split_distance` apart, and they
//! reach the full separation one frame later. Each division is recorded as a
//! single event at the parent's position on the brightened frame, with the
//! event time set to the frame of the split.
//!
//! Every cell draws from its own stream seeded by `(seed, cell id)`; daughter
//! ids are derived from the parent id, so adding cells never perturbs the
//! trajectories of existing ones. Pixel noise uses one stream per frame.

use alloc::string::String;
use alloc::vec::Vec;
use core::f64::consts::TAU;

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::image::{normalize_u16, quantize_u16, AnnotationSet, Frame, MitosisEvent, Sequence};
use crate::rng::{derive_labeled, derive_seed, stream, StreamRng};

const BRIGHTENING: f64 = 1.25;
const DAUGHTER_AMPLITUDE: f64 = 0.8;
const TRUNCATION: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct SimConfig {
    pub width: usize,
    pub height: usize,
    pub n_frames: usize,
    pub n_cells: usize,
    pub blob_sigma: f64,
    pub drift_sigma: f64,
    /// Probability per cell and frame of entering division.
    pub division_rate: f64,
    pub split_distance: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            width: 128,
            height: 128,
            n_frames: 20,
            n_cells: 12,
            blob_sigma: 3.0,
            drift_sigma: 0.8,
            division_rate: 0.02,
            split_distance: 14.0,
            noise_sigma: 0.02,
            seed: 0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_frames == 0 {
            return Err(Error::InvalidConfig("n_frames must be at least 1"));
        }
        if self.n_cells == 0 {
            return Err(Error::InvalidConfig("n_cells must be at least 1"));
        }
        if self.width < 16 || self.height < 16 {
            return Err(Error::InvalidConfig("width and height must be at least 16"));
        }
        if !(0.0..=1.0).contains(&self.division_rate) {
            return Err(Error::InvalidConfig("division_rate must lie in [0, 1]"));
        }
        if !(self.blob_sigma > 0.0 && self.blob_sigma.is_finite()) {
            return Err(Error::InvalidConfig("blob_sigma must be positive"));
        }
        let non_negative = |v: f64| v >= 0.0 && v.is_finite();
        if !non_negative(self.drift_sigma) || !non_negative(self.noise_sigma) || !non_negative(self.split_distance) {
            return Err(Error::InvalidConfig(
                "drift_sigma, noise_sigma and split_distance must be non-negative",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SimOutput {
    pub sequence: Sequence,
    pub annotations: AnnotationSet,
    /// Live cells on each frame; a dividing parent counts once until it splits.
    pub cell_counts: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Interphase,
    /// Brightened frame; splits on the next step.
    Mitotic,
    /// Daughter still separating from its sibling.
    Separating,
}

#[derive(Debug, Clone)]
struct Cell {
    id: u64,
    x: f64,
    y: f64,
    amplitude: f64,
    phase: Phase,
    push: (f64, f64),
    rng: StreamRng,
}

impl Cell {
    fn founder(index: usize, cfg: &SimConfig) -> Self {
        let id = index as u64;
        let mut rng = stream(derive_seed(cfg.seed, id));
        let x = rng.random_range(0.0..cfg.width as f64 - 1.0);
        let y = rng.random_range(0.0..cfg.height as f64 - 1.0);
        let amplitude = rng.random_range(0.5..=0.9);
        Self {
            id,
            x,
            y,
            amplitude,
            phase: Phase::Interphase,
            push: (0.0, 0.0),
            rng,
        }
    }

    fn daughter(&self, which: u64, sign: f64, dir: (f64, f64), offset: f64, cfg: &SimConfig) -> Self {
        let id = derive_seed(self.id, which);
        Self {
            id,
            x: reflect(self.x + sign * dir.0 * offset, cfg.width),
            y: reflect(self.y + sign * dir.1 * offset, cfg.height),
            amplitude: self.amplitude * DAUGHTER_AMPLITUDE,
            phase: Phase::Separating,
            push: (sign * dir.0 * offset, sign * dir.1 * offset),
            rng: stream(derive_seed(cfg.seed, id)),
        }
    }

    fn rendered_amplitude(&self) -> f64 {
        match self.phase {
            Phase::Mitotic => self.amplitude * BRIGHTENING,
            _ => self.amplitude,
        }
    }
}

/// Fold `v` back into `[0, extent - 1]` by mirror reflection.
fn reflect(v: f64, extent: usize) -> f64 {
    let hi = extent as f64 - 1.0;
    let period = 2.0 * hi;
    let mut m = libm::fmod(v, period);
    if m < 0.0 {
        m += period;
    }
    if m > hi {
        period - m
    } else {
        m
    }
}

fn splat(data: &mut [f64], width: usize, height: usize, cell: &Cell, sigma: f64) {
    let amp = cell.rendered_amplitude();
    let reach = TRUNCATION * sigma;
    let x0 = libm::ceil(cell.x - reach).max(0.0) as usize;
    let x1 = (libm::floor(cell.x + reach) as usize).min(width - 1);
    let y0 = libm::ceil(cell.y - reach).max(0.0) as usize;
    let y1 = (libm::floor(cell.y + reach) as usize).min(height - 1);
    let inv = 1.0 / (2.0 * sigma * sigma);
    for py in y0..=y1 {
        let dy = py as f64 - cell.y;
        for px in x0..=x1 {
            let dx = px as f64 - cell.x;
            let r2 = dx * dx + dy * dy;
            if r2 <= reach * reach {
                data[py * width + px] += amp * libm::exp(-r2 * inv);
            }
        }
    }
}

/// Run the simulator. Deterministic in `cfg`.
pub fn simulate(cfg: &SimConfig) -> Result<SimOutput> {
    cfg.validate()?;
    let (w, h) = (cfg.width, cfg.height);
    let drift =
        Normal::new(0.0, cfg.drift_sigma).map_err(|_| Error::InvalidConfig("drift_sigma must be non-negative"))?;
    let noise =
        Normal::new(0.0, cfg.noise_sigma).map_err(|_| Error::InvalidConfig("noise_sigma must be non-negative"))?;

    let mut cells: Vec<Cell> = (0..cfg.n_cells).map(|i| Cell::founder(i, cfg)).collect();
    let mut frames = Vec::with_capacity(cfg.n_frames);
    let mut events = Vec::new();
    let mut cell_counts = Vec::with_capacity(cfg.n_frames);

    for t in 0..cfg.n_frames {
        let can_split = t + 1 < cfg.n_frames;
        for cell in &mut cells {
            let enters = cell.rng.random_bool(cfg.division_rate);
            if enters && can_split && cell.phase == Phase::Interphase {
                cell.phase = Phase::Mitotic;
            }
        }

        let mut data = alloc::vec![0.0; w * h];
        for cell in &cells {
            splat(&mut data, w, h, cell, cfg.blob_sigma);
        }
        if cfg.noise_sigma > 0.0 {
            let mut rng = stream(derive_labeled(cfg.seed, "noise", t as u64));
            for v in &mut data {
                *v += noise.sample(&mut rng);
            }
        }
        // Frames come out on the 16-bit lattice, as from a camera.
        for v in &mut data {
            *v = normalize_u16(quantize_u16(*v));
        }
        frames.push(Frame::new(w, h, t, data)?);
        cell_counts.push(cells.len());

        let mut next = Vec::with_capacity(cells.len() + 2);
        for mut cell in cells {
            match cell.phase {
                Phase::Mitotic => {
                    events.push(MitosisEvent::new(t + 1, cell.x, cell.y));
                    let angle = cell.rng.random_range(0.0..TAU);
                    let dir = (libm::cos(angle), libm::sin(angle));
                    let offset = cfg.split_distance / 4.0;
                    next.push(cell.daughter(1, 1.0, dir, offset, cfg));
                    next.push(cell.daughter(2, -1.0, dir, offset, cfg));
                }
                Phase::Interphase | Phase::Separating => {
                    let dx = drift.sample(&mut cell.rng) + cell.push.0;
                    let dy = drift.sample(&mut cell.rng) + cell.push.1;
                    cell.x = reflect(cell.x + dx, w);
                    cell.y = reflect(cell.y + dy, h);
                    cell.push = (0.0, 0.0);
                    cell.phase = Phase::Interphase;
                    next.push(cell);
                }
            }
        }
        cells = next;
    }

    Ok(SimOutput {
        sequence: Sequence::new(String::from("simulated"), frames)?,
        annotations: AnnotationSet::from_parts_unchecked(String::from("simulated"), events),
        cell_counts,
    })
}

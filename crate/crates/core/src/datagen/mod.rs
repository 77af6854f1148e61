//! Fully labelled training pairs from partially labelled sequences.
//!
//! Every consecutive pair `(I_{t-1}, I_t)` is first turned into a guaranteed
//! negative by swapping its frames: a division played backwards looks like
//! two cells fusing. Annotated divisions are then cut out into a crop bank
//! and pasted back at random positions with a Gaussian-feathered alpha mask,
//! so the paste positions form a complete label set for the generated pair.

mod crop;
mod mask;
mod paste;
mod sampling;

use alloc::vec::Vec;

use rand::Rng;

pub use crop::{build_crop_bank, window_origin, CropBank, CropPair};
pub use mask::{blur_zero_padded, disk, gaussian_kernel, make_blend_mask, BlendMask};
pub use paste::{blend, paste_event, paste_in_place, PasteMode};
pub use sampling::{sample_partial_labels, LabelSampling};

use crate::error::{Error, Result};
use crate::image::{Frame, Point, Sequence};
use crate::rng::{derive_labeled, stream};

/// Two frames fed to the detector as `(before, after)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FramePair {
    pub before: Frame,
    pub after: Frame,
    /// `t` of the original pair `(I_{t-1}, I_t)`.
    pub source_t: usize,
    pub flipped: bool,
}

impl FramePair {
    /// The pair `(I_{t-1}, I_t)` of `seq` in natural order.
    pub fn from_sequence(seq: &Sequence, t: usize) -> Result<Self> {
        if t == 0 || t >= seq.len() {
            return Err(Error::FrameOutOfRange { t, frames: seq.len() });
        }
        Ok(Self {
            before: seq.frames()[t - 1].clone(),
            after: seq.frames()[t].clone(),
            source_t: t,
            flipped: false,
        })
    }
}

/// Swap the frame order. Pixel data is moved, not touched.
pub fn flip_pair(pair: FramePair) -> FramePair {
    FramePair {
        before: pair.after,
        after: pair.before,
        source_t: pair.source_t,
        flipped: !pair.flipped,
    }
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(deny_unknown_fields, default))]
pub struct GenConfig {
    pub crop_size: usize,
    pub k_min: usize,
    pub k_max: usize,
    pub mask_sigma_min: f64,
    pub mask_sigma_max: f64,
    /// Radius of the binary disk before blurring; `None` means `crop_size / 4`.
    pub mask_disk_radius: Option<f64>,
    pub paste_mode: PasteMode,
    pub max_place_attempts: usize,
    pub seed: u64,
}

impl Default for GenConfig {
    fn default() -> Self {
        Self {
            crop_size: 40,
            k_min: 1,
            k_max: 10,
            mask_sigma_min: 2.0,
            mask_sigma_max: 8.0,
            mask_disk_radius: None,
            paste_mode: PasteMode::Alpha,
            max_place_attempts: 100,
            seed: 0,
        }
    }
}

impl GenConfig {
    pub fn disk_radius(&self) -> f64 {
        self.mask_disk_radius.unwrap_or(self.crop_size as f64 / 4.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.crop_size < 8 || !self.crop_size.is_multiple_of(2) {
            return Err(Error::InvalidConfig("crop_size must be even and at least 8"));
        }
        if self.k_min > self.k_max {
            return Err(Error::InvalidConfig("k_min must not exceed k_max"));
        }
        let (lo, hi) = (self.mask_sigma_min, self.mask_sigma_max);
        if !(lo > 0.0 && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidConfig("mask sigma bounds must be positive and ordered"));
        }
        let r = self.disk_radius();
        if !(r > 0.0 && r < self.crop_size as f64 / 2.0) {
            return Err(Error::InvalidConfig("mask_disk_radius must lie in (0, crop_size / 2)"));
        }
        if self.max_place_attempts == 0 {
            return Err(Error::InvalidConfig("max_place_attempts must be at least 1"));
        }
        Ok(())
    }

    /// Seed for the pair generated from source frame `t`.
    pub fn pair_seed(&self, t: usize) -> u64 {
        derive_labeled(self.seed, "pair", t as u64)
    }
}

/// A generated pair with the complete set of pasted division centres.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledPair {
    pub pair: FramePair,
    pub events: Vec<Point>,
    pub crop_ids: Vec<usize>,
    pub seed: u64,
}

/// Build one training pair from source frame `t`.
///
/// Starts from the flipped pair `(I_t, I_{t-1})`, then draws `k` in
/// `[k_min, k_max]` and performs up to `k` pastes. Each paste picks a crop
/// (with replacement), a mask sigma and an integer centre inside the valid
/// margin; centres closer than `crop_size` to an accepted centre are redrawn,
/// and after `max_place_attempts` failures generation stops early.
pub fn generate_pair(
    seq: &Sequence,
    t: usize,
    bank: &[CropPair],
    cfg: &GenConfig,
    pair_seed: u64,
) -> Result<LabeledPair> {
    cfg.validate()?;
    if bank.is_empty() {
        return Err(Error::EmptyBank);
    }
    if let Some(c) = bank.iter().find(|c| c.size() != cfg.crop_size) {
        return Err(Error::PatchSize {
            expected: cfg.crop_size,
            found: c.size(),
        });
    }
    let mut pair = flip_pair(FramePair::from_sequence(seq, t)?);
    let mut rng = stream(pair_seed);
    let s = cfg.crop_size;
    let half = s / 2;
    let (w, h) = (seq.width(), seq.height());
    let room = w >= s && h >= s;

    let k = rng.random_range(cfg.k_min..=cfg.k_max);
    let mut events: Vec<Point> = Vec::with_capacity(k);
    let mut crop_ids = Vec::with_capacity(k);
    for _ in 0..k {
        let id = rng.random_range(0..bank.len());
        let sigma = rng.random_range(cfg.mask_sigma_min..=cfg.mask_sigma_max);
        if !room {
            break;
        }
        let spot = (0..cfg.max_place_attempts).find_map(|_| {
            let c = Point::new(
                rng.random_range(half..=w - half) as f64,
                rng.random_range(half..=h - half) as f64,
            );
            events.iter().all(|e| e.distance(&c) >= s as f64).then_some(c)
        });
        let Some(center) = spot else { break };
        let mask = match cfg.paste_mode {
            PasteMode::Alpha => make_blend_mask(s, cfg.disk_radius(), sigma),
            PasteMode::Direct => BlendMask::uniform(s, 1.0),
        };
        let used = paste_in_place(&mut pair, &bank[id], &mask, center, cfg.paste_mode)?;
        events.push(used);
        crop_ids.push(id);
    }
    Ok(LabeledPair {
        pair,
        events,
        crop_ids,
        seed: pair_seed,
    })
}

/// All pairs `t = 1..T-1` of `seq`, each with its derived seed.
pub fn generate_pairs(seq: &Sequence, bank: &[CropPair], cfg: &GenConfig) -> Result<Vec<LabeledPair>> {
    (1..seq.len())
        .map(|t| generate_pair(seq, t, bank, cfg, cfg.pair_seed(t)))
        .collect()
}

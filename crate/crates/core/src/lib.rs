//! Allocation-only core of flipforge.
//!
//! Everything here is a pure function of its inputs: the data model for
//! time-lapse frames and point annotations, a seeded fluorescence movie
//! simulator, training-pair synthesis by frame-order flipping and
//! alpha-blended pasting, Gaussian heatmap targets with peak extraction, and
//! spatiotemporal detection scoring. File formats that need a filesystem live
//! in the `flipforge` crate; the in-memory HMAP codec lives here so both sides
//! share one definition.
//!
//! The crate is `no_std` and only needs `alloc`.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod datagen;
pub mod error;
pub mod heatmap;
pub mod image;
pub mod metrics;
pub mod rng;
pub mod simulate;

pub use datagen::{
    build_crop_bank, flip_pair, generate_pair, make_blend_mask, paste_event, sample_partial_labels, BlendMask,
    CropBank, CropPair, FramePair, GenConfig, LabelSampling, LabeledPair, PasteMode,
};
pub use error::{Error, Result};
pub use heatmap::{decode_hmap, encode_hmap, extract_peaks, render_targets, Detection, Heatmap, PeakParams};
pub use image::{AnnotationSet, Frame, MitosisEvent, Point, Sequence};
pub use metrics::{match_detections, score, sweep, MatchConfig, MatchResult, MetricsReport};
pub use simulate::{simulate, SimConfig, SimOutput};

/// Version tag written into every dataset manifest.
pub const DATASET_FORMAT: &str = "flipforge-dataset-v1";

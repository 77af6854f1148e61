//! File formats, dataset writer, pipeline and CLI for flipforge.
//!
//! The numerics live in `flipforge-core`; this crate adds the 16-bit PNG
//! frame directories, JSON annotation and detection files, HMAP heatmap
//! files and the `flipforge` binary.

pub mod annotations;
pub mod cli;
pub mod dataset;
pub mod error;
pub mod frames;
pub mod heatmap_io;
pub mod pipeline;
pub mod stages;

pub use dataset::{generate_dataset, Dataset, Manifest};
pub use error::{Error, Result};
pub use frames::{load_sequence, save_sequence};
pub use pipeline::{load_config, run_pipeline, PipelineConfig, Summary};

pub use flipforge_core as core;

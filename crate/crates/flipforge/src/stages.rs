//! One function per CLI subcommand. The pipeline calls exactly these, so a
//! stage run by hand with the same seed writes the same files.

use std::fs;
use std::path::Path;

use flipforge_core::datagen::{sample_partial_labels, LabelSampling};
use flipforge_core::heatmap::{extract_peaks, render_targets, Detection, PeakParams};
use flipforge_core::image::AnnotationSet;
use flipforge_core::metrics::{match_detections, score, MatchConfig, MetricsReport};
use flipforge_core::simulate::{simulate, SimConfig, SimOutput};
use rayon::prelude::*;

use crate::annotations::{load_annotations, load_detections, save_annotations, save_detections};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::frames::save_sequence;
use crate::heatmap_io::{self, HeatmapMeta};

/// Writes `<out>/frames/` and `<out>/gt.json`.
pub fn run_simulate(cfg: &SimConfig, out: &Path) -> Result<SimOutput> {
    let sim = simulate(cfg)?;
    save_sequence(&sim.sequence, &out.join("frames"))?;
    save_annotations(&sim.annotations, &out.join("gt.json"))?;
    Ok(sim)
}

pub fn run_sample_labels(labels: &AnnotationSet, mode: LabelSampling, seed: u64, out: &Path) -> Result<AnnotationSet> {
    let sampled = sample_partial_labels(labels, mode, seed)?;
    save_annotations(&sampled, out)?;
    Ok(sampled)
}

/// Render the ground-truth heatmap of every pair in the dataset at `dataset_dir`.
pub fn run_render(dataset_dir: &Path, sigma: f64, out: &Path) -> Result<usize> {
    let ds = Dataset::open(dataset_dir)?;
    fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let (w, h) = (ds.manifest.width, ds.manifest.height);
    ds.pairs
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let hm = render_targets(&p.events, w, h, sigma)?;
            heatmap_io::save_indexed(out, i, &hm, HeatmapMeta { source_t: p.source_t })
        })
        .collect::<Result<Vec<()>>>()?;
    Ok(ds.pairs.len())
}

/// Extract peaks from every heatmap in `heatmaps_dir` and write detections.json.
pub fn run_peaks(heatmaps_dir: &Path, params: &PeakParams, out: &Path) -> Result<Vec<Detection>> {
    params.validate()?;
    let maps = heatmap_io::load_dir(heatmaps_dir)?;
    let detections: Vec<Detection> = maps
        .par_iter()
        .map(|(meta, h)| extract_peaks(h, meta.source_t, params))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    save_detections(&detections, out)?;
    Ok(detections)
}

/// Ground truth from an annotation file or from a dataset directory.
pub fn load_ground_truth(path: &Path) -> Result<AnnotationSet> {
    if path.is_dir() {
        Dataset::open(path)?.ground_truth()
    } else {
        load_annotations(path)
    }
}

pub fn run_evaluate(
    gt: &AnnotationSet,
    detections: &[Detection],
    cfg: &MatchConfig,
    threshold: Option<f64>,
) -> Result<MetricsReport> {
    cfg.validate()?;
    let kept: Vec<Detection> = match threshold {
        Some(th) => detections.iter().copied().filter(|d| d.score >= th).collect(),
        None => detections.to_vec(),
    };
    Ok(score(&match_detections(gt.events(), &kept, cfg)))
}

pub fn evaluate_files(gt: &Path, det: &Path, cfg: &MatchConfig, threshold: Option<f64>) -> Result<MetricsReport> {
    run_evaluate(&load_ground_truth(gt)?, &load_detections(det)?, cfg, threshold)
}

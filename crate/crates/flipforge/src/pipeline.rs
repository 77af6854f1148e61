//! End-to-end orchestration: simulate, sample labels, generate, render,
//! read peaks and evaluate, plus the missing-annotation sweep.
//!
//! Artifacts land under `out_dir`:
//!
//! ```text
//! sim/frames/  sim/gt.json     simulate
//! labels.json                  sample_labels
//! dataset/                     generate
//! heatmaps/                    render
//! detections.json              peaks
//! dataset_gt.json              evaluate (ground truth it scored against)
//! sweep/rate_NN/...            one sub-tree per missing rate
//! summary.json
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use flipforge_core::datagen::{GenConfig, LabelSampling};
use flipforge_core::heatmap::PeakParams;
use flipforge_core::metrics::{MatchConfig, MetricsReport};
use flipforge_core::rng::derive_labeled;
use flipforge_core::simulate::SimConfig;
use flipforge_core::DATASET_FORMAT;
use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::annotations::{load_annotations, save_annotations, write_json};
use crate::dataset::{generate_dataset, Dataset};
use crate::error::{Error, Result};
use crate::frames::load_sequence;
use crate::stages;

pub const PIPELINE_FORMAT: &str = "flipforge-pipeline-v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Simulate,
    SampleLabels,
    Generate,
    Render,
    Peaks,
    Evaluate,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Simulate,
        Stage::SampleLabels,
        Stage::Generate,
        Stage::Render,
        Stage::Peaks,
        Stage::Evaluate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Simulate => "simulate",
            Stage::SampleLabels => "sample_labels",
            Stage::Generate => "generate",
            Stage::Render => "render",
            Stage::Peaks => "peaks",
            Stage::Evaluate => "evaluate",
        }
    }
}

fn all_stages() -> Vec<Stage> {
    Stage::ALL.to_vec()
}

fn default_sampling() -> LabelSampling {
    LabelSampling::NShot(5)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct HeatmapConfig {
    pub sigma: f64,
    pub threshold: f64,
    pub nms_radius: f64,
}

impl Default for HeatmapConfig {
    fn default() -> Self {
        let p = PeakParams::default();
        Self {
            sigma: 6.0,
            threshold: p.threshold,
            nms_radius: p.nms_radius,
        }
    }
}

impl HeatmapConfig {
    pub fn peaks(&self) -> PeakParams {
        PeakParams {
            threshold: self.threshold,
            nms_radius: self.nms_radius,
        }
    }
}

/// Existing data to use when the simulate stage is not run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputConfig {
    pub frames: PathBuf,
    pub labels: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub format_version: String,
    #[serde(default)]
    pub seed: u64,
    pub out_dir: PathBuf,
    #[serde(default = "all_stages")]
    pub stages: Vec<Stage>,
    #[serde(default)]
    pub input: Option<InputConfig>,
    #[serde(default)]
    pub simulate: SimConfig,
    #[serde(default = "default_sampling")]
    pub sampling: LabelSampling,
    #[serde(default)]
    pub generate: GenConfig,
    #[serde(default)]
    pub heatmap: HeatmapConfig,
    #[serde(default, rename = "match")]
    pub matching: MatchConfig,
    #[serde(default)]
    pub missing_rate_sweep: Vec<f64>,
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        if self.format_version != PIPELINE_FORMAT {
            return Err(Error::Invalid(format!(
                "unsupported pipeline format {:?}, expected {PIPELINE_FORMAT:?}",
                self.format_version
            )));
        }
        let order: Vec<usize> = self
            .stages
            .iter()
            .filter_map(|s| Stage::ALL.iter().position(|a| a == s))
            .collect();
        if order.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Invalid(
                "stages must be listed once each, in pipeline order".into(),
            ));
        }
        if !self.stages.contains(&Stage::Simulate) && self.input.is_none() {
            let needs_input = self
                .stages
                .iter()
                .any(|s| matches!(s, Stage::SampleLabels | Stage::Generate))
                || !self.missing_rate_sweep.is_empty();
            if needs_input {
                return Err(Error::Invalid(
                    "`input` is required when the simulate stage is skipped".into(),
                ));
            }
        }
        if self.stages.contains(&Stage::Simulate) {
            self.simulate.validate()?;
        }
        self.generate.validate()?;
        self.heatmap.peaks().validate()?;
        if self.heatmap.sigma.is_nan() || self.heatmap.sigma <= 0.0 {
            return Err(Error::Invalid("heatmap sigma must be positive".into()));
        }
        self.matching.validate()?;
        if let Some(r) = self.missing_rate_sweep.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(Error::Invalid(format!("missing rate {r} outside [0, 1]")));
        }
        Ok(())
    }

    fn has(&self, stage: Stage) -> bool {
        self.stages.contains(&stage)
    }

    pub fn seeds(&self) -> StageSeeds {
        StageSeeds {
            simulate: derive_labeled(self.seed, Stage::Simulate.name(), 0),
            sample_labels: derive_labeled(self.seed, Stage::SampleLabels.name(), 0),
            generate: derive_labeled(self.seed, Stage::Generate.name(), 0),
            sweep_labels: self
                .missing_rate_sweep
                .iter()
                .enumerate()
                .map(|(i, _)| derive_labeled(self.seed, "sweep_labels", i as u64))
                .collect(),
        }
    }
}

/// Read a pipeline config; relative paths are taken relative to the file.
/// Returns the parsed config and the raw JSON for provenance.
pub fn load_config(path: &Path) -> Result<(PipelineConfig, serde_json::Value)> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let raw: serde_json::Value = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
    let mut cfg: PipelineConfig = serde_json::from_value(raw.clone()).map_err(|e| Error::json(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let rebase = |p: &mut PathBuf| {
        if p.is_relative() {
            *p = base.join(&*p);
        }
    };
    rebase(&mut cfg.out_dir);
    if let Some(input) = cfg.input.as_mut() {
        rebase(&mut input.frames);
        rebase(&mut input.labels);
    }
    Ok((cfg, raw))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageSeeds {
    pub simulate: u64,
    pub sample_labels: u64,
    pub generate: u64,
    pub sweep_labels: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSummary {
    pub pairs: usize,
    pub bank_size: usize,
    pub skipped_labels: usize,
    pub pasted_events: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub missing_rate: f64,
    pub labels_total: usize,
    pub labels_kept: usize,
    pub dataset: Option<DatasetSummary>,
    pub metrics: Option<MetricsReport>,
    /// Why generation did not run for this row, if it did not.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub format_version: String,
    pub dataset_format: String,
    pub tool_version: String,
    pub seeds: StageSeeds,
    pub stages: Vec<Stage>,
    pub simulated_frames: Option<usize>,
    pub simulated_events: Option<usize>,
    pub labels: Option<usize>,
    pub dataset: Option<DatasetSummary>,
    pub heatmaps: Option<usize>,
    pub detections: Option<usize>,
    pub metrics: Option<MetricsReport>,
    pub sweep: Vec<SweepRow>,
}

fn summarize(ds: &Dataset) -> DatasetSummary {
    DatasetSummary {
        pairs: ds.pairs.len(),
        bank_size: ds.manifest.bank.source_events.len(),
        skipped_labels: ds.manifest.bank.skipped_events.len(),
        pasted_events: ds.pairs.iter().map(|p| p.events.len()).sum(),
    }
}

struct Layout {
    root: PathBuf,
}

impl Layout {
    fn sim_dir(&self) -> PathBuf {
        self.root.join("sim")
    }
    fn labels(&self) -> PathBuf {
        self.root.join("labels.json")
    }
    fn dataset(&self) -> PathBuf {
        self.root.join("dataset")
    }
    fn heatmaps(&self) -> PathBuf {
        self.root.join("heatmaps")
    }
    fn detections(&self) -> PathBuf {
        self.root.join("detections.json")
    }
    fn dataset_gt(&self) -> PathBuf {
        self.root.join("dataset_gt.json")
    }
}

/// generate -> render -> peaks -> evaluate on one label set, all under `layout`.
fn downstream(
    cfg: &PipelineConfig,
    layout: &Layout,
    frames_dir: &Path,
    labels_path: &Path,
    gen_seed: u64,
    provenance: &serde_json::Value,
    summary: &mut Summary,
) -> Result<()> {
    if cfg.has(Stage::Generate) {
        let seq = load_sequence(frames_dir).map_err(|e| e.in_stage("generate"))?;
        let labels = load_annotations(labels_path).map_err(|e| e.in_stage("generate"))?;
        let gen = GenConfig {
            seed: gen_seed,
            ..cfg.generate.clone()
        };
        generate_dataset(&seq, &labels, &gen, &layout.dataset(), Some(provenance.clone()))
            .map_err(|e| e.in_stage("generate"))?;
        let ds = Dataset::open(&layout.dataset()).map_err(|e| e.in_stage("generate"))?;
        summary.dataset = Some(summarize(&ds));
    }
    if cfg.has(Stage::Render) {
        let n = stages::run_render(&layout.dataset(), cfg.heatmap.sigma, &layout.heatmaps())
            .map_err(|e| e.in_stage("render"))?;
        summary.heatmaps = Some(n);
    }
    if cfg.has(Stage::Peaks) {
        let d = stages::run_peaks(&layout.heatmaps(), &cfg.heatmap.peaks(), &layout.detections())
            .map_err(|e| e.in_stage("peaks"))?;
        summary.detections = Some(d.len());
    }
    if cfg.has(Stage::Evaluate) {
        let run = || -> Result<MetricsReport> {
            let gt = Dataset::open(&layout.dataset())?.ground_truth()?;
            save_annotations(&gt, &layout.dataset_gt())?;
            let det = crate::annotations::load_detections(&layout.detections())?;
            stages::run_evaluate(&gt, &det, &cfg.matching, None)
        };
        summary.metrics = Some(run().map_err(|e| e.in_stage("evaluate"))?);
    }
    Ok(())
}

pub fn run_pipeline(cfg: &PipelineConfig, provenance: &serde_json::Value) -> Result<Summary> {
    cfg.validate()?;
    let seeds = cfg.seeds();
    let layout = Layout {
        root: cfg.out_dir.clone(),
    };
    fs::create_dir_all(&layout.root).map_err(|e| Error::io(&layout.root, e))?;
    let mut summary = Summary {
        format_version: PIPELINE_FORMAT.to_owned(),
        dataset_format: DATASET_FORMAT.to_owned(),
        tool_version: env!("CARGO_PKG_VERSION").to_owned(),
        seeds: seeds.clone(),
        stages: cfg.stages.clone(),
        simulated_frames: None,
        simulated_events: None,
        labels: None,
        dataset: None,
        heatmaps: None,
        detections: None,
        metrics: None,
        sweep: Vec::new(),
    };

    let (frames_dir, full_labels) = if cfg.has(Stage::Simulate) {
        info!("simulate");
        let sim_cfg = SimConfig {
            seed: seeds.simulate,
            ..cfg.simulate.clone()
        };
        let sim = stages::run_simulate(&sim_cfg, &layout.sim_dir()).map_err(|e| e.in_stage("simulate"))?;
        summary.simulated_frames = Some(sim.sequence.len());
        summary.simulated_events = Some(sim.annotations.len());
        (layout.sim_dir().join("frames"), layout.sim_dir().join("gt.json"))
    } else {
        match &cfg.input {
            Some(input) => (input.frames.clone(), input.labels.clone()),
            None => (layout.sim_dir().join("frames"), layout.sim_dir().join("gt.json")),
        }
    };

    let labels_path = if cfg.has(Stage::SampleLabels) {
        info!("sample labels");
        let run = || -> Result<usize> {
            let full = load_annotations(&full_labels)?;
            let s = stages::run_sample_labels(&full, cfg.sampling, seeds.sample_labels, &layout.labels())?;
            Ok(s.len())
        };
        summary.labels = Some(run().map_err(|e| e.in_stage("sample_labels"))?);
        layout.labels()
    } else if layout.labels().is_file() {
        layout.labels()
    } else {
        full_labels.clone()
    };

    downstream(
        cfg,
        &layout,
        &frames_dir,
        &labels_path,
        seeds.generate,
        provenance,
        &mut summary,
    )?;

    if !cfg.missing_rate_sweep.is_empty() {
        let full = load_annotations(&full_labels).map_err(|e| e.in_stage("sweep"))?;
        for (i, &rate) in cfg.missing_rate_sweep.iter().enumerate() {
            info!("sweep: missing rate {rate}");
            let sub = Layout {
                root: layout.root.join("sweep").join(format!("rate_{i:02}")),
            };
            fs::create_dir_all(&sub.root).map_err(|e| Error::io(&sub.root, e).in_stage("sweep"))?;
            let kept = stages::run_sample_labels(
                &full,
                LabelSampling::MissingRate(rate),
                seeds.sweep_labels[i],
                &sub.labels(),
            )
            .map_err(|e| e.in_stage("sweep"))?;
            let mut row_summary = summary_template(&summary);
            let skipped = if kept.is_empty() {
                Some("no labels survived".to_owned())
            } else {
                match downstream(
                    cfg,
                    &sub,
                    &frames_dir,
                    &sub.labels(),
                    seeds.generate,
                    provenance,
                    &mut row_summary,
                ) {
                    Ok(()) => None,
                    Err(e) if e.is_empty_bank() => {
                        warn!("missing rate {rate}: {e}");
                        Some("no surviving label is usable as a crop".to_owned())
                    }
                    Err(e) => return Err(e),
                }
            };
            summary.sweep.push(SweepRow {
                missing_rate: rate,
                labels_total: full.len(),
                labels_kept: kept.len(),
                dataset: row_summary.dataset,
                metrics: row_summary.metrics,
                skipped,
            });
        }
    }

    write_json(&summary, &layout.root.join("summary.json"))?;
    Ok(summary)
}

fn summary_template(s: &Summary) -> Summary {
    Summary {
        sweep: Vec::new(),
        dataset: None,
        heatmaps: None,
        detections: None,
        metrics: None,
        ..s.clone()
    }
}

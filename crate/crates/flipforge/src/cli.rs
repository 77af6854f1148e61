//! Command-line front end. Exit codes: 0 success, 1 usage, 2 data, 3 I/O.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use flipforge_core::datagen::{GenConfig, LabelSampling, PasteMode};
use flipforge_core::heatmap::PeakParams;
use flipforge_core::metrics::{match_detections, sweep, MatchConfig};
use flipforge_core::simulate::SimConfig;
use flipforge_core::DATASET_FORMAT;
use log::{error, info, warn};

use crate::annotations::{load_annotations, load_detections, read_json};
use crate::dataset::generate_dataset;
use crate::error::{Error, Result};
use crate::frames::load_sequence;
use crate::pipeline::{load_config, run_pipeline, PIPELINE_FORMAT};
use crate::stages;

#[derive(Debug, Parser)]
#[command(
    name = "flipforge",
    version,
    about = "Synthetic mitosis training data from time-lapse microscopy"
)]
pub struct Cli {
    /// Seed for the stage being run (overrides any seed in a config file).
    #[arg(long, global = true)]
    pub seed: Option<u64>,

    /// Worker threads; defaults to the number of cores. Output does not depend on it.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a labelled time-lapse sequence.
    Simulate(SimulateArgs),
    /// Subsample an annotation file.
    SampleLabels(SampleArgs),
    /// Build a flip-and-paste dataset from frames and labels.
    Generate(GenerateArgs),
    /// Render target heatmaps for every pair in a dataset.
    Render(RenderArgs),
    /// Extract peak detections from a directory of heatmaps.
    Peaks(PeaksArgs),
    /// Score detections against ground truth.
    Evaluate(EvaluateArgs),
    /// Run the configured stages end to end.
    Pipeline(PipelineArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// JSON simulation config; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub width: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    #[arg(long)]
    pub frames: Option<usize>,
    #[arg(long)]
    pub cells: Option<usize>,
    #[arg(long)]
    pub noise_sigma: Option<f64>,
    /// Output directory; receives frames/ and gt.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub labels: PathBuf,
    /// Keep exactly this many annotations.
    #[arg(long, conflicts_with = "missing_rate", required_unless_present = "missing_rate")]
    pub n_shot: Option<usize>,
    /// Drop each annotation independently with this probability.
    #[arg(long)]
    pub missing_rate: Option<f64>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum PasteArg {
    Alpha,
    Direct,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    /// Directory of t####.png frames.
    #[arg(long)]
    pub frames: PathBuf,
    #[arg(long)]
    pub labels: PathBuf,
    /// JSON generation config; flags below override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub crop_size: Option<usize>,
    #[arg(long)]
    pub k_min: Option<usize>,
    #[arg(long)]
    pub k_max: Option<usize>,
    #[arg(long)]
    pub sigma_min: Option<f64>,
    #[arg(long)]
    pub sigma_max: Option<f64>,
    #[arg(long, value_enum)]
    pub paste_mode: Option<PasteArg>,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long, default_value_t = 6.0)]
    pub sigma: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct PeaksArgs {
    #[arg(long)]
    pub heatmaps: PathBuf,
    #[arg(long, default_value_t = PeakParams::default().threshold)]
    pub threshold: f64,
    #[arg(long, default_value_t = PeakParams::default().nms_radius)]
    pub nms_radius: f64,
    /// Output detections.json.
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    /// Annotation file or dataset directory.
    #[arg(long)]
    pub gt: PathBuf,
    #[arg(long)]
    pub detections: PathBuf,
    #[arg(long, default_value_t = MatchConfig::default().spatial_tol)]
    pub spatial_tol: f64,
    #[arg(long, default_value_t = MatchConfig::default().temporal_tol)]
    pub temporal_tol: usize,
    /// Only score detections at or above this value.
    #[arg(long, conflicts_with = "sweep")]
    pub threshold: Option<f64>,
    /// Report one row per score threshold.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub sweep: Vec<f64>,
    /// Also print unmatched ground truth and detections.
    #[arg(long)]
    pub details: bool,
}

#[derive(Debug, Args)]
pub struct PipelineArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Override the configured output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn long_version() -> String {
    format!(
        "{}\npipeline config: {PIPELINE_FORMAT}\ndataset: {DATASET_FORMAT}\nheatmap: HMAP v1",
        env!("CARGO_PKG_VERSION")
    )
}

fn read_config<T: for<'de> serde::Deserialize<'de> + Default>(path: Option<&Path>) -> Result<T> {
    match path {
        Some(p) => read_json(p),
        None => Ok(T::default()),
    }
}

fn print_json<T: serde::Serialize>(value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::json("<stdout>", e))?;
    println!("{text}");
    Ok(())
}

pub fn execute(cli: Cli) -> Result<()> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(Error::Usage("--threads must be at least 1".into()));
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            warn!("could not size the thread pool: {e}");
        }
    }
    let seed = cli.seed;
    match cli.command {
        Command::Simulate(a) => {
            let mut cfg: SimConfig = read_config(a.config.as_deref())?;
            if let Some(v) = a.width {
                cfg.width = v;
            }
            if let Some(v) = a.height {
                cfg.height = v;
            }
            if let Some(v) = a.frames {
                cfg.n_frames = v;
            }
            if let Some(v) = a.cells {
                cfg.n_cells = v;
            }
            if let Some(v) = a.noise_sigma {
                cfg.noise_sigma = v;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let sim = stages::run_simulate(&cfg, &a.out)?;
            info!("{} frames, {} divisions", sim.sequence.len(), sim.annotations.len());
        }
        Command::SampleLabels(a) => {
            let mode = match (a.n_shot, a.missing_rate) {
                (Some(n), _) => LabelSampling::NShot(n),
                (None, Some(r)) => LabelSampling::MissingRate(r),
                (None, None) => return Err(Error::Usage("one of --n-shot or --missing-rate is required".into())),
            };
            let labels = load_annotations(&a.labels)?;
            let kept = stages::run_sample_labels(&labels, mode, seed.unwrap_or(0), &a.out)?;
            info!("kept {} of {} annotations", kept.len(), labels.len());
        }
        Command::Generate(a) => {
            let mut cfg: GenConfig = read_config(a.config.as_deref())?;
            if let Some(v) = a.crop_size {
                cfg.crop_size = v;
            }
            if let Some(v) = a.k_min {
                cfg.k_min = v;
            }
            if let Some(v) = a.k_max {
                cfg.k_max = v;
            }
            if let Some(v) = a.sigma_min {
                cfg.mask_sigma_min = v;
            }
            if let Some(v) = a.sigma_max {
                cfg.mask_sigma_max = v;
            }
            if let Some(m) = a.paste_mode {
                cfg.paste_mode = match m {
                    PasteArg::Alpha => PasteMode::Alpha,
                    PasteArg::Direct => PasteMode::Direct,
                };
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            let seq = load_sequence(&a.frames)?;
            let labels = load_annotations(&a.labels)?;
            let m = generate_dataset(&seq, &labels, &cfg, &a.out, None)?;
            info!("{} pairs, bank of {}", m.pairs.len(), m.bank.source_events.len());
        }
        Command::Render(a) => {
            let n = stages::run_render(&a.dataset, a.sigma, &a.out)?;
            info!("rendered {n} heatmaps");
        }
        Command::Peaks(a) => {
            let params = PeakParams {
                threshold: a.threshold,
                nms_radius: a.nms_radius,
            };
            let d = stages::run_peaks(&a.heatmaps, &params, &a.out)?;
            info!("{} detections", d.len());
        }
        Command::Evaluate(a) => {
            let cfg = MatchConfig {
                spatial_tol: a.spatial_tol,
                temporal_tol: a.temporal_tol,
            };
            cfg.validate()?;
            let gt = stages::load_ground_truth(&a.gt)?;
            let det = load_detections(&a.detections)?;
            if !a.sweep.is_empty() {
                let rows: Vec<_> = sweep(gt.events(), &det, &cfg, &a.sweep)
                    .into_iter()
                    .map(|(th, r)| serde_json::json!({ "threshold": th, "report": r }))
                    .collect();
                print_json(&rows)?;
            } else {
                let report = stages::run_evaluate(&gt, &det, &cfg, a.threshold)?;
                if a.details {
                    let kept: Vec<_> = det
                        .iter()
                        .copied()
                        .filter(|d| a.threshold.is_none_or(|th| d.score >= th))
                        .collect();
                    let m = match_detections(gt.events(), &kept, &cfg);
                    let fns: Vec<_> = m.false_negatives.iter().map(|&i| gt.events()[i]).collect();
                    let fps: Vec<_> = m.false_positives.iter().map(|&i| kept[i]).collect();
                    print_json(&serde_json::json!({
                        "report": report,
                        "missed": fns,
                        "spurious": fps,
                    }))?;
                } else {
                    print_json(&report)?;
                }
            }
        }
        Command::Pipeline(a) => {
            let (mut cfg, mut raw) = load_config(&a.config)?;
            if let Some(s) = seed {
                cfg.seed = s;
                raw["seed"] = serde_json::json!(s);
            }
            if let Some(out) = a.out {
                raw["out_dir"] = serde_json::json!(out);
                cfg.out_dir = out;
            }
            let summary = run_pipeline(&cfg, &raw)?;
            if let Some(m) = summary.metrics {
                info!("precision {:.4} recall {:.4} f1 {:.4}", m.precision, m.recall, m.f1);
            }
        }
    }
    Ok(())
}

/// Parse `args` and run; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let version: &'static str = Box::leak(long_version().into_boxed_str());
    let matches = Cli::command().long_version(version).try_get_matches_from(args);
    let cli = match matches.and_then(|m| Cli::from_arg_matches(&m)) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            error!("{e}");
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

//! On-disk generated datasets.
//!
//! ```text
//! <out>/manifest.json
//! <out>/pairs/pair_000000/{before.png, after.png, events.json}
//! ```
//!
//! Pair `i` is generated from source frames `(t - 1, t)` with `t = i + 1`
//! and seed `GenConfig::pair_seed(t)`, so the tree is a pure function of the
//! sequence, the labels and the configuration regardless of thread count.

use std::fs;
use std::path::{Path, PathBuf};

use flipforge_core::datagen::{build_crop_bank, generate_pair, GenConfig, LabeledPair};
use flipforge_core::image::{AnnotationSet, MitosisEvent, Point, Sequence};
use flipforge_core::DATASET_FORMAT;
use log::{info, warn};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annotations::{read_json, write_json};
use crate::error::{Error, Result};
use crate::frames::write_frame;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BankRecord {
    pub crop_size: usize,
    pub source_events: Vec<MitosisEvent>,
    pub skipped_events: Vec<MitosisEvent>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairRecord {
    pub dir: String,
    pub source_t: usize,
    pub n_events: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub format: String,
    pub sequence: String,
    pub width: usize,
    pub height: usize,
    pub n_frames: usize,
    pub config: GenConfig,
    pub bank: BankRecord,
    pub pairs: Vec<PairRecord>,
    /// Verbatim pipeline configuration when written by `flipforge pipeline`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub provenance: Option<serde_json::Value>,
}

/// Contents of one `events.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEvents {
    pub source_t: usize,
    pub events: Vec<Point>,
    pub crop_ids: Vec<usize>,
    pub seed: u64,
}

pub fn pair_dir_name(index: usize) -> String {
    format!("pair_{index:06}")
}

fn write_pair(dir: &Path, lp: &LabeledPair) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_frame(&lp.pair.before, &dir.join("before.png"))?;
    write_frame(&lp.pair.after, &dir.join("after.png"))?;
    let events = PairEvents {
        source_t: lp.pair.source_t,
        events: lp.events.clone(),
        crop_ids: lp.crop_ids.clone(),
        seed: lp.seed,
    };
    write_json(&events, &dir.join("events.json"))
}

/// Generate one labelled pair per consecutive frame pair of `seq` and
/// write the dataset tree under `out`.
pub fn generate_dataset(
    seq: &Sequence,
    labels: &AnnotationSet,
    cfg: &GenConfig,
    out: &Path,
    provenance: Option<serde_json::Value>,
) -> Result<Manifest> {
    cfg.validate()?;
    let bank = build_crop_bank(seq, labels, cfg.crop_size)?;
    for e in &bank.skipped {
        warn!(
            "skipping annotation ({}, {:.2}, {:.2}): too close to a border or outside the frame range",
            e.t, e.x, e.y
        );
    }
    info!("crop bank: {} usable of {} annotations", bank.crops.len(), labels.len());

    let pairs_dir = out.join("pairs");
    fs::create_dir_all(&pairs_dir).map_err(|e| Error::io(&pairs_dir, e))?;
    let records = (1..seq.len())
        .into_par_iter()
        .map(|t| {
            let seed = cfg.pair_seed(t);
            let lp = generate_pair(seq, t, &bank.crops, cfg, seed)?;
            let dir = pair_dir_name(t - 1);
            write_pair(&pairs_dir.join(&dir), &lp)?;
            Ok(PairRecord {
                dir,
                source_t: t,
                n_events: lp.events.len(),
                seed,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let manifest = Manifest {
        format: DATASET_FORMAT.to_owned(),
        sequence: seq.name().to_owned(),
        width: seq.width(),
        height: seq.height(),
        n_frames: seq.len(),
        config: cfg.clone(),
        bank: BankRecord {
            crop_size: cfg.crop_size,
            source_events: bank.crops.iter().map(|c| *c.source_event()).collect(),
            skipped_events: bank.skipped.clone(),
        },
        pairs: records,
        provenance,
    };
    write_json(&manifest, &out.join("manifest.json"))?;
    Ok(manifest)
}

#[derive(Debug, Clone)]
pub struct Dataset {
    pub root: PathBuf,
    pub manifest: Manifest,
    pub pairs: Vec<PairEvents>,
}

impl Dataset {
    pub fn open(root: &Path) -> Result<Self> {
        let manifest: Manifest = read_json(&root.join("manifest.json"))?;
        if manifest.format != DATASET_FORMAT {
            return Err(Error::Invalid(format!(
                "{}: unsupported dataset format {:?}",
                root.display(),
                manifest.format
            )));
        }
        let pairs = manifest
            .pairs
            .iter()
            .map(|p| read_json(&root.join("pairs").join(&p.dir).join("events.json")))
            .collect::<Result<Vec<PairEvents>>>()?;
        Ok(Self {
            root: root.to_owned(),
            manifest,
            pairs,
        })
    }

    pub fn pair_dir(&self, index: usize) -> PathBuf {
        self.root.join("pairs").join(&self.manifest.pairs[index].dir)
    }

    /// Pasted events of every pair as ground truth, timed by `source_t`.
    pub fn ground_truth(&self) -> Result<AnnotationSet> {
        let events = self
            .pairs
            .iter()
            .flat_map(|p| p.events.iter().map(|e| MitosisEvent::new(p.source_t, e.x, e.y)))
            .collect();
        Ok(AnnotationSet::new(self.manifest.sequence.clone(), events)?)
    }
}

//! HMAP files on disk plus the `h%06d.json` sidecar carrying the source frame.

use std::fs;
use std::path::{Path, PathBuf};

use flipforge_core::heatmap::{decode_hmap, encode_hmap, Heatmap};
use serde::{Deserialize, Serialize};

use crate::annotations::{read_json, write_json};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeatmapMeta {
    pub source_t: usize,
}

pub fn heatmap_stem(index: usize) -> String {
    format!("h{index:06}")
}

pub fn save_heatmap(h: &Heatmap, path: &Path) -> Result<()> {
    fs::write(path, encode_hmap(h)).map_err(|e| Error::io(path, e))
}

pub fn load_heatmap(path: &Path) -> Result<Heatmap> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_hmap(&bytes).map_err(|e| Error::Decode {
        path: path.to_owned(),
        message: e.to_string(),
    })
}

/// Write `h{index}.hmap` and its sidecar into `dir`.
pub fn save_indexed(dir: &Path, index: usize, h: &Heatmap, meta: HeatmapMeta) -> Result<()> {
    let stem = heatmap_stem(index);
    save_heatmap(h, &dir.join(format!("{stem}.hmap")))?;
    write_json(&meta, &dir.join(format!("{stem}.json")))
}

/// Every `*.hmap` in `dir` in file-name order, paired with its sidecar.
pub fn load_dir(dir: &Path) -> Result<Vec<(HeatmapMeta, Heatmap)>> {
    if !dir.is_dir() {
        return Err(Error::MissingDirectory(dir.to_owned()));
    }
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "hmap"))
        .collect();
    paths.sort();
    paths
        .into_iter()
        .map(|p| {
            let meta: HeatmapMeta = read_json(&p.with_extension("json"))?;
            Ok((meta, load_heatmap(&p)?))
        })
        .collect()
}

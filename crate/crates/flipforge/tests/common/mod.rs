#![allow(dead_code)]

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use sha2::{Digest, Sha256};

/// Relative path -> SHA-256 of every file under `root`.
pub fn tree_hashes(root: &Path) -> BTreeMap<String, String> {
    let mut out = BTreeMap::new();
    walk(root, root, &mut out);
    out
}

fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, String>) {
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            walk(root, &path, out);
        } else {
            let rel = path.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
            let digest = Sha256::digest(fs::read(&path).unwrap());
            let hex: String = digest.iter().map(|b| format!("{b:02x}")).collect();
            out.insert(rel, hex);
        }
    }
}

/// Differences between two hash trees, for assertion messages.
pub fn tree_diff(a: &BTreeMap<String, String>, b: &BTreeMap<String, String>) -> Vec<String> {
    let mut diff = Vec::new();
    for (k, v) in a {
        match b.get(k) {
            None => diff.push(format!("only in first: {k}")),
            Some(w) if w != v => diff.push(format!("differs: {k}")),
            _ => {}
        }
    }
    diff.extend(
        b.keys()
            .filter(|k| !a.contains_key(*k))
            .map(|k| format!("only in second: {k}")),
    );
    diff
}

pub fn write_config(dir: &Path, json: &serde_json::Value) -> std::path::PathBuf {
    let path = dir.join("pipeline.json");
    fs::write(&path, serde_json::to_string_pretty(json).unwrap()).unwrap();
    path
}

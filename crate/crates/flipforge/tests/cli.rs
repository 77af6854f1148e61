mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use flipforge::pipeline::Summary;

use common::{tree_diff, tree_hashes, write_config};

fn flipforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flipforge"))
        .args(args)
        .output()
        .unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn small_config() -> serde_json::Value {
    serde_json::json!({
        "format_version": "flipforge-pipeline-v1",
        "seed": 21,
        "out_dir": "out",
        "simulate": {"width": 160, "height": 160, "n_frames": 8, "n_cells": 14, "division_rate": 0.08}
    })
}

#[test]
fn version_lists_formats() {
    let out = flipforge(&["--version"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains(env!("CARGO_PKG_VERSION")));
    assert!(text.contains("flipforge-dataset-v1"));
    assert!(text.contains("flipforge-pipeline-v1"));
    assert_eq!(code(&flipforge(&["--help"])), 0);
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(code(&flipforge(&[])), 1);
    assert_eq!(code(&flipforge(&["bogus"])), 1);
    assert_eq!(
        code(&flipforge(&["sample-labels", "--labels", "a.json", "--out", "b.json"])),
        1
    );
    assert_eq!(
        code(&flipforge(&[
            "render",
            "--dataset",
            "d",
            "--sigma",
            "wide",
            "--out",
            "h"
        ])),
        1
    );
    let tmp = tempfile::tempdir().unwrap();
    let out = flipforge(&["--threads", "0", "simulate", "--out", s(tmp.path())]);
    assert_eq!(code(&out), 1);
}

#[test]
fn io_errors_exit_3_and_data_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let labels = tmp.path().join("labels.json");
    fs::write(&labels, r#"{"events":[]}"#).unwrap();
    let missing = tmp.path().join("no_frames");
    let out = flipforge(&[
        "generate",
        "--frames",
        s(&missing),
        "--labels",
        s(&labels),
        "--out",
        s(&tmp.path().join("d")),
    ]);
    assert_eq!(code(&out), 3);

    fs::write(&labels, r#"{"events":[{"t":1,"x":-3,"y":2}]}"#).unwrap();
    let out = flipforge(&[
        "sample-labels",
        "--labels",
        s(&labels),
        "--n-shot",
        "1",
        "--out",
        s(&tmp.path().join("o.json")),
    ]);
    assert_eq!(code(&out), 2);

    let out = flipforge(&[
        "sample-labels",
        "--labels",
        s(&tmp.path().join("absent.json")),
        "--n-shot",
        "1",
        "--out",
        "x.json",
    ]);
    assert_eq!(code(&out), 3);
}

#[test]
fn pipeline_config_rejects_unknown_keys() {
    let tmp = tempfile::tempdir().unwrap();
    for bad in [
        serde_json::json!({"format_version": "flipforge-pipeline-v1", "out_dir": "o", "colour": 1}),
        serde_json::json!({"format_version": "flipforge-pipeline-v1", "out_dir": "o", "simulate": {"cels": 3}}),
        serde_json::json!({"format_version": "flipforge-pipeline-v1", "out_dir": "o", "heatmap": {"sigmaa": 3}}),
        serde_json::json!({"format_version": "flipforge-pipeline-v0", "out_dir": "o"}),
        serde_json::json!({"format_version": "flipforge-pipeline-v1", "out_dir": "o", "stages": ["render", "generate"]}),
    ] {
        let path = write_config(tmp.path(), &bad);
        let out = flipforge(&["pipeline", "--config", s(&path)]);
        assert_eq!(code(&out), 2, "{bad}");
    }
    assert!(!tmp.path().join("o").exists());
}

#[test]
fn stage_errors_are_tagged() {
    let tmp = tempfile::tempdir().unwrap();
    let mut cfg = small_config();
    // a single division-free cell: nothing to build a crop bank from
    cfg["simulate"] = serde_json::json!({"width": 64, "height": 64, "n_frames": 4, "n_cells": 1, "division_rate": 0.0});
    let path = write_config(tmp.path(), &cfg);
    let out = flipforge(&["pipeline", "--config", s(&path)]);
    assert_eq!(code(&out), 2);
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("[generate]"), "{err}");
}

#[test]
fn subcommands_reproduce_the_pipeline() {
    let tmp = tempfile::tempdir().unwrap();
    let path = write_config(tmp.path(), &small_config());
    let out = flipforge(&["pipeline", "--config", s(&path)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let p = tmp.path().join("out");
    let summary: Summary = serde_json::from_str(&fs::read_to_string(p.join("summary.json")).unwrap()).unwrap();
    let m = summary.metrics.unwrap();
    assert_eq!(m.f1, 1.0);

    let h = tmp.path().join("by_hand");
    let seed = |v: u64| v.to_string();
    let run = |args: Vec<String>| {
        let args: Vec<&str> = args.iter().map(String::as_str).collect();
        let out = flipforge(&args);
        assert_eq!(code(&out), 0, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        out
    };
    let hs = |rel: &str| h.join(rel).to_str().unwrap().to_owned();
    run(vec![
        "--seed".into(),
        seed(summary.seeds.simulate),
        "simulate".into(),
        "--width".into(),
        "160".into(),
        "--height".into(),
        "160".into(),
        "--frames".into(),
        "8".into(),
        "--cells".into(),
        "14".into(),
        "--config".into(),
        write_sim_config(tmp.path()),
        "--out".into(),
        hs("sim"),
    ]);
    run(vec![
        "--seed".into(),
        seed(summary.seeds.sample_labels),
        "sample-labels".into(),
        "--labels".into(),
        hs("sim/gt.json"),
        "--n-shot".into(),
        "5".into(),
        "--out".into(),
        hs("labels.json"),
    ]);
    run(vec![
        "--seed".into(),
        seed(summary.seeds.generate),
        "generate".into(),
        "--frames".into(),
        hs("sim/frames"),
        "--labels".into(),
        hs("labels.json"),
        "--out".into(),
        hs("dataset"),
    ]);
    run(vec![
        "render".into(),
        "--dataset".into(),
        hs("dataset"),
        "--out".into(),
        hs("heatmaps"),
    ]);
    run(vec![
        "peaks".into(),
        "--heatmaps".into(),
        hs("heatmaps"),
        "--out".into(),
        hs("detections.json"),
    ]);
    let eval = run(vec![
        "evaluate".into(),
        "--gt".into(),
        hs("dataset"),
        "--detections".into(),
        hs("detections.json"),
    ]);
    let report: serde_json::Value = serde_json::from_slice(&eval.stdout).unwrap();
    assert_eq!(report["f1"], 1.0);
    assert_eq!(report["tp"], m.tp);

    for dir in ["sim", "heatmaps", "dataset/pairs"] {
        let diff = tree_diff(&tree_hashes(&p.join(dir)), &tree_hashes(&h.join(dir)));
        assert!(diff.is_empty(), "{dir}: {diff:?}");
    }
    for file in ["labels.json", "detections.json"] {
        assert_eq!(
            fs::read(p.join(file)).unwrap(),
            fs::read(h.join(file)).unwrap(),
            "{file}"
        );
    }
    // The manifests differ only in the pipeline provenance record.
    let strip = |root: &Path| {
        let mut v: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(root.join("dataset/manifest.json")).unwrap()).unwrap();
        let prov = v.as_object_mut().unwrap().remove("provenance");
        (v, prov)
    };
    let (pm, prov) = strip(&p);
    let (hm, none) = strip(&h);
    assert_eq!(pm, hm);
    assert_eq!(prov.unwrap()["seed"], 21);
    assert!(none.is_none());
}

fn write_sim_config(dir: &Path) -> String {
    let path = dir.join("sim.json");
    fs::write(&path, r#"{"division_rate": 0.08}"#).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn evaluate_threshold_sweep_and_details() {
    let tmp = tempfile::tempdir().unwrap();
    let gt = tmp.path().join("gt.json");
    let det = tmp.path().join("det.json");
    fs::write(&gt, r#"{"events":[{"t":3,"x":10,"y":10},{"t":5,"x":80,"y":80}]}"#).unwrap();
    fs::write(
        &det,
        r#"{"detections":[{"t":3,"x":12,"y":10,"score":0.9},{"t":5,"x":80,"y":70,"score":0.4},{"t":9,"x":200,"y":0,"score":0.8}]}"#,
    )
    .unwrap();
    let out = flipforge(&["evaluate", "--gt", s(&gt), "--detections", s(&det)]);
    assert_eq!(code(&out), 0);
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(
        (r["tp"].as_u64(), r["fp"].as_u64(), r["fn"].as_u64()),
        (Some(2), Some(1), Some(0))
    );

    let out = flipforge(&[
        "evaluate",
        "--gt",
        s(&gt),
        "--detections",
        s(&det),
        "--sweep",
        "0.0,0.5,0.85",
    ]);
    let rows: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let tps: Vec<u64> = rows
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["report"]["tp"].as_u64().unwrap())
        .collect();
    assert_eq!(tps, vec![2, 1, 1]);

    let out = flipforge(&[
        "evaluate",
        "--gt",
        s(&gt),
        "--detections",
        s(&det),
        "--threshold",
        "0.5",
        "--details",
    ]);
    let d: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(d["missed"].as_array().unwrap().len(), 1);
    assert_eq!(d["spurious"].as_array().unwrap().len(), 1);

    let out = flipforge(&[
        "evaluate",
        "--gt",
        s(&gt),
        "--detections",
        s(&det),
        "--spatial-tol",
        "1.5",
    ]);
    let r: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["tp"], 0);
}

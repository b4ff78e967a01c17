//! End-to-end smoke tests of the command-line surface.

use std::path::Path;
use std::process::Command;

fn tubed() -> Command {
    Command::new(env!("CARGO_BIN_EXE_tubed"))
}

#[test]
fn no_arguments_is_a_usage_error() {
    let out = tubed().output().unwrap();
    assert!(!out.status.success());
    assert_eq!(out.status.code(), Some(2), "clap usage errors exit with 2");
    let text = String::from_utf8_lossy(&out.stderr);
    assert!(text.contains("Usage"), "usage text expected, got: {text}");
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = tubed().arg("frobnicate").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn sample_net_graph_growth_chain() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();

    let out = tubed()
        .args([
            "--out-dir", out_dir,
            "sample",
            "--model", "euclidean2",
            "--center", "0,0",
            "--radius", "6",
            "--spacing", "0.2",
            "--seed", "5",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let points = dir.path().join("points.csv");
    assert!(points.exists());
    assert!(dir.path().join("model.json").exists());
    let head = std::fs::read_to_string(&points).unwrap();
    assert!(head.starts_with("# model=euclidean2 seed=5\n"));

    let out = tubed()
        .args([
            "--out-dir", out_dir,
            "net",
            "--model", "euclidean2",
            "--points", points.to_str().unwrap(),
            "--r", "0.5",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("net_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["separation_ok"], true);
    assert_eq!(report["lebesgue_ok"], true);

    let out = tubed()
        .args([
            "--out-dir", out_dir,
            "graph",
            "--model", "euclidean2",
            "--points", points.to_str().unwrap(),
            "--r", "0.5",
            "--lambda", "2",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let graph: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("graph.json")).unwrap())
            .unwrap();
    assert_eq!(graph["lambda"], 2.0);
    assert!(graph["edges"].as_array().unwrap().len() > 0);

    let out = tubed()
        .args([
            "--out-dir", out_dir,
            "growth",
            "--model", "euclidean2",
            "--points", points.to_str().unwrap(),
            "--r", "0.5",
            "--r-max", "10",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("growth.csv").exists());
    assert!(dir.path().join("growth.json").exists());
}

#[test]
fn calibrate_and_gauss_and_universal() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();

    let out = tubed()
        .args(["--out-dir", out_dir, "calibrate", "--n", "1", "--box-radius", "6"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let cal: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("calibration.json")).unwrap())
            .unwrap();
    assert!(cal["scale"].as_f64().unwrap() > 0.0);

    let out = tubed()
        .args(["--out-dir", out_dir, "gauss", "--sweep", "500", "--seed", "3"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let gauss: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("gauss_report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(gauss["violations"], 0);

    let out = tubed()
        .args([
            "--out-dir", out_dir,
            "universal",
            "--gamma-path", "40",
            "--levels", "1",
            "--seed", "9",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let delta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("delta.json")).unwrap())
            .unwrap();
    assert_eq!(delta["levels"][0]["certificate"]["exhausted"], true);
    assert!(dir.path().join("delta_graph.json").exists());
}

#[test]
fn pipeline_and_batch_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().to_str().unwrap();

    let out = tubed()
        .args([
            "--out-dir", out_dir,
            "pipeline",
            "--region-radius", "6",
            "--seed", "4",
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap())
            .unwrap();
    assert_eq!(summary["version"], "v1");
    assert!(summary["stages"]["f1"]["min_image_distance"].as_f64().unwrap() >= 1.0);
    assert!(summary["stages"]["reach"]["reach"]["reach_estimate"].as_f64().unwrap() > 0.0);
    // Uniform-smoothness estimates of the combined map stay finite.
    let bounds = summary["stages"]["combine"]["derivative_bounds"]
        .as_array()
        .unwrap();
    assert_eq!(bounds.len(), 4);
    for c in bounds {
        assert!(c.as_f64().unwrap().is_finite());
    }
    assert!(dir.path().join("growth.svg").exists());
    assert!(dir.path().join("scatter.svg").exists());
    assert!(dir.path().join("distortion.svg").exists());

    // Batch evaluation against the written config.
    let cfg = tubed_cli::config::PipelineConfig::euclidean_default(6.0, 4);
    let cfg_path = dir.path().join("config.json");
    std::fs::write(&cfg_path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    let batch = dir.path().join("batch.csv");
    std::fs::write(&batch, "# model=euclidean2 seed=0\n0.5,0.5\n-1.0,2.0\n").unwrap();

    let out = tubed()
        .args([
            "--out-dir", out_dir,
            "f2",
            "--config", cfg_path.to_str().unwrap(),
            "--points", batch.to_str().unwrap(),
        ])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let images = std::fs::read_to_string(dir.path().join("f2_images.csv")).unwrap();
    let header = images.lines().next().unwrap();
    assert!(header.starts_with("# epsilon="));
    assert!(header.contains("d1=") && header.contains("d2=") && header.contains("seed="));
    assert_eq!(images.lines().count(), 3);
}

#[test]
fn out_dir_environment_override() {
    let dir = tempfile::tempdir().unwrap();
    let out = tubed()
        .env("TUBED_OUT_DIR", dir.path())
        .args(["calibrate", "--n", "1", "--box-radius", "4"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("calibration.json").exists());
    let _ = Path::new("tubed-out");
}

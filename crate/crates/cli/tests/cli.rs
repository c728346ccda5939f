use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command as Process;

use mirror_margin_cli::config::{DatasetSpec, GaugeSpec};
use mirror_margin_cli::{cmd_check, cmd_horizon, cmd_run, ExperimentConfig, Overrides};
use tempfile::TempDir;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("configs")
        .join(format!("{name}.json"))
}

fn load(name: &str, out: &Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::load(&config(name)).unwrap();
    cfg.apply(&Overrides {
        out: Some(out.to_path_buf()),
        ..Overrides::default()
    });
    cfg
}

fn bin() -> Process {
    Process::new(env!("CARGO_BIN_EXE_mirror-margin"))
}

fn csv_rows(path: &Path) -> usize {
    fs::read_to_string(path).unwrap().lines().count() - 1
}

fn polylines(svg: &str) -> Vec<usize> {
    let doc = roxmltree::Document::parse(svg).unwrap();
    doc.descendants()
        .filter(|n| n.has_tag_name("polyline"))
        .map(|n| n.attribute("points").unwrap().split_whitespace().count())
        .collect()
}

#[test]
fn blob_runs_reach_their_max_margin_directions() {
    let tmp = TempDir::new().unwrap();
    for (name, gauge, tol) in [
        ("blobs_quadratic", "l2", 1e-2),
        ("blobs_cosh", "linf", 3e-2),
        ("blobs_hyperbolic", "l1", 3e-2),
    ] {
        let o = cmd_run(&load(name, &tmp.path().join(name))).unwrap();
        assert_eq!(o.report.gauge.kind, gauge);
        assert!(
            o.report.directional_gap < tol,
            "{name}: {}",
            o.report.directional_gap
        );
        assert!(o.manifest.complete);
    }
}

#[test]
fn run_bundle_contents() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = load("blobs_quadratic", tmp.path());
    cfg.flow.max_steps = 2000;
    cfg.flow.record_every = 50;
    let o = cmd_run(&cfg).unwrap();
    let files: Vec<&str> = o
        .manifest
        .artifacts
        .iter()
        .map(|a| a.file.as_str())
        .collect();
    for f in [
        "effective_config.json",
        "dataset.csv",
        "trajectory.csv",
        "loss.csv",
        "gauge.json",
        "margin_solution.json",
        "gaps.csv",
        "limit_diagnostics.json",
        "loss.svg",
        "directions.csv",
        "gauge_ball.csv",
        "paths.svg",
        "gauge.svg",
        "manifest.json",
    ] {
        assert!(tmp.path().join(f).exists(), "{f}");
        assert!(f == "manifest.json" || files.contains(&f), "{f}");
    }
    let effective: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(tmp.path().join("effective_config.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(effective["flow"]["adaptive"], false);
    assert_eq!(effective["horizon"]["degeneracy_threshold"], 0.05);
    assert_eq!(effective["output"]["plots"], true);

    let solution: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("margin_solution.json")).unwrap())
            .unwrap();
    for key in ["beta", "objective", "dual", "residuals", "uniqueness"] {
        assert!(solution.get(key).is_some(), "{key}");
    }

    // each plot only draws what the CSVs hold
    let loss_points = polylines(&fs::read_to_string(tmp.path().join("loss.svg")).unwrap());
    assert_eq!(
        loss_points,
        vec![csv_rows(&tmp.path().join("loss.csv")) - 1]
    );
    let paths = fs::read_to_string(tmp.path().join("paths.svg")).unwrap();
    let doc = roxmltree::Document::parse(&paths).unwrap();
    let dots = doc
        .descendants()
        .filter(|n| n.has_tag_name("circle"))
        .count();
    assert_eq!(dots, csv_rows(&tmp.path().join("dataset.csv")) + 1);
    assert_eq!(
        polylines(&paths),
        vec![csv_rows(&tmp.path().join("trajectory.csv")) - 1]
    );
    let ball = polylines(&fs::read_to_string(tmp.path().join("gauge.svg")).unwrap());
    assert_eq!(ball, vec![csv_rows(&tmp.path().join("gauge_ball.csv")) + 1]);
}

#[test]
fn identical_configs_give_identical_csv_bytes() {
    let tmp = TempDir::new().unwrap();
    let mut read = Vec::new();
    for k in 0..2 {
        let mut cfg = load("blobs_cosh", &tmp.path().join(k.to_string()));
        cfg.flow.max_steps = 3000;
        cmd_run(&cfg).unwrap();
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(tmp.path().join(k.to_string()))
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|e| e == "csv"))
            .map(|p| {
                (
                    p.file_name().unwrap().to_string_lossy().into_owned(),
                    fs::read(&p).unwrap(),
                )
            })
            .collect();
        files.sort();
        read.push(files);
    }
    assert_eq!(read[0].len(), 6);
    assert_eq!(read[0], read[1]);
}

#[test]
fn seed_override_changes_the_sample() {
    let tmp = TempDir::new().unwrap();
    let mut data = Vec::new();
    for seed in [3, 4] {
        let mut cfg = load("blobs_quadratic", &tmp.path().join(seed.to_string()));
        cfg.apply(&Overrides {
            seed: Some(seed),
            ..Overrides::default()
        });
        cfg.flow.max_steps = 10;
        cmd_run(&cfg).unwrap();
        data.push(
            fs::read_to_string(tmp.path().join(seed.to_string()).join("dataset.csv")).unwrap(),
        );
    }
    assert_ne!(data[0], data[1]);
}

#[test]
fn failing_stage_is_named_and_partial_output_kept() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = ExperimentConfig::load(&config("check_xor")).unwrap();
    cfg.apply(&Overrides {
        out: Some(tmp.path().to_path_buf()),
        ..Overrides::default()
    });
    let err = cmd_run(&cfg).unwrap_err();
    assert_eq!((err.stage.as_str(), err.code), ("flow", 2));
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(tmp.path().join("manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["complete"], false);
    assert_eq!(manifest["failure"]["stage"], "flow");
    assert!(tmp.path().join("dataset.csv").exists());
}

#[test]
fn horizon_examples() {
    let tmp = TempDir::new().unwrap();
    let q = cmd_horizon(&load("horizon_quadratic", &tmp.path().join("q"))).unwrap();
    assert!(q.report.probe.hausdorff_gaps.iter().all(|&g| g < 1e-12));

    let mut cfg = load("horizon_cosh", &tmp.path().join("c"));
    cfg.horizon.levels = vec![1e2, 1e4, 1e6, 1e8];
    cfg.horizon.gap_tolerance = 1.0;
    let c = cmd_horizon(&cfg).unwrap();
    assert!(
        c.report
            .probe
            .hausdorff_gaps
            .windows(2)
            .all(|w| w[1] < w[0]),
        "{:?}",
        c.report.probe.hausdorff_gaps
    );
    let svg = fs::read_to_string(tmp.path().join("c").join("level_sets.svg")).unwrap();
    let lines = polylines(&svg);
    assert_eq!(lines.len(), 4);
    assert_eq!(
        lines.iter().map(|n| n - 1).sum::<usize>(),
        csv_rows(&tmp.path().join("c").join("probe.csv"))
    );

    let err = cmd_horizon(&load("horizon_x2y4", &tmp.path().join("x"))).unwrap_err();
    assert_eq!(err.code, 2);
    assert!(err.message.contains("degenerate"));
    let report: serde_json::Value = serde_json::from_str(
        &fs::read_to_string(tmp.path().join("x").join("horizon.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["probe"]["degenerate"], true);
}

#[test]
fn numeric_gauge_in_run() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = load("blobs_cosh", tmp.path());
    cfg.gauge = GaugeSpec::Numeric;
    cfg.horizon = load("horizon_cosh", tmp.path()).horizon;
    cfg.flow.max_steps = 20_000;
    let o = cmd_run(&cfg).unwrap();
    assert_eq!(o.report.gauge.kind, "sampled2d");
    assert!(tmp.path().join("probe.csv").exists());
    let linf = [0.7144664492050861, 0.7144664492050857];
    let cos = (o.solution.beta[0] * linf[0] + o.solution.beta[1] * linf[1])
        / (o.solution.beta[0].hypot(o.solution.beta[1]) * linf[0].hypot(linf[1]));
    assert!(1.0 - cos < 1e-4, "{:?}", o.solution.beta);
}

#[test]
fn check_reports() {
    let tmp = TempDir::new().unwrap();
    let xor = cmd_check(&load("check_xor", &tmp.path().join("x"))).unwrap();
    assert!(!xor.passed());
    let sep = xor
        .items
        .iter()
        .find(|i| i.assumption.contains("separable"))
        .unwrap();
    assert!(!sep.passed && sep.evidence.contains("no separating direction"));
    assert!(xor
        .items
        .iter()
        .filter(|i| !i.assumption.contains("separable"))
        .all(|i| i.passed));

    for name in [
        "blobs_quadratic",
        "blobs_cosh",
        "blobs_hyperbolic",
        "horizon_x2y4",
    ] {
        let o = cmd_check(&load(name, &tmp.path().join(name))).unwrap();
        assert!(o.passed(), "{name}: {:?}", o.items);
        assert!(o.items[0].assumption.contains("exponential"));
    }
}

#[test]
fn dataset_files_are_validated() {
    let tmp = TempDir::new().unwrap();
    let mut cfg = load("check_xor", tmp.path());
    for (text, ok) in [
        ("x1,x2,y\n1,2,1\n-1,0,-1\n", true),
        ("a,b,y\n1,2,1\n", false),
        ("x1,x2,y\n1,2,0.5\n", false),
    ] {
        let path = tmp.path().join("d.csv");
        fs::write(&path, text).unwrap();
        cfg.dataset = Some(DatasetSpec::File(path));
        assert_eq!(cfg.dataset().is_ok(), ok, "{text}");
    }
    cfg.dataset = Some(DatasetSpec::File(tmp.path().join("missing.csv")));
    assert_eq!(cfg.dataset().unwrap_err().code, 4);
}

#[test]
fn exit_codes() {
    let tmp = TempDir::new().unwrap();
    let status = |args: &[&str]| bin().args(args).output().unwrap().status.code().unwrap();
    let out = tmp.path().to_str().unwrap();

    assert_eq!(
        status(&[
            "horizon",
            config("horizon_quadratic").to_str().unwrap(),
            "--out",
            out,
            "--no-plots"
        ]),
        0
    );
    assert!(!tmp.path().join("level_sets.svg").exists());
    assert_eq!(
        status(&[
            "horizon",
            config("horizon_x2y4").to_str().unwrap(),
            "--out",
            out
        ]),
        2
    );
    assert_eq!(
        status(&["check", config("check_xor").to_str().unwrap(), "--out", out]),
        2
    );
    assert_eq!(
        status(&[
            "run",
            tmp.path().join("nope.json").to_str().unwrap(),
            "--out",
            out
        ]),
        4
    );

    let bad = tmp.path().join("bad.json");
    fs::write(&bad, r#"{"potential": {"kind": "nope"}}"#).unwrap();
    assert_eq!(status(&["run", bad.to_str().unwrap(), "--out", out]), 2);

    // a tolerance no probe can meet is a numeric failure
    let strict = tmp.path().join("strict.json");
    fs::write(
        &strict,
        r#"{"potential": {"kind": "cosh_entropy"}, "horizon": {"gap_tolerance": 1e-9}}"#,
    )
    .unwrap();
    assert_eq!(
        status(&["horizon", strict.to_str().unwrap(), "--out", out]),
        3
    );
}

#[test]
fn sweep_writes_one_directory_per_config() {
    let tmp = TempDir::new().unwrap();
    let configs = tmp.path().join("configs");
    fs::create_dir(&configs).unwrap();
    for name in ["horizon_quadratic", "horizon_x2y4"] {
        fs::copy(config(name), configs.join(format!("{name}.json"))).unwrap();
    }
    let out = tmp.path().join("out");
    let output = bin()
        .args([
            "horizon",
            "--sweep",
            configs.join("*.json").to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ])
        .env("MIRROR_MARGIN_THREADS", "2")
        .output()
        .unwrap();
    assert_eq!(output.status.code(), Some(2));
    for name in ["horizon_quadratic", "horizon_x2y4"] {
        assert!(out.join(name).join("manifest.json").exists(), "{name}");
    }
    let stdout = String::from_utf8_lossy(&output.stdout);
    assert!(stdout.contains("horizon_quadratic: Hausdorff gaps"));
}

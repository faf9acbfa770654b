//! External-surface tests: the `idrm-sim` binary's subcommands, exit codes,
//! config overrides, CSV formats, and manifest-driven reruns.

mod common;

use idrm_sim::fit::simulate_observations;
use idrm_sim::pipeline::{run_pipeline, validate_config, PipelineConfig};
use idrm_sim::rng::RngSeed;
use idrm_sim::G1Params;
use std::path::PathBuf;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_idrm-sim"))
}

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("idrm_io_{}_{tag}", std::process::id()));
    std::fs::remove_dir_all(&dir).ok();
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn small_config_json() -> String {
    // fast grids for process-spawning tests
    r#"{
        "grids": {"pk_dt_h": 0.002, "pk_horizon_h": 6.0, "ecm_dt_s": 300.0, "ecm_horizon_s": 21600.0},
        "receiver": {"window_s": 20.0},
        "distances_mm": [1.0, 1.3]
    }"#
    .to_string()
}

#[test]
fn pipeline_subcommand_writes_expected_files() {
    let dir = temp_dir("pipeline");
    let cfg_path = dir.join("cfg.json");
    std::fs::write(&cfg_path, small_config_json()).unwrap();
    let out = bin()
        .args(["pipeline", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(dir.join("run"))
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    for name in [
        "plasma.csv",
        "circulation.csv",
        "barrier.csv",
        "ecm_r1mm.csv",
        "ecm_r1.3mm.csv",
        "receiver.csv",
        "idrm.csv",
        "manifest.json",
    ] {
        assert!(dir.join("run").join(name).exists(), "missing {name}");
    }
    // trace CSV header and full-precision rows
    let plasma = std::fs::read_to_string(dir.join("run/plasma.csv")).unwrap();
    let mut lines = plasma.lines();
    assert_eq!(lines.next().unwrap(), "t_h,value_model_mg");
    let row = lines.nth(500).unwrap();
    let (t, v) = row.split_once(',').unwrap();
    assert!(t.contains('e') && v.contains('e'), "rows use scientific notation: {row}");
    let receiver = std::fs::read_to_string(dir.join("run/receiver.csv")).unwrap();
    assert!(receiver.starts_with("t_s,lambda,arrivals\n"));
    let idrm = std::fs::read_to_string(dir.join("run/idrm.csv")).unwrap();
    assert!(idrm.starts_with("t_s,stored,released_this_step,absorbed_total,released_total\n"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn manifest_alone_reproduces_the_run() {
    let dir = temp_dir("manifest");
    let (cfg, _) = validate_config(&small_config_json()).unwrap();
    run_pipeline(&cfg, &dir.join("first")).unwrap();
    // rerun purely from the manifest
    let out = bin()
        .args(["pipeline", "--config"])
        .arg(dir.join("first/manifest.json"))
        .arg("--out")
        .arg(dir.join("second"))
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let mut names: Vec<String> = std::fs::read_dir(dir.join("first"))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    names.sort();
    for name in names {
        let a = std::fs::read(dir.join("first").join(&name)).unwrap();
        let b = std::fs::read(dir.join("second").join(&name)).unwrap();
        assert_eq!(a, b, "{name} not reproduced from manifest");
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn config_error_exits_2_with_field_paths() {
    let dir = temp_dir("badcfg");
    let cfg_path = dir.join("bad.json");
    std::fs::write(&cfg_path, r#"{"g2": {"a": 1.5}, "g3": {"beta": -2.0}}"#).unwrap();
    let out = bin()
        .args(["pipeline", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(dir.join("run"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("g2.a"), "stderr: {stderr}");
    assert!(stderr.contains("g3.beta"), "stderr: {stderr}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn unknown_figure_and_subcommand_exit_2() {
    let dir = temp_dir("badfig");
    let out = bin().args(["figure", "fig99", "--out"]).arg(&dir).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["transmogrify"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    let out = bin().args(["pipeline", "--bogus-flag"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn figure_subcommand_emits_sweep_families() {
    let dir = temp_dir("figures");
    let cfg_path = dir.join("cfg.json");
    std::fs::write(&cfg_path, small_config_json()).unwrap();
    for (figure, expected) in [
        ("fig5", vec!["fig5_plasma.csv"]),
        (
            "fig_circ",
            vec![
                "fig_circ_a0.25.csv",
                "fig_circ_a0.35.csv",
                "fig_circ_a0.5.csv",
                "fig_circ_a0.6.csv",
                "fig_circ_a0.75.csv",
            ],
        ),
        (
            "fig6",
            vec![
                "fig6_beta0.5.csv",
                "fig6_beta0.75.csv",
                "fig6_beta1.csv",
                "fig6_beta1.25.csv",
                "fig6_beta1.5.csv",
            ],
        ),
        ("fig7", vec!["fig7_r1mm.csv", "fig7_r1.3mm.csv"]),
        (
            "fig8",
            vec![
                "fig8_plasma.csv",
                "fig8_circulation.csv",
                "fig8_barrier.csv",
                "fig8_ecm.csv",
                "fig8_intensity.csv",
            ],
        ),
    ] {
        let fig_dir = dir.join(figure);
        let out = bin()
            .args(["figure", figure, "--config"])
            .arg(&cfg_path)
            .arg("--out")
            .arg(&fig_dir)
            .output()
            .unwrap();
        assert!(
            out.status.success(),
            "{figure} failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        for name in expected {
            assert!(fig_dir.join(name).exists(), "{figure} missing {name}");
        }
        assert!(fig_dir.join("manifest.json").exists());
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn set_overrides_reach_the_manifest() {
    let dir = temp_dir("overrides");
    let out = bin()
        .args([
            "pipeline",
            "--set",
            "g2.a=0.75",
            "--set",
            "grids.pk_dt_h=0.002",
            "--set",
            "grids.pk_horizon_h=6.0",
            "--set",
            "grids.ecm_dt_s=300.0",
            "--set",
            "grids.ecm_horizon_s=21600.0",
            "--set",
            "receiver.window_s=20.0",
            "--set",
            "distances_mm=[1.3]",
            "--seed",
            "7",
            "--out",
        ])
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config"]["g2"]["a"], serde_json::json!(0.75));
    assert_eq!(manifest["seed"], serde_json::json!(7));
    assert_eq!(manifest["generator"], serde_json::json!("xoshiro256**"));
    // every emitted file is hashed
    let files = manifest["files"].as_object().unwrap();
    for (name, hash) in files {
        assert!(name.ends_with(".csv"));
        assert!(hash.as_str().unwrap().starts_with("fnv1a64:"));
    }
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn fit_subcommand_round_trips_table_values() {
    let dir = temp_dir("fit");
    let truth = G1Params::new(1418.0, 0.0547, 0.6073, 0.2461).unwrap();
    let times: Vec<f64> = (0..25).map(|i| i as f64 * 5.0 / 24.0).collect();
    let samples = simulate_observations(&truth, 125.0, &times, 0.0, RngSeed(5)).unwrap();
    let mut csv = String::from("t_hours,value\n");
    for s in &samples {
        csv.push_str(&format!("{},{}\n", s.t, s.value));
    }
    let data_path = dir.join("plasma.csv");
    std::fs::write(&data_path, csv).unwrap();

    // start the search away from the truth
    let out = bin()
        .arg("fit")
        .arg(&data_path)
        .args(["--set", "g1.k=1000", "--set", "g1.T1=0.08", "--set", "g1.T2=0.5", "--set", "g1.T0=0.3"])
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    let parsed: serde_json::Value = serde_json::from_str(stdout.trim()).unwrap();
    for key in ["k", "T1", "T2", "T0", "sse", "converged"] {
        assert!(parsed.get(key).is_some(), "missing {key} in {stdout}");
    }
    assert_eq!(parsed["converged"], serde_json::json!(true));
    let k = parsed["k"].as_f64().unwrap();
    assert!((k - truth.k).abs() / truth.k < 0.01, "k = {k}");
    // same JSON lands in fit.json
    let file_json = std::fs::read_to_string(dir.join("fit.json")).unwrap();
    assert_eq!(file_json.trim(), stdout.trim());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn demo_subcommands_run_clean() {
    let dir = temp_dir("demos");
    let out = bin()
        .args(["receiver-demo", "--set", "receiver.window_s=5.0", "--out"])
        .arg(dir.join("rx"))
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("rx/receiver_demo.csv").exists());

    let out = bin()
        .args(["idrm-demo", "--set", "grids.ecm_horizon_s=600.0", "--out"])
        .arg(dir.join("idrm"))
        .output()
        .unwrap();
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("idrm/idrm_demo.csv").exists());
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn warnings_surface_on_stderr_without_failing() {
    let dir = temp_dir("warn");
    let cfg_path = dir.join("cfg.json");
    let mut cfg: serde_json::Value = serde_json::from_str(&small_config_json()).unwrap();
    cfg["ecm"] = serde_json::json!({"alpha": 0.05});
    std::fs::write(&cfg_path, cfg.to_string()).unwrap();
    let out = bin()
        .args(["figure", "fig7", "--config"])
        .arg(&cfg_path)
        .arg("--out")
        .arg(dir.join("run"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("warning") && stderr.contains("alpha"), "stderr: {stderr}");
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn config_unit_symbols_round_trip_through_manifest() {
    // the manifest echoes the typed config; reparsing it must agree exactly
    let (cfg, _) = validate_config(&small_config_json()).unwrap();
    let echoed = serde_json::to_string(&serde_json::json!({ "config": cfg })).unwrap();
    let (reparsed, _): (PipelineConfig, _) = validate_config(&echoed).unwrap();
    assert_eq!(reparsed, cfg);
}

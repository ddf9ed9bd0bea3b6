use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use num_complex::Complex64;

use modspace::grid::io::save_function;
use modspace::grid::{SampledFunction, TorusGrid};
use modspace::norms::exp_modulation_norm;
use modspace::partitions::build_uniform_partition;

const CONFIG: &str = r#"{
    "grid": { "d": 1, "P": 16, "N": 1024 },
    "partition": { "K": 10, "J": 3 },
    "catalog": ["gaussian", "gaussian-shifted"],
    "seed": 3
}"#;

fn modspace(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_modspace"))
        .args(args)
        .current_dir(dir)
        .env_remove("MODSPACE_WORKERS")
        .output()
        .unwrap()
}

fn write_config(dir: &Path, text: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn suite_run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), CONFIG);
    let out = modspace(&["partition-check", "--config", &config, "--out", "res"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(summary["passed"], true);
    for file in ["report.json", "summary.csv", "meta.json"] {
        assert!(dir.path().join("res").join(file).exists());
    }
}

#[test]
fn seed_flag_and_env_workers() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), CONFIG);
    let out = Command::new(env!("CARGO_BIN_EXE_modspace"))
        .args(["interp-verify", "--config", &config, "--out", "a", "--seed", "99"])
        .current_dir(dir.path())
        .env("MODSPACE_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("a/report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 99);
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("a/meta.json")).unwrap()).unwrap();
    assert_eq!(meta["workers"], 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // failed assertion
    let strict = CONFIG.replace("\"seed\": 3", "\"seed\": 3, \"retract_check\": { \"tolerance\": 0.0 }");
    let config = write_config(dir.path(), &strict);
    let out = modspace(&["retract-check", "--config", &config, "--out", "r"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(dir.path().join("r/report.json").exists());

    // config errors
    let config = write_config(dir.path(), "{ \"grid\": 1 }");
    assert_eq!(modspace(&["norm", "--config", &config], dir.path()).status.code(), Some(2));
    let decay = CONFIG.replace(
        "\"seed\": 3",
        "\"extra_functions\": [{ \"kind\": \"gaussian\", \"name\": \"w\", \"sigma\": 9.0 }]",
    );
    let config = write_config(dir.path(), &decay);
    assert_eq!(modspace(&["norm", "--config", &config], dir.path()).status.code(), Some(2));
    assert_eq!(modspace(&["no-such-suite"], dir.path()).status.code(), Some(2));
    assert_eq!(modspace(&["retract-check"], dir.path()).status.code(), Some(2));

    // runtime error: missing input file
    let out = modspace(&["norm", "--space", "M", "--p", "2", "--q", "2", "--s", "0", "--input", "missing.bin"], dir.path());
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn single_norm_evaluation() {
    let dir = tempfile::tempdir().unwrap();
    let grid = TorusGrid::new(1, 16, 1024).unwrap();
    let f = SampledFunction::from_fn(grid, |x| Complex64::new((-x[0] * x[0] / 2.0).exp(), 0.0));
    let path = dir.path().join("g.bin");
    save_function(&path, &f).unwrap();
    let out = modspace(
        &["norm", "--space", "E", "--p", "1", "--q", "inf", "--s", "-0.5", "--input", "g.bin", "--K", "10"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let json: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let family = build_uniform_partition(&grid, 10, None).unwrap();
    let expected = exp_modulation_norm(&f, &family, 1.0, f64::INFINITY, -0.5).unwrap().value();
    assert_eq!(json["value"].as_f64().unwrap(), expected);
    assert!(!json["pieces"].as_array().unwrap().is_empty());

    let out = modspace(&["norm", "--space", "B", "--p", "2", "--q", "2", "--s", "1", "--input", "g.bin"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let out = modspace(&["norm", "--space", "M", "--p", "0.5", "--q", "2", "--s", "0", "--input", "g.bin"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

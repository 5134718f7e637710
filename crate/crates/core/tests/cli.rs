mod common;

use std::process::{Command, Output};

fn bcsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bcsim")).args(args).output().unwrap()
}

#[test]
fn simulate_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = common::write_config(dir.path(), &common::small_text(0.001, 3));
    let out = dir.path().join("out");
    let o = bcsim(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--scenario",
        "both",
        "--replications",
        "2",
        "--seed",
        "17",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["simulation"]["replications"], 2);
    assert_eq!(manifest["simulation"]["base_seed"], 17);
    assert_eq!(manifest["seeds"][0][1], serde_json::json!([17, 18]));
    assert!(out.join("covid_total_cost.csv").exists());
    assert!(out.join("differences.csv").exists());
}

#[test]
fn no_crn_and_fraction_flags_apply() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = common::write_config(dir.path(), &common::small_text(0.001, 2));
    let out = dir.path().join("out");
    let o = bcsim(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--scenario",
        "covid",
        "--no-crn",
        "--fraction",
        "0.0005",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["simulation"]["common_random_numbers"], false);
    assert_eq!(manifest["simulation"]["population_fraction"], 0.0005);
    assert_eq!(manifest["seeds"][0][0], "covid");
    assert_eq!(manifest["seeds"][0][1], serde_json::json!([2021, 2022]));
    assert!(!out.join("differences.csv").exists());
}

#[test]
fn dump_params_prints_calibration() {
    let cfg = common::default_config();
    let o = bcsim(&["simulate", "--config", cfg.to_str().unwrap(), "--dump-params"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("parameter,stage,phase,value\n"));
    assert!(text.contains("healing_lambda_per_cycle,1,normal,"));
    assert!(text.contains("projected_prevalence_2019,,,2.6359"));
    let sub = bcsim(&["dump-params", "--config", cfg.to_str().unwrap()]);
    assert_eq!(String::from_utf8(sub.stdout).unwrap(), text);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.toml");
    let o = bcsim(&["simulate", "--config", missing.to_str().unwrap(), "--out", "x"]);
    assert_eq!(o.status.code(), Some(2));

    let bad = common::write_config(dir.path(), &common::default_text().replace("annual_normal = 0.124", "annual_normal = 1.5"));
    let o = bcsim(&["simulate", "--config", bad.to_str().unwrap(), "--out", "x"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("diagnosis.annual_normal"));

    let cfg = common::write_config(dir.path(), &common::small_text(0.001, 1));
    let blocker = dir.path().join("file");
    std::fs::write(&blocker, "").unwrap();
    let o = bcsim(&["simulate", "--config", cfg.to_str().unwrap(), "--out", blocker.join("sub").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(4));

    let o = bcsim(&["simulate", "--config", cfg.to_str().unwrap(), "--fraction", "0", "--out", "x"]);
    assert_eq!(o.status.code(), Some(2));
}

//! End-to-end binary behavior: exit codes, file outputs, environment
//! override.

use std::path::PathBuf;
use std::process::Command;

fn exe() -> &'static str {
    env!("CARGO_BIN_EXE_agentsel")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("agentsel-cli-io-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

const SMALL_BENCH: &str = r#"
kind = "regret-bench"

[seeds]
base = 2
replicates = 2

[learner]
algorithm = "exp-weights"

[bench]
arms = 3
horizon = 200
suite = "iid"
"#;

#[test]
fn run_and_verify_round_trip() {
    let dir = scratch("roundtrip");
    let config = dir.join("bench.toml");
    std::fs::write(&config, SMALL_BENCH).unwrap();
    let out = Command::new(exe())
        .args(["run"])
        .arg(&config)
        .arg("--out-dir")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let run_dir = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.is_dir())
        .expect("run directory created");
    let record = run_dir.join("run_seed2.json");
    assert!(record.exists());
    assert!(run_dir.join("run_seed2.csv").exists());
    assert!(run_dir.join("summary.json").exists());

    let out = Command::new(exe()).args(["verify"]).arg(&record).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("verify: ok"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn invalid_config_exits_one() {
    let dir = scratch("badcfg");
    let config = dir.join("bad.toml");
    std::fs::write(&config, "kind = \"regret-bench\"\n").unwrap();
    let out = Command::new(exe())
        .args(["run"])
        .arg(&config)
        .arg("--out-dir")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn tampered_record_exits_two() {
    let dir = scratch("tamper");
    let config = dir.join("bench.toml");
    std::fs::write(&config, SMALL_BENCH).unwrap();
    let out = Command::new(exe())
        .args(["run"])
        .arg(&config)
        .arg("--out-dir")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let run_dir = std::fs::read_dir(&dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.is_dir())
        .unwrap();
    let record_path = run_dir.join("run_seed2.json");
    let text = std::fs::read_to_string(&record_path).unwrap();
    let mut parsed: serde_json::Value = serde_json::from_str(&text).unwrap();
    let ext = parsed["summary"]["external_regret"].as_f64().unwrap();
    parsed["summary"]["external_regret"] = serde_json::json!(ext + 1.0);
    std::fs::write(&record_path, serde_json::to_string_pretty(&parsed).unwrap()).unwrap();

    let out = Command::new(exe()).args(["verify"]).arg(&record_path).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stdout).contains("MISMATCH"));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn failed_expectation_exits_two() {
    // A learner known to be monotone, with the config expecting violations.
    let dir = scratch("expect");
    let config = dir.join("mono.toml");
    std::fs::write(
        &config,
        r#"
kind = "monotone-check"

[seeds]
base = 4
replicates = 1

[learner]
algorithm = "exp-weights"
eta = 0.3

[check]
pairs = 10
max_horizon = 20
max_arms = 3
tolerance = 1e-10
expect_monotone = false
"#,
    )
    .unwrap();
    let out = Command::new(exe())
        .args(["run"])
        .arg(&config)
        .arg("--out-dir")
        .arg(&dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stdout));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn env_var_overrides_output_dir() {
    let dir = scratch("envdir");
    let config = dir.join("bench.toml");
    std::fs::write(&config, SMALL_BENCH).unwrap();
    let out = Command::new(exe())
        .args(["run"])
        .arg(&config)
        .env("AGENTSEL_OUT_DIR", &dir)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains(dir.to_str().unwrap()),
        "outputs not under the env-provided directory: {stdout}"
    );
    std::fs::remove_dir_all(&dir).ok();
}

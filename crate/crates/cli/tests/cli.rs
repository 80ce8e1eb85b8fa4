// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nems-chain"))
        .args(args)
        .arg("--out")
        .arg(dir.join("runs"))
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

/// Run directory printed on the last line of stdout.
fn run_dir(out: &Output) -> PathBuf {
    let stdout = String::from_utf8_lossy(&out.stdout);
    PathBuf::from(stdout.lines().last().expect("output names the run directory"))
}

fn assert_ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

const QUENCH: &str = r#"
kind = "quench"

[chain]
n_sites = 6
coupling = 0.3
boundary = "periodic"

[tracked]
sites = [1, 4]

[time]
t_end = 8.0
"#;

#[test]
fn quench_writes_a_complete_run() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "q.toml", QUENCH);
    let out = run(tmp.path(), &["quench", "--config", cfg.to_str().unwrap()]);
    assert_ok(&out);
    let dir = run_dir(&out);
    for f in ["config.toml", "series.csv", "summary.json", "manifest.json"] {
        assert!(dir.join(f).is_file(), "missing {f}");
    }
    let series = std::fs::read_to_string(dir.join("series.csv")).unwrap();
    let rows = nems_chain::io::read_series(&series).unwrap();
    assert_eq!(rows.len(), 161);
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    assert!(dir.file_name().unwrap().to_str().unwrap().starts_with(&manifest["config_hash"].as_str().unwrap()[..8]));
}

#[test]
fn repeated_runs_produce_identical_series() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "q.toml", QUENCH);
    let a = run(tmp.path(), &["quench", "--config", cfg.to_str().unwrap()]);
    let b = run(tmp.path(), &["quench", "--config", cfg.to_str().unwrap(), "--threads", "1"]);
    assert_ok(&a);
    assert_ok(&b);
    let (da, db) = (run_dir(&a), run_dir(&b));
    assert_ne!(da, db);
    assert_eq!(std::fs::read(da.join("series.csv")).unwrap(), std::fs::read(db.join("series.csv")).unwrap());
}

#[test]
fn flags_override_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "q.toml", QUENCH);
    let out = run(
        tmp.path(),
        &["quench", "--config", cfg.to_str().unwrap(), "--t-end", "2", "--dt", "0.5", "--log-base", "e"],
    );
    assert_ok(&out);
    let series = std::fs::read_to_string(run_dir(&out).join("series.csv")).unwrap();
    assert_eq!(nems_chain::io::read_series(&series).unwrap().len(), 5);
    assert!(String::from_utf8_lossy(&out.stdout).contains("log base e"));
}

#[test]
fn small_scenarios_run_through_every_subcommand() {
    let tmp = tempfile::tempdir().unwrap();
    let configs = [
        ("ramp-scan", "scan.csv", "kind = \"ramp_scan\"\n[chain]\nn_sites = 4\ncoupling = 0.2\nboundary = \"open\"\n[ramp_scan]\ndurations = [0.0, 1.0]\n[time]\nt_end = 5.0\n"),
        ("channel", "arrivals.csv", "kind = \"channel\"\n[chain]\nn_sites = 4\ncoupling = 0.1\nboundary = \"open\"\n[channel]\nsqueezing = 0.5\n[time]\nt_end = 10.0\n"),
        ("falloff", "falloff.csv", "kind = \"falloff\"\n[chain]\nn_sites = 16\ncoupling = 0.1\nboundary = \"periodic\"\n[falloff]\ndistances = [1, 2, 3, 4]\n[time]\nt_end = 10.0\n"),
        ("decohere", "series.csv", "kind = \"decohere\"\n[chain]\nn_sites = 2\ncoupling = 0.4\nboundary = \"periodic\"\n[tracked]\nsites = [1, 2]\n[bath]\nmodes_per_oscillator = 40\ncoupling = 0.01\ntemperature = 0.0\n[time]\nt_end = 5.0\n"),
    ];
    for (cmd, file, text) in configs {
        let cfg = write_config(tmp.path(), &format!("{cmd}.toml"), text);
        let out = run(tmp.path(), &[cmd, "--config", cfg.to_str().unwrap()]);
        assert_ok(&out);
        assert!(run_dir(&out).join(file).is_file(), "{cmd} did not write {file}");
    }
}

#[test]
fn calibration_is_cached_under_the_output_root() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "cal.toml",
        "kind = \"calibrate\"\n[bath]\nmodes_per_oscillator = 300\nq_factor = 100.0\n",
    );
    let out = run(tmp.path(), &["calibrate", "--config", cfg.to_str().unwrap()]);
    assert_ok(&out);
    let cache = std::fs::read_to_string(tmp.path().join("runs/calibration_cache.toml")).unwrap();
    let file = nems_chain::io::parse_calibration_cache(&cache).unwrap();
    assert_eq!(file.entries.len(), 1);
    assert_eq!(file.entries[0].q_factor, 100.0);
}

#[test]
fn validate_passes_and_checks_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "q.toml", QUENCH);
    let out = run(tmp.path(), &["validate", "--config", cfg.to_str().unwrap()]);
    assert_ok(&out);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("config ok"));
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn bad_configs_exit_with_code_two() {
    let tmp = tempfile::tempdir().unwrap();
    let bad = write_config(tmp.path(), "bad.toml", &QUENCH.replace("coupling = 0.3", "coupling = -0.3"));
    let out = run(tmp.path(), &["quench", "--config", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("chain.coupling"));

    let good = write_config(tmp.path(), "q.toml", QUENCH);
    let out = run(tmp.path(), &["channel", "--config", good.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kind"));
}

#[test]
fn missing_config_file_exits_with_code_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(tmp.path(), &["quench", "--config", "does-not-exist.toml"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn short_bath_horizon_is_refused_with_code_four() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "d.toml",
        "kind = \"decohere\"\n[chain]\nn_sites = 2\ncoupling = 0.4\nboundary = \"periodic\"\n[tracked]\nsites = [1, 2]\n[bath]\nmodes_per_oscillator = 10\ncoupling = 0.01\ntemperature = 0.0\n[time]\nt_end = 100.0\n",
    );
    let out = run(tmp.path(), &["decohere", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(4), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

//! Black-box tests of the `supercrit` binary: argument handling, exit-code
//! policy, warning/flag plumbing, and artifact layout.

use std::path::Path;
use std::process::{Command, Output};

fn supercrit(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_supercrit"))
        .args(args)
        .current_dir(dir)
        .env_remove("SUPERCRIT_OUT")
        .output()
        .expect("binary runs")
}

fn write_scenario(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn unknown_subcommand_prints_usage_and_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = supercrit(&["frobnicate"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("Usage") || err.contains("usage"), "{err}");
}

#[test]
fn missing_scenario_file_is_a_hard_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = supercrit(&["simulate", "no-such-file.toml"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn unsupported_dimension_is_a_hard_error() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_scenario(dir.path(), "d2.toml", "[model]\nd = 2\np = 6.0\n");
    let out = supercrit(&["simulate", &s], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("3..=9"), "{err}");
}

#[test]
fn unknown_key_error_carries_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_scenario(
        dir.path(),
        "typo.toml",
        "[model]\nd = 3\np = 6.0\n\n[grid]\nresolution = 128\n",
    );
    let out = supercrit(&["simulate", &s], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("resolution"), "{err}");
    assert!(err.contains("line 6") || err.contains("6,"), "{err}");
}

#[test]
fn out_of_window_power_warns_but_runs() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_scenario(
        dir.path(),
        "p3.toml",
        "[model]\nd = 3\np = 3.0\n[grid]\nn = 64\nr_max = 10.0\n[run]\nt_end = 0.5\n",
    );
    let out = supercrit(&["--out", "o", "simulate", &s], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("warning") && err.contains("window"), "{err}");
}

#[test]
fn zero_amplitude_run_succeeds_with_all_zero_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_scenario(
        dir.path(),
        "zero.toml",
        "[model]\nd = 3\np = 6.0\n[grid]\nn = 64\nr_max = 10.0\n\
         [data]\namplitude = 0.0\n[run]\nt_end = 0.5\n",
    );
    let out = supercrit(&["--out", "o", "simulate", &s], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("o/zero/series.csv")).unwrap();
    let mut rows = 0;
    for line in csv.lines().skip(1) {
        // Every column except the timestamp is identically zero.
        for field in line.split(',').skip(1) {
            assert_eq!(field.parse::<f64>().unwrap(), 0.0, "row: {line}");
        }
        rows += 1;
    }
    assert!(rows > 1);
}

#[test]
fn wall_contact_is_flagged_and_soft_fails() {
    let dir = tempfile::tempdir().unwrap();
    // Support ~3.7 plus T = 4 exceeds the R = 6 box: the wave must reach the
    // wall during the run.
    let s = write_scenario(
        dir.path(),
        "tight.toml",
        "[model]\nd = 3\np = 6.0\n[grid]\nn = 96\nr_max = 6.0\n[run]\nt_end = 4.0\n",
    );
    let out = supercrit(&["--out", "o", "simulate", &s], dir.path());
    assert_eq!(out.status.code(), Some(3), "expected the soft-failure code");
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("light cone"), "parse-time warning missing: {err}");
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/tight/manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["flags"]["boundary_touched"], true);
    assert_eq!(manifest["flags"]["overflow_halt"], false);
    // Artifacts for the completed run exist despite the soft failure.
    assert!(dir.path().join("o/tight/series.csv").exists());
    assert!(dir.path().join("o/tight/report.json").exists());
}

#[test]
fn manifest_checksum_matches_the_series() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_scenario(
        dir.path(),
        "sum.toml",
        "[model]\nd = 3\np = 6.0\n[grid]\nn = 64\nr_max = 10.0\n[run]\nt_end = 0.5\n",
    );
    let out = supercrit(&["--out", "o", "simulate", &s], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("o/sum/manifest.json")).unwrap())
            .unwrap();
    let bytes = std::fs::read(dir.path().join("o/sum/series.csv")).unwrap();
    let expect = supercrit_cli::run::sha256_hex(&bytes);
    assert_eq!(manifest["series_sha256"].as_str().unwrap(), expect);
    // Every file the manifest references exists.
    for f in manifest["outputs"].as_array().unwrap() {
        assert!(dir.path().join("o/sum").join(f.as_str().unwrap()).exists());
    }
}

#[test]
fn env_var_supplies_the_default_output_root() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_scenario(
        dir.path(),
        "envroot.toml",
        "[model]\nd = 3\np = 6.0\n[grid]\nn = 64\nr_max = 10.0\n[run]\nt_end = 0.25\n",
    );
    let out = Command::new(env!("CARGO_BIN_EXE_supercrit"))
        .args(["simulate", &s])
        .current_dir(dir.path())
        .env("SUPERCRIT_OUT", dir.path().join("via-env"))
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(0));
    assert!(dir.path().join("via-env/envroot/series.csv").exists());
}

#[test]
fn blowup_subcommand_rejects_defocusing_sign() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_scenario(
        dir.path(),
        "wrong-sign.toml",
        "[model]\nd = 3\np = 6.0\nsign = \"defocusing\"\n[grid]\nn = 64\nr_max = 10.0\n",
    );
    let out = supercrit(&["--out", "o", "blowup", &s], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("focusing"), "{err}");
}

#[test]
fn exponents_table_shows_the_window() {
    let dir = tempfile::tempdir().unwrap();
    let out = supercrit(&["exponents", "--d", "7"], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("0.8000000000"), "{text}");
    assert!(text.contains("0.9248161864"), "{text}");
}

#[test]
fn exponents_rejects_low_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let out = supercrit(&["exponents", "--d", "2"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

//! Drives the installed binary end to end: argument surface, config
//! diagnostics with their exit codes, artifact layout, and output precision.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cavity-ramsey"))
}

fn tmp(name: &str) -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn write_config(name: &str, body: &str) -> PathBuf {
    let path = tmp(name);
    std::fs::write(&path, body).unwrap();
    path
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const COEFFS_BODY: &str = r#"{
  "coefficients": {
    "c0": {"value": 1.0, "unit": "rad/us"},
    "c3": {"value": 2.5, "unit": "rad/us*um^3"},
    "c6": {"value": 10.0, "unit": "rad/us*um^6"}
  }
}"#;

#[test]
fn help_lists_every_subcommand() {
    let out = bin().arg("--help").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    for name in [
        "coeffs",
        "potential",
        "ham-spectrum",
        "ramsey-mc",
        "ramsey-analytic",
        "ramsey-exact",
        "table1-check",
        "run",
    ] {
        assert!(text.contains(name), "--help must list {name}:\n{text}");
    }
    // The special-function evaluator is a hidden debugging aid: invocable,
    // but kept out of the public listing.
    assert!(!text.contains("specfun-eval"), "specfun-eval should stay hidden:\n{text}");
}

#[test]
fn missing_unit_tag_is_a_config_error_naming_the_path() {
    let config = write_config(
        "missing_unit.json",
        r#"{"params": {
            "omega_d": 358141562.0,
            "delta": {"value": 87964.6, "unit": "rad/us"},
            "big_delta": {"value": 150796447.4, "unit": "rad/us"},
            "mu": {"value": 10.0, "unit": "a0e"}
        }}"#,
    );
    let out = bin().args(["coeffs", "--config"]).arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", stderr_of(&out));
    assert!(
        stderr_of(&out).contains("params.omega_d"),
        "diagnostic must name the offending path: {}",
        stderr_of(&out)
    );
}

#[test]
fn unknown_unit_is_a_config_error_naming_the_path() {
    let config = write_config(
        "unknown_unit.json",
        r#"{"coefficients": {
            "c0": {"value": 1.0, "unit": "furlongs"},
            "c3": {"value": 2.5, "unit": "rad/us*um^3"},
            "c6": {"value": 10.0, "unit": "rad/us*um^6"}
        }}"#,
    );
    let out = bin().args(["coeffs", "--config"]).arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", stderr_of(&out));
    let err = stderr_of(&out);
    assert!(err.contains("coefficients.c0") && err.contains("furlongs"), "{err}");
}

#[test]
fn zero_detuning_is_a_domain_error() {
    let config = write_config(
        "zero_detuning.json",
        r#"{"params": {
            "omega_d": {"value": 57.0, "unit": "THz"},
            "delta": {"value": 0.0, "unit": "GHz"},
            "big_delta": {"value": 24.0, "unit": "THz"},
            "mu": {"value": 10.0, "unit": "a0e"}
        }}"#,
    );
    let out = bin().args(["coeffs", "--config"]).arg(&config).output().unwrap();
    assert_eq!(out.status.code(), Some(3), "{}", stderr_of(&out));
    assert!(stderr_of(&out).contains("detuning"), "{}", stderr_of(&out));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let out =
        bin().args(["coeffs", "--config", "/no/such/config.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1), "{}", stderr_of(&out));
}

#[test]
fn specfun_eval_reports_arity_mistakes_and_matches_the_library() {
    let out = bin().args(["specfun-eval", "f_tau", "0.5"]).output().unwrap();
    assert_eq!(out.status.code(), Some(2), "{}", stderr_of(&out));
    assert!(stderr_of(&out).contains("2 argument"), "{}", stderr_of(&out));

    let out = bin().args(["specfun-eval", "si", "1.0"]).output().unwrap();
    assert!(out.status.success());
    let printed: f64 = String::from_utf8_lossy(&out.stdout)
        .split_whitespace()
        .last()
        .unwrap()
        .parse()
        .unwrap();
    assert_eq!(printed, cavity_ramsey::specfun::sin_integral(1.0));
}

#[test]
fn potential_csv_has_unit_headers_and_full_precision() {
    let config = write_config("potential_source.json", COEFFS_BODY);
    let out = bin()
        .args(["potential", "--config"])
        .arg(&config)
        .args(["--r-min", "0.7", "--r-max", "3.0", "--points", "8"])
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", stderr_of(&out));
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "r[um],theta[rad],U[rad/us],regime");
    for line in lines {
        let fields: Vec<&str> = line.split(',').collect();
        assert_eq!(fields.len(), 4, "{line}");
        // 17 significant digits round-trip losslessly: re-printing the
        // parsed value must reproduce the field byte for byte.
        for f in &fields[..3] {
            let x: f64 = f.parse().unwrap();
            assert_eq!(format!("{x:.16e}"), *f, "field is not full precision");
        }
    }
}

#[test]
fn scenario_rerun_is_byte_identical_and_manifest_carries_no_timestamps() {
    let dir = tmp("scenario_out");
    let scenario = write_config(
        "cli_scenario.json",
        &format!(
            r#"{{
  "name": "cli_check",
  "coefficients": {{
    "c0": {{"value": 1.0, "unit": "rad/us"}},
    "c3": {{"value": 2.5, "unit": "rad/us*um^3"}},
    "c6": {{"value": 10.0, "unit": "rad/us*um^6"}}
  }},
  "ramsey": {{
    "p_d": 0.05,
    "atoms": 30,
    "density": {{"value": 0.35, "unit": "1/um^3"}},
    "tau": {{"start": {{"value": 0.0, "unit": "us"}},
            "stop": {{"value": 1.0, "unit": "us"}},
            "points": 4}},
    "realizations": 2,
    "seed": 5,
    "mode": "full"
  }},
  "outputs": {{"dir": {:?}, "format": "csv"}}
}}"#,
            dir.to_str().unwrap()
        ),
    );
    let run = || {
        let out = bin().arg("run").arg(&scenario).output().unwrap();
        assert!(out.status.success(), "{}", stderr_of(&out));
        let csv = std::fs::read(dir.join("cli_check_ramsey.csv")).unwrap();
        let manifest = std::fs::read(dir.join("cli_check_manifest.json")).unwrap();
        (String::from_utf8_lossy(&out.stdout).into_owned(), csv, manifest)
    };
    let (stdout1, csv1, manifest1) = run();
    let (_, csv2, manifest2) = run();
    assert!(stdout1.contains("cli_check_ramsey.csv") && stdout1.contains("wrote"));
    assert_eq!(csv1, csv2, "CSV artifact must be byte-identical across reruns");
    assert_eq!(manifest1, manifest2, "manifest must be byte-identical across reruns");

    let manifest: serde_json::Value = serde_json::from_slice(&manifest1).unwrap();
    let keys: Vec<&str> = manifest.as_object().unwrap().keys().map(String::as_str).collect();
    assert_eq!(
        keys,
        ["config_hash", "config_sha256", "crate_version", "mode", "name", "outputs",
         "realizations", "seed"],
        "manifest keys changed; keep them timestamp-free and sorted"
    );
    assert_eq!(manifest["name"], "cli_check");
    assert_eq!(manifest["outputs"][0], "cli_check_ramsey.csv");
}

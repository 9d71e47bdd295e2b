// SPDX-License-Identifier: Apache-2.0

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use snn_core::goldens::GoldenCase;
use snn_core::ioformats::{format_trace, TraceFormat};

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures/v1")
}

fn snnsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_snnsim"))
        .args(args)
        .output()
        .expect("spawn snnsim")
}

fn run_case(name: &str, format: &str) -> Output {
    let dir = fixtures().join(name);
    let case = GoldenCase::load(&dir).unwrap();
    let p = |f: &str| dir.join(f).display().to_string();
    snnsim(&[
        "run",
        "--hw",
        &p("hardware.json"),
        "--net",
        &p("network.json"),
        "--stim",
        &p("stimulus.txt"),
        "--cycles",
        &case.cycles.to_string(),
        "--format",
        format,
    ])
}

#[test]
fn leak_network_table_matches_expected() {
    let case = GoldenCase::load(&fixtures().join("network_3_leak")).unwrap();
    let out = run_case("network_3_leak", "table");
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stderr.is_empty());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text, format_trace(&case.expected, TraceFormat::Table));
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn jsonl_output_matches_expected_file() {
    let dir = fixtures().join("network_c_flight");
    let out = run_case("network_c_flight", "jsonl");
    assert_eq!(out.status.code(), Some(0));
    let expected = std::fs::read_to_string(dir.join("expected.jsonl")).unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap(), expected);
}

#[test]
fn trace_output_is_byte_identical_across_runs() {
    let a = run_case("network_a_stdp", "table");
    let b = run_case("network_a_stdp", "table");
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn validate_flags_long_delay() {
    let dir = fixtures().join("network_1_basic");
    let text = std::fs::read_to_string(dir.join("network.json")).unwrap();
    let mut net: serde_json::Value = serde_json::from_str(&text).unwrap();
    net["synapses"][0]["delay"] = 9.into();

    let tmp = tempfile::tempdir().unwrap();
    let bad = tmp.path().join("net.json");
    std::fs::write(&bad, net.to_string()).unwrap();

    let hw = dir.join("hardware.json").display().to_string();
    let out = snnsim(&["validate", "--hw", &hw, "--net", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stdout).unwrap().contains("delay out of range"));

    // The simulator refuses it as well, with nothing on stdout.
    let stim = dir.join("stimulus.txt").display().to_string();
    let out = snnsim(&[
        "run", "--hw", &hw, "--net", bad.to_str().unwrap(), "--stim", &stim, "--cycles", "3",
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(out.stdout.is_empty());
    assert!(String::from_utf8(out.stderr).unwrap().contains("delay out of range"));
}

#[test]
fn validate_and_report_accept_fixture() {
    let dir = fixtures().join("network_1_basic");
    let hw = dir.join("hardware.json").display().to_string();
    let net = dir.join("network.json").display().to_string();
    let out = snnsim(&["validate", "--hw", &hw, "--net", &net]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stdout).unwrap().ends_with("ok\n"));

    let out = snnsim(&["report", "--hw", &hw, "--net", &net]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("neurons: 5"), "{text}");
    assert!(text.contains("synapses: 6"), "{text}");
}

#[test]
fn golden_over_fixture_directory() {
    let out = snnsim(&["golden", "--fixtures", fixtures().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().last(), Some("12/12 passed"));
}

#[test]
fn golden_reports_a_diff() {
    let tmp = tempfile::tempdir().unwrap();
    let src = fixtures().join("network_1_basic");
    let dst = tmp.path().join("network_1_basic");
    std::fs::create_dir(&dst).unwrap();
    for entry in std::fs::read_dir(&src).unwrap() {
        let entry = entry.unwrap();
        std::fs::copy(entry.path(), dst.join(entry.file_name())).unwrap();
    }
    let expected = std::fs::read_to_string(dst.join("expected.jsonl")).unwrap();
    let tampered = expected.replacen("\"Bias\":0", "\"Bias\":5", 1);
    assert_ne!(expected, tampered);
    std::fs::write(dst.join("expected.jsonl"), tampered).unwrap();

    let out = snnsim(&["golden", "--fixtures", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "0/1 passed\n");
    assert!(String::from_utf8(out.stderr).unwrap().starts_with("FAIL network_1_basic"));
}

#[test]
fn malformed_stimulus_is_exit_two() {
    let dir = fixtures().join("network_1_basic");
    let tmp = tempfile::tempdir().unwrap();
    let stim = tmp.path().join("s.txt");
    std::fs::write(&stim, "AS 0 Nobody\n").unwrap();
    let p = |f: &str| dir.join(f).display().to_string();
    let out = snnsim(&[
        "run", "--hw", &p("hardware.json"), "--net", &p("network.json"),
        "--stim", stim.to_str().unwrap(), "--cycles", "2",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
}

//! End-to-end checks of the `innerlab` binary: exit codes, report
//! shapes, and byte-level determinism.

use std::fs;
use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn innerlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_innerlab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn tmp(name: &str) -> PathBuf {
    let mut path = std::env::temp_dir();
    path.push(format!("innerlab-cli-{}-{name}", std::process::id()));
    path
}

fn stdout_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "command failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn stderr_text(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn cantor_entropy_matches_the_closed_form() {
    let out = innerlab(&[
        "set", "entropy", "--generator", "cantor", "--ratio", "3",
        "--depth", "20",
    ]);
    let doc = stdout_json(&out);
    let entropy = doc["meta"]["entropy"].as_f64().unwrap();
    let tail = doc["meta"]["tail_bound"].as_f64().unwrap();
    let exact = 3.0 * 3.0f64.ln();
    assert!(
        (entropy - exact).abs() / exact < 0.01,
        "entropy {entropy} vs closed form {exact}"
    );
    assert!(entropy <= exact && exact <= entropy + tail + 1e-6);
    assert_eq!(doc["provenance"]["depths"]["depth"], 20);
}

#[test]
fn help_exits_zero() {
    let out = innerlab(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("innerlab"));
}

#[test]
fn unknown_verb_exits_two() {
    let out = innerlab(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_generator_option_exits_two() {
    let out = innerlab(&["set", "entropy", "--generator", "cantor"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_text(&out).contains("--ratio"));
}

#[test]
fn finite_entropy_refuses_a_divergent_set() {
    let mu = tmp("divergent-mu.json");
    fs::write(&mu, "[[0.0, 1.0]]").unwrap();
    let out = innerlab(&[
        "wepify", "finite-entropy", "--input", mu.to_str().unwrap(),
        "--generator", "gap", "--count", "1000", "--depth", "8",
        "--resolution", "14",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr_text(&out);
    assert!(err.contains("hit sums"), "diagnostic: {err}");
}

#[test]
fn malformed_json_exits_two_with_location() {
    let path = tmp("malformed.json");
    fs::write(&path, "{\"zeros\": [").unwrap();
    let out = innerlab(&["certify", "eta", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = stderr_text(&out);
    assert!(err.contains("line 1"), "diagnostic: {err}");
}

#[test]
fn zero_mass_atom_exits_two() {
    let path = tmp("zero-mass.json");
    fs::write(&path, "[[0.25, 0.0]]").unwrap();
    let out = innerlab(&[
        "wepify", "porous", "--input", path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_text(&out).contains("measure"));
}

#[test]
fn reruns_are_byte_identical() {
    let spec = tmp("rerun-spec.json");
    fs::write(
        &spec,
        r#"{"zeros": [{"re": 0.9375, "im": 0.0}], "measure": [[0.25, 0.5]]}"#,
    )
    .unwrap();
    let csv_a = tmp("rerun-a.csv");
    let csv_b = tmp("rerun-b.csv");
    let run = |csv: &PathBuf| {
        innerlab(&[
            "certify", "eta", "--input", spec.to_str().unwrap(),
            "--depth", "8", "--format", "csv", "--out", csv.to_str().unwrap(),
        ])
    };
    let first = run(&csv_a);
    let second = run(&csv_b);
    assert!(first.status.success());
    assert_eq!(first.stdout, second.stdout);
    assert_eq!(fs::read(&csv_a).unwrap(), fs::read(&csv_b).unwrap());
}

#[test]
fn eta_csv_has_the_documented_header_and_shape() {
    let spec = tmp("csv-spec.json");
    fs::write(&spec, r#"{"measure": [[0.25, 0.5]]}"#).unwrap();
    let csv = tmp("csv-eta.csv");
    let out = innerlab(&[
        "certify", "eta", "--input", spec.to_str().unwrap(),
        "--depth", "8", "--format", "csv", "--out", csv.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("eps,eta_hat"));
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), 2, "row {line}");
        assert!(cells[0].contains('.'), "decimal point in {line}");
    }
    assert!(text.ends_with('\n'));
    assert!(!text.contains('\r'));
}

#[test]
fn report_reexport_is_byte_identical() {
    let first = tmp("report-a.json");
    let second = tmp("report-b.json");
    let out = innerlab(&[
        "set", "family-g", "--generator", "cantor", "--ratio", "3",
        "--depth", "6", "--out", first.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = innerlab(&[
        "report", "--input", first.to_str().unwrap(),
        "--out", second.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(fs::read(&first).unwrap(), fs::read(&second).unwrap());
}

#[test]
fn cell_cap_env_var_rejects_deep_sweeps() {
    let out = Command::new(env!("CARGO_BIN_EXE_innerlab"))
        .args([
            "set", "porosity", "--generator", "cantor", "--ratio", "3",
            "--depth", "12",
        ])
        .env("INNERLAB_MAX_CELLS", "1024")
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_text(&out).contains("INNERLAB_MAX_CELLS"));
}

#[test]
fn family_rows_are_sorted_by_level_then_index() {
    let out = innerlab(&[
        "set", "family-f", "--generator", "points",
        "--points", "0.1,0.35,0.8", "--depth", "6",
    ]);
    let doc = stdout_json(&out);
    let keys: Vec<(u64, u64)> = doc["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|row| (row[0].as_u64().unwrap(), row[1].as_u64().unwrap()))
        .collect();
    assert!(!keys.is_empty());
    assert!(keys.windows(2).all(|w| w[0] < w[1]));
}

#[test]
fn csv_without_out_exits_two() {
    let out = innerlab(&[
        "set", "entropy", "--generator", "cantor", "--ratio", "3",
        "--depth", "8", "--format", "csv",
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_text(&out).contains("--out"));
}

#[test]
fn empty_table_yields_a_header_only_csv() {
    let csv = tmp("empty.csv");
    let out = innerlab(&[
        "set", "family-g", "--generator", "full-circle", "--depth", "6",
        "--format", "csv", "--out", csv.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        fs::read_to_string(&csv).unwrap(),
        "level,index,start,length\n"
    );
}

#[test]
fn unwritable_out_path_exits_one() {
    let out = innerlab(&[
        "set", "entropy", "--generator", "cantor", "--ratio", "3",
        "--depth", "8", "--out", "/nonexistent-dir-xyz/report.json",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn placement_documents_feed_the_pair_sum_check() {
    let masses: Vec<f64> = (1..=32).map(|s| 2.0f64.powi(-s)).collect();
    let positions: Vec<f64> =
        (0..32).map(|k| (2.0 * k as f64 + 1.0) / 64.0).collect();
    let input = tmp("atomic-input.json");
    fs::write(
        &input,
        serde_json::json!({ "masses": masses, "positions": positions })
            .to_string(),
    )
    .unwrap();
    let mu = tmp("atomic-mu.json");
    let pairs: Vec<(f64, f64)> = positions
        .iter()
        .copied()
        .zip(masses.iter().copied())
        .collect();
    fs::write(&mu, serde_json::to_string(&pairs).unwrap()).unwrap();

    let place = tmp("atomic-place.json");
    let out = innerlab(&[
        "wepify", "atomic", "--input", input.to_str().unwrap(),
        "--depth", "8", "--out", place.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr_text(&out));

    let out = innerlab(&[
        "certify", "kl2", "--input", mu.to_str().unwrap(),
        "--result", place.to_str().unwrap(), "--depth", "8",
    ]);
    let doc = stdout_json(&out);
    let constant = doc["rows"][0][0].as_f64().unwrap();
    assert!(constant.is_finite() && constant > 0.0);
    assert!(doc["meta"]["worst_arc"].is_object());
}

#[test]
fn hit_sum_verdicts_cover_the_vocabulary() {
    let verdict = |args: &[&str]| {
        let doc = stdout_json(&innerlab(args));
        doc["meta"]["verdict"].as_str().unwrap().to_owned()
    };
    let converged = verdict(&[
        "set", "hit-sums", "--generator", "point", "--point", "0.3",
        "--depth", "14",
    ]);
    assert!(converged.starts_with("converges"), "{converged}");
    let divergent = verdict(&[
        "set", "hit-sums", "--generator", "full-circle", "--depth", "10",
    ]);
    assert!(divergent.starts_with("diverges"), "{divergent}");
    let open = verdict(&[
        "set", "hit-sums", "--generator", "gap", "--count", "1000",
        "--depth", "14",
    ]);
    assert!(open.starts_with("undetermined"), "{open}");
}

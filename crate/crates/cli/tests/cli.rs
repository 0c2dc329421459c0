use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const E: f64 = 1.69e11;
const L: f64 = 5e-4;

fn inertia() -> f64 {
    2e-5 * 8e-18 / 12.0
}

fn model(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../models").join(name)
}

fn cosserat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cosserat")).args(args).output().unwrap()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn write_variant(dir: &Path, base: &str, from: &str, to: &str) -> PathBuf {
    let text = fs::read_to_string(model(base)).unwrap().replace(from, to);
    let path = dir.join(format!("variant-{base}"));
    fs::write(&path, text).unwrap();
    path
}

#[test]
fn validate_canonical_file() {
    let out = cosserat(&["validate", model("cantilever.net").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "OK");
}

#[test]
fn validate_reports_undefined_section_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_variant(dir.path(), "cantilever.net", "sec=s1", "sec=s9");
    let out = cosserat(&["validate", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    let line = err.lines().next().unwrap();
    assert!(line.contains("s9"), "{err}");
    assert!(line.starts_with(&format!("{}:7:1:", bad.display())), "{line}");
}

#[test]
fn validate_missing_file() {
    let out = cosserat(&["validate", "/nonexistent/model.net"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn static_run_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let out = cosserat(&["run", model("cantilever.net").to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let rows = rows(&dir.path().join("results.csv"));
    let tip = rows.iter().find(|r| r[0] == "n2").unwrap();
    let uy: f64 = tip[2].parse().unwrap();
    let want = 7.3e-4 * L * L * L / (3.0 * E * inertia());
    assert!(((uy - want) / want).abs() < 1e-9);
    let reaction = rows.iter().find(|r| r[0] == "reaction:n1").unwrap();
    let fy: f64 = reaction[2].parse().unwrap();
    assert!((fy + 7.3e-4).abs() < 1e-12);
}

#[test]
fn buckling_override_at_ten_elements() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_variant(dir.path(), "cantilever.net", "fy=7.3e-4", "fx=-7.3e-4");
    let out = cosserat(&[
        "run",
        file.to_str().unwrap(),
        "--analysis",
        "buckling",
        "--elements",
        "10",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = rows(&dir.path().join("results.csv"));
    let p: f64 = rows[0][2].parse().unwrap();
    let exact = std::f64::consts::PI.powi(2) * E * inertia() / (4.0 * L * L);
    assert!(((p - exact) / exact).abs() * 100.0 <= 0.001);
}

#[test]
fn zero_load_gives_zero_rows() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_variant(dir.path(), "cantilever.net", "force n2 fy=7.3e-4", "");
    let out = cosserat(&["run", file.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    for r in rows(&dir.path().join("results.csv")) {
        assert!(r[1..].iter().all(|v| v.parse::<f64>().unwrap() == 0.0), "{r:?}");
    }
}

#[test]
fn outputs_are_byte_deterministic() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        let out = cosserat(&[
            "run",
            model("elastica.net").to_str().unwrap(),
            "--steps",
            "5",
            "--out",
            d.path().to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let read = |d: &tempfile::TempDir| fs::read(d.path().join("results.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    // 5 steps, 11 nodes each
    assert_eq!(rows(&a.path().join("results.csv")).len(), 55);
}

#[test]
fn nonlinear_failure_keeps_partial_path() {
    let dir = tempfile::tempdir().unwrap();
    let file = write_variant(dir.path(), "elastica.net", "maxiter=50", "maxiter=1");
    let out = cosserat(&[
        "run",
        file.to_str().unwrap(),
        "--steps",
        "1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4));
    let csv = fs::read_to_string(dir.path().join("results.csv")).unwrap();
    assert!(csv.starts_with("load_factor,node,ux,uy,rz\n"));
}

#[test]
fn modal_run_lists_requested_modes() {
    let dir = tempfile::tempdir().unwrap();
    let out = cosserat(&[
        "run",
        model("cantilever.net").to_str().unwrap(),
        "--analysis",
        "modal",
        "--order",
        "2",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = rows(&dir.path().join("results.csv"));
    assert_eq!(rows.len(), 3);
    let omega: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(omega.windows(2).all(|w| w[0] < w[1]));
    let hz: f64 = rows[0][2].parse().unwrap();
    assert!((hz * 2.0 * std::f64::consts::PI - omega[0]).abs() <= 1e-12 * omega[0]);
}

#[test]
fn override_mismatch_is_a_usage_error() {
    let out = cosserat(&["run", model("cantilever.net").to_str().unwrap(), "--order", "2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = cosserat(&["run", model("cantilever.net").to_str().unwrap(), "--elements", "0"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn buckling_study_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = cosserat(&[
        "study",
        model("column.net").to_str().unwrap(),
        "--elements",
        "1,4,10",
        "--quantity",
        "buckling",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("study.csv")).unwrap();
    assert!(csv.starts_with("elements,model_value,analytical_value,rel_error_percent\n"));
    let errs: Vec<f64> = rows(&dir.path().join("study.csv")).iter().map(|r| r[3].parse().unwrap()).collect();
    assert!((0.70..=0.80).contains(&errs[0]));
    assert!(errs.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn static_tip_study() {
    let dir = tempfile::tempdir().unwrap();
    let out = cosserat(&[
        "study",
        model("cantilever.net").to_str().unwrap(),
        "--elements",
        "2,8",
        "--quantity",
        "static-tip",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    for r in rows(&dir.path().join("study.csv")) {
        assert!(r[3].parse::<f64>().unwrap() <= 1e-8, "{r:?}");
    }
}

#[test]
fn modal_study_improves_with_elements() {
    let dir = tempfile::tempdir().unwrap();
    let out = cosserat(&[
        "study",
        model("cantilever.net").to_str().unwrap(),
        "--elements",
        "1,2,4",
        "--quantity",
        "modal-1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let errs: Vec<f64> = rows(&dir.path().join("study.csv")).iter().map(|r| r[3].parse().unwrap()).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn study_usage_and_missing_reference() {
    let file = model("cantilever.net");
    let out = cosserat(&["study", file.to_str().unwrap(), "--elements", "0", "--quantity", "buckling"]);
    assert_eq!(out.status.code(), Some(2));
    let out = cosserat(&["study", file.to_str().unwrap(), "--elements", "1,x", "--quantity", "buckling"]);
    assert_eq!(out.status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let out = cosserat(&[
        "study",
        model("microbridge.net").to_str().unwrap(),
        "--elements",
        "4",
        "--quantity",
        "modal-1",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(5));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = cosserat(&["run", model("cantilever.net").to_str().unwrap(), "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

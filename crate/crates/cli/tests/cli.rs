use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use cpz_core::document::{parse_set, serialize_set, CertificateDocument, VerdictDocument, VerdictStatus};
use cpz_core::encode::{verify_certificate, CertificateShape};
use cpz_core::fixtures::illustrative_example;
use cpz_core::ConPolyZonotope;
use nalgebra::{dmatrix, dvector};
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn cpz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cpz")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write_set(dir: &Path, name: &str, set: &ConPolyZonotope) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, serialize_set(set, None)).unwrap();
    path
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn forward_pair_is_proven() {
    let out = cpz(&["check", "--inner", p(&fixture("p1.json")), "--outer", p(&fixture("p2.json")), "--method", "cor1"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    let text = stdout(&out);
    assert!(text.starts_with("seed: 0\n"));
    assert!(text.contains("check: P1 ⊆ P2"));
    assert!(text.contains("status: proven"));
    assert!(text.contains("generator_bound"));
}

#[test]
fn falsification_turns_not_proven_into_exit_three() {
    let (inner, outer) = (fixture("p3.json"), fixture("p1.json"));
    let args = ["check", "--inner", p(&inner), "--outer", p(&outer), "--method", "cor1", "--restarts", "2"];
    let out = cpz(&args);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("status: not proven"));
    let mut with_falsify = args.to_vec();
    with_falsify.extend(["--falsify", "2000"]);
    let out = cpz(&with_falsify);
    assert_eq!(code(&out), 3);
    assert!(stdout(&out).contains("status: falsified"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&cpz(&["check", "--inner", "a.json"])), 1);
    assert_eq!(code(&cpz(&["check", "--bogus"])), 1);
    let out = cpz(&["check", "--inner", "missing.json", "--outer", "missing.json"]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.json"));
    assert_eq!(code(&cpz(&["--help"])), 0);
}

#[test]
fn malformed_documents_exit_one() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{\"c\": [0.0], \"G\": [[1.0, 2.0]], \"E\": [[1]]}").unwrap();
    let out = cpz(&["sample", "--set", p(&bad), "--count", "3", "--out", p(&dir.path().join("x.csv"))]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("error:"));
}

#[test]
fn dimension_mismatch_exits_one() {
    let dir = TempDir::new().unwrap();
    let line = ConPolyZonotope::zonotope(dvector![0.0], dmatrix![1.0]).unwrap();
    let line = write_set(dir.path(), "line.json", &line);
    let out = cpz(&["check", "--inner", p(&line), "--outer", p(&fixture("unit_square.json"))]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("dimension"));
}

#[test]
fn sample_writes_csv_points_of_the_set() {
    let dir = TempDir::new().unwrap();
    let csv_path = dir.path().join("points.csv");
    let out = cpz(&["sample", "--set", p(&fixture("illustrative.json")), "--count", "25", "--seed", "4", "--out", p(&csv_path)]);
    assert_eq!(code(&out), 0);
    let text = fs::read_to_string(&csv_path).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x1,x2"));
    let set = illustrative_example();
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 25);
    // Every point lies within the generator box of the set.
    let reach = set.generators.abs().column_sum();
    for row in rows {
        assert!(row.iter().zip(reach.iter()).all(|(x, r)| x.abs() <= r + 1e-12));
    }
}

#[test]
fn empty_set_sample_writes_only_the_header() {
    let dir = TempDir::new().unwrap();
    // lambda1 = 3 has no admissible solution.
    let set = ConPolyZonotope::new(dvector![0.0], dmatrix![1.0], dmatrix![1], dmatrix![1.0], dvector![3.0], dmatrix![1])
        .unwrap();
    let path = write_set(dir.path(), "empty.json", &set);
    let csv_path = dir.path().join("points.csv");
    let out = cpz(&["sample", "--set", p(&path), "--count", "5", "--out", p(&csv_path)]);
    assert_eq!(code(&out), 2);
    assert_eq!(fs::read_to_string(&csv_path).unwrap(), "x1\n");
}

#[test]
fn map_by_identity_and_projection() {
    let dir = TempDir::new().unwrap();
    let set_path = fixture("illustrative.json");
    let (set, _) = parse_set(&set_path).unwrap();

    let identity = dir.path().join("identity.json");
    fs::write(&identity, "[[1, 0], [0, 1]]").unwrap();
    let mapped = dir.path().join("mapped.json");
    assert_eq!(code(&cpz(&["map", "--matrix", p(&identity), "--set", p(&set_path), "--out", p(&mapped)])), 0);
    assert_eq!(fs::read_to_string(&mapped).unwrap(), fs::read_to_string(&set_path).unwrap());

    let projection = dir.path().join("projection.json");
    fs::write(&projection, "[[0, 1]]").unwrap();
    assert_eq!(code(&cpz(&["map", "--matrix", p(&projection), "--set", p(&set_path), "--out", p(&mapped)])), 0);
    let (image, _) = parse_set(&mapped).unwrap();
    assert_eq!(image.dim(), 1);
    assert_eq!(image.generators, set.generators.rows(1, 1).into_owned());
    assert_eq!(image.constraint_rhs, set.constraint_rhs);

    let wrong = dir.path().join("wrong.json");
    fs::write(&wrong, "[[1, 0, 0]]").unwrap();
    assert_eq!(code(&cpz(&["map", "--matrix", p(&wrong), "--set", p(&set_path), "--out", p(&mapped)])), 1);
}

#[test]
fn json_verdict_carries_a_certificate_that_verifies() {
    let dir = TempDir::new().unwrap();
    let json = dir.path().join("verdict.json");
    let (inner_path, outer_path) = (fixture("p1.json"), fixture("p3.json"));
    let out = cpz(&["check", "--inner", p(&inner_path), "--outer", p(&outer_path), "--method", "cor1", "--json", p(&json)]);
    assert_eq!(code(&out), 0);
    let doc: VerdictDocument = serde_json::from_str(&fs::read_to_string(&json).unwrap()).unwrap();
    assert_eq!(doc.status, VerdictStatus::Proven);
    assert_eq!((doc.inner.as_str(), doc.outer.as_str(), doc.method.as_str()), ("P1", "P3", "cor1"));
    assert!(doc.witness.is_none());
    let (inner, _) = parse_set(&inner_path).unwrap();
    let (outer, _) = parse_set(&outer_path).unwrap();
    let cert: CertificateDocument = doc.certificate.expect("a certificate");
    let cert = cert.to_certificate(&CertificateShape::of(&inner, &outer)).unwrap();
    assert!(cert.alpha().is_some());
    let report = verify_certificate(&inner, &outer, cert.base(), 1e-8, 1e-8).unwrap();
    assert!(report.passed());
}

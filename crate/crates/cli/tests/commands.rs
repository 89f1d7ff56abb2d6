use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_skewbound"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// Header plus data rows, split on commas.
fn csv_rows(out: &Output) -> (Vec<String>, Vec<Vec<String>>) {
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> String {
    let path = dir.path().join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn verify_n3_has_no_violations() {
    let out = run(&["verify", "--n", "3", "--m", "3", "--trials", "10000"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, rows) = csv_rows(&out);
    assert_eq!(header, ["trial", "lhs", "rhs", "ratio", "trace_lhs", "trace_err"]);
    assert_eq!(rows.len(), 10_000);
    let ratio = column(&header, "ratio");
    let max = rows.iter().map(|r| r[ratio].parse::<f64>().unwrap()).fold(0.0, f64::max);
    assert!(max < 1.0 / 3.0, "max ratio {max}");
    for (k, r) in rows.iter().enumerate() {
        assert_eq!(r[0], k.to_string());
    }
}

#[test]
fn verify_single_member_has_zero_lhs() {
    let out = run(&["verify", "--n", "4", "--m", "1", "--trials", "1000", "--seed", "9"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let (header, rows) = csv_rows(&out);
    let lhs = column(&header, "lhs");
    assert_eq!(rows.len(), 1000);
    assert!(rows.iter().all(|r| r[lhs].parse::<f64>().unwrap() == 0.0));
}

#[test]
fn verify_usage_errors() {
    for args in [
        &["verify", "--n", "2", "--m", "3"][..],
        &["verify", "--n", "3", "--m", "0"],
        &["verify", "--n", "3", "--m", "2", "--trials", "0"],
        &["verify", "--n", "17", "--m", "2"],
        &["verify", "--n", "3"],
        &["verify", "--n", "three", "--m", "2"],
    ] {
        assert_eq!(code(&run(args)), 2, "{args:?}");
    }
}

#[test]
fn verify_negative_tolerance_flags_violations() {
    // a slack of -1 puts the threshold below every ratio
    let out = run(&["verify", "--n", "3", "--m", "2", "--trials", "5", "--tolerance=-1"]);
    assert_eq!(code(&out), 1);
    assert!(stderr(&out).contains("violations: 5"));
    assert_eq!(code(&run(&["verify", "--n", "3", "--m", "2", "--tolerance", "NaN"])), 2);
}

#[test]
fn verify_is_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = run(&["verify", "--n", "5", "--m", "4", "--trials", "500", "--seed", "42", "--out", path.to_str().unwrap()]);
        assert_eq!(code(&out), 0);
        assert!(out.stdout.is_empty());
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let other = dir.path().join("c.csv");
    run(&["verify", "--n", "5", "--m", "4", "--trials", "500", "--seed", "43", "--out", other.to_str().unwrap()]);
    assert_ne!(fs::read(&a).unwrap(), fs::read(&other).unwrap());
}

#[test]
fn verify_floats_carry_seventeen_digits() {
    let out = run(&["verify", "--n", "3", "--m", "2", "--trials", "3"]);
    let (header, rows) = csv_rows(&out);
    let rhs = &rows[0][column(&header, "rhs")];
    let mantissa = rhs.split('e').next().unwrap().replace(['.', '-'], "");
    assert_eq!(mantissa.len(), 17, "{rhs}");
}

fn canonical_values(out: &Output, quantity: &str) -> Vec<f64> {
    let (header, rows) = csv_rows(out);
    let q = column(&header, "quantity");
    let v = column(&header, "value");
    rows.iter().filter(|r| r[q] == quantity).map(|r| r[v].parse().unwrap()).collect()
}

#[test]
fn canonical_two_by_two() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "a.json", "[[0, 2], [-2, 0]]");
    let out = run(&["canonical", &path]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(canonical_values(&out, "lambda"), [2.0]);
    assert!(canonical_values(&out, "residual")[0] < 1e-12);
    assert_eq!(canonical_values(&out, "p").len(), 4);
}

#[test]
fn canonical_three_by_three() {
    // the (1, 2, 2) matrix has -A² eigenvalues 9, 9, 0
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "a.json", "[[0, 1, 2], [-1, 0, 2], [-2, -2, 0]]");
    let out = run(&["canonical", &path]);
    assert_eq!(code(&out), 0);
    let lambdas = canonical_values(&out, "lambda");
    assert_eq!(lambdas.len(), 1);
    assert!((lambdas[0] - 3.0).abs() < 1e-12);
}

#[test]
fn canonical_tuple_file() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "t.json", "[[[0, 1], [-1, 0]], [[0, 0, 0, 5], [0, 0, 0, 0], [0, 0, 0, 0], [-5, 0, 0, 0]]]");
    let out = run(&["canonical", &path]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(canonical_values(&out, "lambda"), [1.0, 5.0, 0.0]);
    assert_eq!(canonical_values(&out, "residual").len(), 2);
}

#[test]
fn canonical_rejects_bad_input() {
    let dir = TempDir::new().unwrap();
    let not_skew = write(&dir, "s.json", "[[0, 1], [1, 0]]");
    let out = run(&["canonical", &not_skew]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("skew"));
    let ragged = write(&dir, "r.json", "[[0, 1], [-1]]");
    assert_eq!(code(&run(&["canonical", &ragged])), 2);
    let garbage = write(&dir, "g.json", "zero one");
    assert_eq!(code(&run(&["canonical", &garbage])), 2);
    assert_eq!(code(&run(&["canonical", "/nonexistent/matrix.json"])), 2);
}

fn summary_value(err: &str, key: &str) -> f64 {
    let line = err.lines().find(|l| l.trim_start().starts_with(key)).unwrap();
    line.split('=').nth(1).unwrap().split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn sharpness_reaches_the_bound() {
    for (n, m, d) in [("3", "3", 1.0 / 3.0), ("5", "4", 2.0 / 3.0)] {
        let out = run(&["sharpness", "--n", n, "--m", m]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
        let err = stderr(&out);
        assert!(summary_value(&err, "gap to d(n)") < 1e-3);
        assert!(err.contains("rounded optimum canonicalized"), "{err}");
        let (header, rows) = csv_rows(&out);
        assert_eq!(header, ["restart", "ratio", "best_so_far"]);
        assert_eq!(rows.len(), 32);
        let best: f64 = rows.last().unwrap()[2].parse().unwrap();
        assert!((best - d).abs() < 1e-3);
    }
}

#[test]
fn sharpness_warns_for_two_members() {
    let out = run(&["sharpness", "--n", "3", "--m", "2", "--restarts", "4"]);
    assert_eq!(code(&out), 0);
    assert!(stderr(&out).contains("warning"));
}

#[test]
fn sharpness_gap_tolerance_is_enforced() {
    // every gap is at least -1e-9, so a gap tolerance of -1 always fails
    let out = run(&["sharpness", "--n", "4", "--m", "3", "--restarts", "2", "--tolerance=-1"]);
    assert_eq!(code(&out), 1, "{}", stderr(&out));
}

#[test]
fn sharpness_usage_errors() {
    assert_eq!(code(&run(&["sharpness", "--n", "2", "--m", "3"])), 2);
    assert_eq!(code(&run(&["sharpness", "--n", "3", "--m", "3", "--restarts", "0"])), 2);
}

#[test]
fn sharpness_is_deterministic() {
    let a = run(&["sharpness", "--n", "4", "--m", "3", "--restarts", "6", "--seed", "3"]);
    let b = run(&["sharpness", "--n", "4", "--m", "3", "--restarts", "6", "--seed", "3"]);
    assert_eq!(a.stdout, b.stdout);
}

fn max_table_deviation(out: &Output) -> f64 {
    let (header, rows) = csv_rows(out);
    let t = column(&header, "table");
    let dev = column(&header, "deviation");
    rows.iter()
        .filter(|r| r[t] != "raw_integrand")
        .map(|r| r[dev].parse::<f64>().unwrap())
        .fold(0.0, f64::max)
}

#[test]
fn submersion_equality_models_match_tables() {
    for args in [&["--case", "case3"][..], &["--case", "case4", "--n", "5"], &["--case", "case4", "--n", "4", "--a", "0.25"]] {
        let mut full = vec!["submersion"];
        full.extend_from_slice(args);
        let out = run(&full);
        assert_eq!(code(&out), 0, "{args:?}: {}", stderr(&out));
        assert!(max_table_deviation(&out) < 1e-12);
    }
}

#[test]
fn submersion_case3_rows() {
    let out = run(&["submersion", "--case", "case3", "--a", "1"]);
    let (header, rows) = csv_rows(&out);
    assert_eq!(header, ["table", "i", "j", "value", "expected", "deviation"]);
    let ricci = rows.iter().find(|r| r[0] == "R_rs" && r[1] == "2" && r[2] == "2").unwrap();
    assert_eq!(ricci[3].parse::<f64>().unwrap(), 10.0);
    let tables: Vec<&str> = rows.iter().map(|r| r[0].as_str()).collect();
    for name in ["K_rs", "K_ir", "K_ij", "R_rs", "R_ij", "R_ir", "integrand", "raw_integrand"] {
        assert!(tables.contains(&name), "missing {name}");
    }
}

#[test]
fn submersion_hopf_curvatures() {
    let out = run(&["submersion", "--case", "hopf", "--a", "1"]);
    assert_eq!(code(&out), 0);
    let err = stderr(&out);
    assert!(err.contains("total space sectional curvature in [1, 1]"), "{err}");
    assert!(err.contains("base sectional curvature in [4, 4]"), "{err}");
    let out = run(&["submersion", "--case", "hopf-s3"]);
    assert_eq!(code(&out), 0);
    assert!(max_table_deviation(&out) < 1e-12);
}

#[test]
fn submersion_invalid_combinations() {
    for args in [
        &["submersion", "--case", "hopf", "--n", "5"][..],
        &["submersion", "--case", "case3", "--n", "4"],
        &["submersion", "--case", "case4", "--n", "3"],
        &["submersion", "--case", "case3", "--a", "-1"],
        &["submersion", "--case", "case3", "--a", "0"],
        &["submersion", "--case", "case5"],
    ] {
        assert_eq!(code(&run(args)), 2, "{args:?}");
    }
}

#[test]
fn out_file_receives_the_csv() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("s.csv");
    let out = run(&["submersion", "--case", "case3", "--out", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    assert!(fs::read_to_string(Path::new(&path)).unwrap().starts_with("table,i,j,value,expected,deviation\n"));
}

use std::path::PathBuf;

use assert_cmd::Command;
use serde_json::Value;

fn sardquad() -> Command {
    let mut cmd = Command::cargo_bin("sardquad").unwrap();
    cmd.env_remove("QUAD_PRECISION_BITS");
    cmd
}

fn golden(m: usize, n: u64) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/golden")
        .join(format!("m{m}_N{n}.json"))
}

fn stdout_of(args: &[&str]) -> String {
    let out = sardquad().args(args).assert().success();
    String::from_utf8(out.get_output().stdout.clone()).unwrap()
}

#[test]
fn weights_trapezoid() {
    let v: Value = serde_json::from_str(&stdout_of(&["weights", "--m", "1", "--N", "4"])).unwrap();
    assert_eq!(v["m"], 1);
    assert_eq!(v["N"], 4);
    assert_eq!(v["h"], "1/4");
    let w: Vec<&str> = v["weights"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap())
        .collect();
    assert_eq!(w, ["0.125", "0.25", "0.25", "0.25", "0.125"]);
    assert_eq!(v["d"].as_array().unwrap().len(), 0);
}

#[test]
fn weights_match_golden() {
    let v: Value = serde_json::from_str(&stdout_of(&["weights", "--m", "2", "--N", "5"])).unwrap();
    let w = v["weights"].as_array().unwrap();
    let g: Value = serde_json::from_str(&std::fs::read_to_string(golden(2, 5)).unwrap()).unwrap();
    for (x, exact) in w.iter().zip(g["weights"].as_array().unwrap()) {
        let x: f64 = x.as_str().unwrap().parse().unwrap();
        let (a, b) = exact.as_str().unwrap().split_once('/').unwrap();
        let exact = a.parse::<f64>().unwrap() / b.parse::<f64>().unwrap();
        assert!((x - exact).abs() < 1e-15);
    }
    assert_eq!(v["roots"].as_array().unwrap().len(), 1);
    assert!(v["roots"][0]
        .as_str()
        .unwrap()
        .starts_with("-0.26794919243112270647"));
}

#[test]
fn invalid_m_exits_2() {
    let out = sardquad()
        .args(["weights", "--m", "0", "--N", "4"])
        .assert()
        .code(2);
    assert!(String::from_utf8_lossy(&out.get_output().stderr).contains("m must be ≥ 1"));
    sardquad()
        .args(["weights", "--m", "5", "--N", "4"])
        .assert()
        .code(2);
    sardquad()
        .args(["weights", "--m", "2", "--N", "4", "--precision", "32"])
        .assert()
        .code(2);
}

#[test]
fn validate_passes() {
    let v: Value = serde_json::from_str(&stdout_of(&["validate", "--m", "1", "--N", "8"])).unwrap();
    assert_eq!(v["pass"], true);
    for r in v["moment_residuals"].as_array().unwrap() {
        assert!(r.as_str().unwrap().parse::<f64>().unwrap() <= 1e-12);
    }
    assert_eq!(v["inverse_residual"], "0");

    let v: Value =
        serde_json::from_str(&stdout_of(&["validate", "--m", "3", "--N", "30"])).unwrap();
    assert!(
        v["oracle_deviation"]
            .as_str()
            .unwrap()
            .parse::<f64>()
            .unwrap()
            < 1e-10
    );
    assert_eq!(v["operator_moment_residuals"].as_array().unwrap().len(), 13);
}

#[test]
fn validate_without_enough_nodes_reports_null_optimality() {
    let v: Value = serde_json::from_str(&stdout_of(&["validate", "--m", "3", "--N", "4"])).unwrap();
    assert!(v["optimality_residual"].is_null());
    assert_eq!(v["pass"], true);
}

#[test]
fn validate_against_golden_and_tampered_golden() {
    let path = golden(3, 12);
    sardquad()
        .args(["validate", "--m", "3", "--N", "12", "--golden"])
        .arg(&path)
        .assert()
        .success();

    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    let mut g: Value = serde_json::from_str(&text).unwrap();
    let w = g["weights"][3].as_str().unwrap().to_string();
    let (num, den) = w.split_once('/').unwrap();
    let bumped: i128 = num.parse::<i128>().unwrap() + 1;
    g["weights"][3] = Value::String(format!("{bumped}/{den}"));
    let tampered = dir.path().join("tampered.json");
    std::fs::write(&tampered, serde_json::to_string(&g).unwrap()).unwrap();
    let report = dir.path().join("report.json");
    sardquad()
        .args(["validate", "--m", "3", "--N", "12", "--golden"])
        .arg(&tampered)
        .arg("--output")
        .arg(&report)
        .assert()
        .code(1);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["pass"], false);
    assert_eq!(v["oracle_source"], "golden");

    let garbage = dir.path().join("garbage.json");
    std::fs::write(&garbage, "{not json").unwrap();
    sardquad()
        .args(["validate", "--m", "3", "--N", "12", "--golden"])
        .arg(&garbage)
        .assert()
        .code(1);
}

#[test]
fn converge_csv() {
    let out = stdout_of(&["converge", "--m", "1", "--f", "exp", "--Ns", "4,8,16,32"]);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "N,error,observed_order");
    assert_eq!(lines.len(), 5);
    let last_order: f64 = lines[4].split(',').nth(2).unwrap().parse().unwrap();
    assert!((last_order - 2.0).abs() < 0.1);

    let out = stdout_of(&["converge", "--m", "2", "--f", "poly1", "--Ns", "4,8"]);
    for line in out.lines().skip(1) {
        let err: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(err < 1e-12);
    }
}

#[test]
fn converge_unknown_integrand_exits_2() {
    sardquad()
        .args(["converge", "--m", "2", "--f", "unknown"])
        .assert()
        .code(2);
}

#[test]
fn ef_listing() {
    assert_eq!(stdout_of(&["ef", "--k", "1"]), "1 1\n");
    assert_eq!(stdout_of(&["ef", "--k", "3"]), "1 11 11 1\n");
    let out = stdout_of(&["ef", "--k", "2"]);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("1 4 1"));
    assert!(lines.next().unwrap().starts_with("-0.2679491924"));
    sardquad().args(["ef", "--k", "41"]).assert().code(2);
}

#[test]
fn operator_report() {
    let v: Value = serde_json::from_str(&stdout_of(&[
        "operator", "--m", "1", "--N", "4", "--window", "2",
    ]))
    .unwrap();
    let s: Vec<&str> = v["stencil"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_str().unwrap())
        .collect();
    assert_eq!(s, ["0", "16", "-32", "16", "0"]);
    assert_eq!(v["moments"].as_array().unwrap().len(), 5);
    assert_eq!(v["moments"][2]["expected"], "2");
}

#[test]
fn output_is_deterministic_and_atomic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    for p in [&a, &b] {
        sardquad()
            .args(["weights", "--m", "4", "--N", "17", "--output"])
            .arg(p)
            .assert()
            .success()
            .stdout("");
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    let leftovers: Vec<_> = std::fs::read_dir(dir.path()).unwrap().collect();
    assert_eq!(leftovers.len(), 2);
}

#[test]
fn precision_from_environment() {
    let low = sardquad()
        .env("QUAD_PRECISION_BITS", "64")
        .args(["weights", "--m", "3", "--N", "9"])
        .assert()
        .success();
    let high = stdout_of(&["weights", "--m", "3", "--N", "9"]);
    assert_ne!(
        String::from_utf8(low.get_output().stdout.clone()).unwrap(),
        high
    );
    sardquad()
        .env("QUAD_PRECISION_BITS", "8000")
        .args(["weights", "--m", "3", "--N", "9"])
        .assert()
        .code(2);
}

#[test]
fn oracle_subcommand_matches_golden() {
    let out = stdout_of(&["oracle", "--m", "2", "--N", "5"]);
    assert_eq!(out, std::fs::read_to_string(golden(2, 5)).unwrap());
}

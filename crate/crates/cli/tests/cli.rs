use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const CONFIG: &str = r#"{
  "problem": {"kind": "quadratic-scsc", "params": {"n": 6, "d": 2, "mu": 1, "L": 3}, "seed": 7},
  "solver": "SEG",
  "sampling": "RR",
  "schedule": {"rule": "theorem-constant", "regime": "strongly-monotone"},
  "K": 4,
  "seeds": [1, 2]
}"#;

fn segrr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_segrr"))
        .args(args)
        .output()
        .unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn generate_writes_problem_json() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", CONFIG);
    let out = segrr(&["generate", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let p = segrr::FiniteSumProblem::from_json(&stdout(&out)).unwrap();
    assert_eq!((p.n(), p.dim()), (6, 4));
}

#[test]
fn bench_and_solve_emit_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", CONFIG);
    let out_path = dir.path().join("b.csv");
    let out = segrr(&[
        "bench",
        "--config",
        &cfg,
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rec = segrr::harness::parse_csv(&fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(rec.rows.len(), 5);
    assert_eq!(rec.nruns(), 2);

    let out = segrr(&["solve", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let rec = segrr::harness::parse_csv(&stdout(&out)).unwrap();
    assert_eq!(rec.nruns(), 1);
}

#[test]
fn overrides_replace_config_values() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", CONFIG);
    let out = segrr(&[
        "bench", "--config", &cfg, "--seeds", "3,4,5", "--epochs", "9",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rec = segrr::harness::parse_csv(&stdout(&out)).unwrap();
    assert_eq!(rec.rows.len(), 10);
    assert_eq!(rec.nruns(), 3);
    let out = segrr(&["bench", "--config", &cfg, "--seeds", "3,3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        &CONFIG.replace("\"K\": 4", "\"K\": 4, \"bogus\": 1"),
    );
    let out = segrr(&["bench", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus"));
    let cfg = write(dir.path(), "d.json", "{ not json");
    assert_eq!(segrr(&["solve", "--config", &cfg]).status.code(), Some(2));
}

#[test]
fn missing_file_exits_1() {
    assert_eq!(
        segrr(&["bench", "--config", "/nonexistent/c.json"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn all_diverged_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{
      "problem": {"kind": "bilinear", "params": {"n": 4, "d": 2, "lambda_min_plus": 1, "L_max": 2}, "seed": 1},
      "solver": "SGDA",
      "sampling": "Uniform",
      "schedule": {"rule": "constant", "gamma1": 10.0},
      "K": 500,
      "seeds": [1, 2]
    }"#;
    let cfg = write(dir.path(), "c.json", text);
    let out = segrr(&["bench", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn stepsize_prints_pair() {
    let out = segrr(&[
        "stepsize", "--regime", "monotone", "--n", "10", "--l-max", "1",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let vals: Vec<f64> = text
        .lines()
        .map(|l| l.split(' ').nth(1).unwrap().parse().unwrap())
        .collect();
    let expected = 1.0 / (3.0 * 2f64.sqrt() * 10.0);
    assert!((vals[0] - expected).abs() <= 1e-15 * expected);
    assert_eq!(vals[1], 2.0 * vals[0]);
    let out = segrr(&[
        "stepsize", "--regime", "affine", "--n", "10", "--l-max", "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_passes() {
    let out = segrr(&["verify"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out)
            .lines()
            .filter(|l| l.starts_with("PASS"))
            .count(),
        5
    );
}

use std::path::Path;
use std::process::{Command, Output};

fn sdeot(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sdeot"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn last_field(csv: &str, column: &str) -> f64 {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == column).unwrap();
    lines
        .last()
        .unwrap()
        .split(',')
        .nth(k)
        .unwrap()
        .parse()
        .unwrap()
}

#[test]
fn sweep_writes_csv_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("gauss.csv");
    let o = sdeot(&[
        "sweep",
        "fig1a_gaussian",
        "--eta",
        "64,256,1024",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(
        text.starts_with("eta,cost,w2_squared,suboptimality,suboptimality_scaled"),
        "{text}"
    );
    assert_eq!(text.lines().count(), 4);
    let scaled = last_field(&text, "suboptimality_scaled");
    assert!((scaled - 0.164058).abs() < 1e-3, "{scaled}");
    assert!(String::from_utf8_lossy(&o.stderr).contains("fitted rate"));
}

#[test]
fn sweep_is_deterministic() {
    let args = ["sweep", "uniform_asymmetric", "--eta", "4,16"];
    let a = sdeot(&args);
    let b = sdeot(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn predict_reports_constant() {
    let o = sdeot(&["predict", "fig1b_laplace"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let c = v["subopt_constant"].as_f64().unwrap();
    assert!((c - 0.205617).abs() < 1e-6, "{c}");
}

#[test]
fn identities_pass() {
    let o = sdeot(&["verify-identities"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");
}

#[test]
fn solve_and_case_study_run() {
    let o = sdeot(&["solve", "uniform_asymmetric", "--eta", "8"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("W2^2"));
    let o = sdeot(&["case-study", "uniform_symmetric", "--eta", "1024"]);
    assert_eq!(code(&o), 0);
    let scaled = last_field(&stdout(&o), "suboptimality_scaled");
    assert!(
        (scaled - std::f64::consts::PI.powi(2) / 48.0).abs() < 1e-3,
        "{scaled}"
    );
    let o = sdeot(&["case-study", "uniform_asymmetric"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn oracle_compare_agrees() {
    let o = sdeot(&[
        "oracle-compare",
        "uniform_asymmetric",
        "--eta",
        "8",
        "--grid",
        "500",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(last_field(&stdout(&o), "cost_rel_diff") < 1e-3);
}

#[test]
fn invalid_scenarios_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"name": "bad", "density": {"family": "gaussian", "mean": 0.0, "sigma": 1.0},
            "atoms": {"positions": [-1.0, 1.0], "weights": [0.3, 0.3]}, "eta": [1.0]}"#,
    )
    .unwrap();
    let o = sdeot(&["sweep", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("atoms.weights"));
    assert_eq!(code(&sdeot(&["sweep", "no_such_scenario"])), 1);
    assert_eq!(
        code(&sdeot(&["sweep", "fig1a_gaussian", "--eta", "4,2"])),
        1
    );
    assert!(!Path::new("no_such_scenario").exists());
}

#[test]
fn solver_failure_exits_with_two() {
    let o = sdeot(&[
        "sweep",
        "uniform_asymmetric",
        "--eta",
        "8",
        "--tol",
        "1e-300",
        "--max-iter",
        "3",
    ]);
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stderr));
}

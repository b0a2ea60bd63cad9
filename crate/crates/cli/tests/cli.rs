use std::path::PathBuf;
use std::process::{Command, Output};

use qubolin_core::model::import_lp;

fn qubolin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qubolin"))
        .args(args)
        .env_remove("QUBOLIN_JOBS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn temp_path(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("qubolin-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

#[test]
fn solve_lp_prints_value() {
    let o = qubolin(&["solve-lp", "--model", "GW", "--instance", "ex8"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o), "1.0\n");
}

#[test]
fn verify_reports_witness() {
    let o = qubolin(&["verify", "--model", "DW(*,b)", "--instance", "ex3", "--allow-invalid"]);
    assert_eq!(o.status.code(), Some(1));
    let out = stdout(&o);
    assert!(out.contains("verdict INVALID_WITNESS"), "{out}");
    assert!(out.contains("model 2 vs true 1"), "{out}");
}

#[test]
fn verify_confirms_valid_model() {
    let o = qubolin(&["verify", "--model", "ORPK", "--instance", "ex2"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("verdict VALID_CONFIRMED"));
}

#[test]
fn invalid_model_needs_flag() {
    let o = qubolin(&["verify", "--model", "DW(*,b)", "--instance", "ex3"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--allow-invalid"));
}

#[test]
fn usage_errors_name_the_flag() {
    let o = qubolin(&["build", "--model", "XY", "--instance", "ex2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--model"));

    let o = qubolin(&["build", "--model", "GW", "--instance", "no-such-file"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--instance"));

    let o = qubolin(&["solve-lp", "--model", "GW"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--instance"));

    let o = qubolin(&["suite", "--only", "11"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn jobs_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_qubolin"))
        .args(["compare", "--instance", "ex1", "--model", "GW"])
        .env("QUBOLIN_JOBS", "0")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--jobs"));
}

#[test]
fn single_variable_export_has_no_rows() {
    let path = temp_path("n1.qubo");
    std::fs::write(&path, "QUBO 1\nc 4\n").unwrap();
    let p = path.to_str().unwrap();
    let o = qubolin(&["build", "--model", "PK", "--instance", p]);
    assert!(stdout(&o).contains("general_constraints 0"));
    let o = qubolin(&["export", "--model", "PK", "--instance", p, "--format", "lp"]);
    assert_eq!(o.status.code(), Some(0));
    let m = import_lp(&stdout(&o)).unwrap();
    assert_eq!(m.num_rows(), 0);
    assert_eq!(m.num_vars(), 1);
}

#[test]
fn mps_export_to_file() {
    let path = temp_path("gw-ex8.mps");
    let o = qubolin(&["export", "--model", "GW", "--instance", "ex8", "--format", "mps", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    let m = qubolin_core::model::import_mps(&text).unwrap();
    assert!((qubolin_core::solve_lp(&m).unwrap().objective - 1.0).abs() < 1e-9);
}

#[test]
fn generate_and_parse_round_trip() {
    let path = temp_path("gen.txt");
    let o = qubolin(&["generate", "--n", "6", "--seed", "3", "--format", "orlib", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let parsed = qubolin(&["parse", "--instance", path.to_str().unwrap()]);
    let direct = qubolin(&["generate", "--n", "6", "--seed", "3"]);
    assert_eq!(stdout(&parsed), stdout(&direct));
    assert!(stdout(&direct).starts_with("QUBO 6\n"));
}

#[test]
fn oracle_prints_optimum() {
    let o = qubolin(&["oracle", "--instance", "ex2"]);
    assert_eq!(stdout(&o), "optimum 6\nargmax 0110\n");
}

#[test]
fn forced_stop_reports_stale_objective() {
    let o = qubolin(&[
        "solve-milp", "--model", "ORDW", "--instance", "ex1", "--mip-start", "11", "--first-incumbent", "--progress",
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stderr(&o).starts_with("event=incumbent node=0 objective=0 recomputed=2"));
    let out = stdout(&o);
    assert!(out.contains("objective 0.0\nrecomputed 2\nx 11\n"), "{out}");
}

#[test]
fn compare_is_deterministic() {
    let args = ["compare", "--instance", "ex2,ex6b", "--random", "2", "--model", "GW,ORPK(a,b),FT(*,g,t)"];
    let a = qubolin(&args);
    let mut with_jobs = args.to_vec();
    with_jobs.extend(["--jobs", "3"]);
    let b = qubolin(&with_jobs);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert_eq!(text.lines().count(), 1 + 4 * 3);
    assert!(text.lines().skip(1).all(|l| l.contains(",OPTIMAL,")));
}

#[test]
fn compare_jsonl() {
    let o = qubolin(&["compare", "--instance", "ex8", "--model", "GW,DW", "--format", "jsonl"]);
    let lines: Vec<String> = stdout(&o).lines().map(String::from).collect();
    assert_eq!(lines.len(), 2);
    assert!(lines[1].contains("\"lp_value\":1.5"));
}

#[test]
fn suite_subset_passes() {
    let o = qubolin(&["suite", "--quick", "--only", "7,8,10"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let out = stdout(&o);
    assert!(out.contains("criterion  7 PASS"));
    assert!(out.contains("criterion 10 NOT REPRODUCED"));
    assert!(out.ends_with("3 criteria, 0 failed\n"));
}

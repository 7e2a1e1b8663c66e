use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const DISK: &str = r#"{"kind":"disk","r":1}"#;
const ELLIPSE: &str = r#"{"kind":"ellipse","a":2,"b":1}"#;

fn ptorsion(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptorsion")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&o.stdout)))
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn solve_writes_the_solution_and_its_record() {
    let dir = tempfile::tempdir().unwrap();
    let domain = dir.path().join("disk.json");
    std::fs::write(&domain, DISK).unwrap();
    let out = dir.path().join("run");
    let o = ptorsion(&["solve", "--domain", path(&domain), "--p", "1.5", "--h", "0.05", "--out", path(&out)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("u.csv")).unwrap();
    assert!(csv.starts_with("x,y,u\n"));
    let record: Value = serde_json::from_str(&std::fs::read_to_string(out.join("solve.json")).unwrap()).unwrap();
    assert!((record["u_max"].as_f64().unwrap() - 1.0 / 12.0).abs() < 1e-3);
    assert_eq!(record["solve"]["config"]["p"], 1.5);
    assert_eq!(stdout_json(&o)["u_max"], record["u_max"]);
}

#[test]
fn out_of_range_p_is_a_config_error() {
    let o = ptorsion(&["solve", "--domain", DISK, "--p", "3.0", "--h", "0.05"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("p must be in (1,2]"), "{}", stderr(&o));
}

#[test]
fn missing_and_malformed_inputs_are_config_errors() {
    for args in [
        &["solve", "--p", "1.5", "--h", "0.1"][..],
        &["solve", "--domain", DISK, "--p", "1.5"],
        &["solve", "--domain", DISK, "--p", "1.5", "--h", "-0.1"],
        &["solve", "--domain", r#"{"kind":"square","s":1}"#, "--p", "1.5", "--h", "0.1"],
        &["solve", "--domain", "/nonexistent/domain.json", "--p", "1.5", "--h", "0.1"],
        &["solve", "--domain", DISK, "--p", "1.5", "--h", "5"],
        &["deficit", "--domain", DISK, "--p", "1.5", "--h", "0.1", "--delta-crit", "0"],
        &["frobnicate"],
    ] {
        let o = ptorsion(args);
        assert_eq!(code(&o), 1, "{args:?}: {}", stderr(&o));
        assert!(!stderr(&o).is_empty());
    }
}

#[test]
fn solver_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = ptorsion(&[
        "solve", "--domain", DISK, "--p", "1.5", "--h", "0.1", "--solver", r#"{"max_iter":1}"#, "--out",
        path(dir.path()),
    ]);
    assert_eq!(code(&o), 2, "{}", stderr(&o));
    assert!(stderr(&o).contains("iteration limit"));
}

#[test]
fn solve_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = ptorsion(&["solve", "--domain", ELLIPSE, "--p", "2", "--h", "0.05", "--out", path(&out)]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        stdout_json(&o)["u_max"].as_f64().unwrap()
    };
    let (a, b) = (run("a"), run("b"));
    assert!((a - b).abs() <= 1e-12, "{a} vs {b}");
}

#[test]
fn oracle_values() {
    let o = ptorsion(&["oracle", "ball", "--p", "1.5", "--n", "2", "--r", "1"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert!((v["u_center"].as_f64().unwrap() - 1.0 / 12.0).abs() < 1e-14);
    assert!((v["grad_boundary"].as_f64().unwrap() - 0.25).abs() < 1e-14);

    let o = ptorsion(&["oracle", "annulus", "--p", "2", "--n", "2", "--r1", "1", "--r2", "2"]);
    assert_eq!(code(&o), 0);
    let rbar = stdout_json(&o)["rbar"].as_f64().unwrap();
    assert!((rbar - 1.4710685).abs() < 1e-6, "{rbar}");

    assert_eq!(code(&ptorsion(&["oracle", "ball", "--p", "1", "--n", "2", "--r", "1"])), 1);
    assert_eq!(code(&ptorsion(&["oracle", "cube", "--p", "1.5"])), 1);
}

#[test]
fn deficit_on_the_disk_is_within_tolerance() {
    let o = ptorsion(&["deficit", "--domain", DISK, "--p", "1.5", "--h", "0.05"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let r = stdout_json(&o);
    assert!(r["I_p"].as_f64().unwrap() <= r["tol_deficit"].as_f64().unwrap());
    assert_eq!(r["status"], "ok");
}

#[test]
fn deficit_from_csv_matches_the_one_shot_run() {
    let dir = tempfile::tempdir().unwrap();
    let run = dir.path().join("run");
    let o = ptorsion(&["solve", "--domain", ELLIPSE, "--p", "1.5", "--h", "0.05", "--out", path(&run)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let csv = run.join("u.csv");
    let o = ptorsion(&[
        "deficit", "--domain", ELLIPSE, "--p", "1.5", "--h", "0.05", "--solution", path(&csv), "--out", path(&run),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let from_csv = stdout_json(&o);
    assert!(run.join("report.json").exists());
    let direct = stdout_json(&ptorsion(&["deficit", "--domain", ELLIPSE, "--p", "1.5", "--h", "0.05"]));
    assert_eq!(from_csv["I_p"], direct["I_p"]);
    assert_eq!(from_csv["bound_iii"], direct["bound_iii"]);
    assert!(from_csv["I_p"].as_f64().unwrap() > 0.0);
    assert!(from_csv["chain"].as_object().unwrap().values().all(|b| b == true));
}

#[test]
fn corrupted_csv_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("u.csv");
    std::fs::write(&csv, "x,y,u\n1,0,0\n0.5,zz,0.1\n").unwrap();
    let o = ptorsion(&["deficit", "--domain", DISK, "--p", "1.5", "--h", "0.1", "--solution", path(&csv)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn csv_for_another_mesh_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = ptorsion(&["solve", "--domain", DISK, "--p", "2", "--h", "0.1", "--out", path(dir.path())]);
    assert_eq!(code(&o), 0);
    let csv = dir.path().join("u.csv");
    let o = ptorsion(&["deficit", "--domain", DISK, "--p", "2", "--h", "0.05", "--solution", path(&csv)]);
    assert_eq!(code(&o), 1, "{}", stderr(&o));
}

fn read_csv(p: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(p).unwrap().lines().skip(1).map(|l| l.split(',').map(str::to_owned).collect()).collect()
}

#[test]
fn eccentricity_sweep_is_monotone() {
    let dir = tempfile::tempdir().unwrap();
    let o = ptorsion(&[
        "sweep", "eccentricity", "--p", "1.5", "--h", "0.05", "--values", "0,0.2,0.4,0.6", "--out", path(dir.path()),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = read_csv(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 4);
    let i_p: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(i_p.windows(2).all(|w| w[1] >= w[0]), "{i_p:?}");
    assert_eq!(stdout_json(&o)["monotone"]["I_p"], true);
    assert!(stderr(&o).contains("monotone in eccentricity"));
    for i in 0..4 {
        assert!(dir.path().join(format!("point_{i:02}.json")).exists());
    }
}

#[test]
fn p_sweep_on_the_disk_stays_within_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let o = ptorsion(&[
        "sweep", "p", "--domain", DISK, "--h", "0.05", "--from", "1.25", "--to", "2", "--steps", "4", "--out",
        path(dir.path()),
    ]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let rows = read_csv(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 4);
    for r in rows {
        let (i_p, tol): (f64, f64) = (r[1].parse().unwrap(), r[4].parse().unwrap());
        assert!(i_p <= tol, "{r:?}");
    }
}

#[test]
fn empty_sweep_range_is_a_config_error() {
    let o = ptorsion(&["sweep", "p", "--domain", DISK, "--h", "0.1", "--from", "1.5", "--to", "2", "--steps", "0"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("empty"));
}

#[test]
fn sweep_with_a_failed_point_finishes_and_exits_four() {
    let dir = tempfile::tempdir().unwrap();
    let o = ptorsion(&[
        "sweep", "p", "--domain", DISK, "--h", "0.1", "--values", "1.5,2", "--solver", r#"{"max_iter":1}"#, "--out",
        path(dir.path()),
    ]);
    assert_eq!(code(&o), 4, "{}", stderr(&o));
    let rows = read_csv(&dir.path().join("sweep.csv"));
    assert_eq!(rows.len(), 2);
    assert!(rows[0][1].is_empty() && !rows[0][7].is_empty());
    assert!(!rows[1][1].is_empty());
}

#[test]
fn thread_override_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["sweep", "p", "--domain", DISK, "--h", "0.1", "--values", "2", "--out", path(dir.path())];
    let run = |threads: &str| {
        Command::new(env!("CARGO_BIN_EXE_ptorsion")).args(args).env("PTORSION_THREADS", threads).output().unwrap()
    };
    assert_eq!(code(&run("2")), 0);
    assert_eq!(code(&run("many")), 1);
}

#[test]
fn report_checks_the_schema_and_the_chain() {
    let dir = tempfile::tempdir().unwrap();
    let o = ptorsion(&["deficit", "--domain", DISK, "--p", "2", "--h", "0.1", "--out", path(dir.path())]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let good = dir.path().join("report.json");

    let o = ptorsion(&["report", path(&good)]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(stdout_json(&o)[0]["chain_holds"], true);
    assert_eq!(code(&ptorsion(&["report", "--format", "text", path(&good)])), 0);

    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(&good).unwrap()).unwrap();
    v["chain"]["deficit_le_bound_iii"] = Value::Bool(false);
    let broken = dir.path().join("broken.json");
    std::fs::write(&broken, v.to_string()).unwrap();
    assert_eq!(code(&ptorsion(&["report", path(&good), path(&broken)])), 3);

    v.as_object_mut().unwrap().remove("H0");
    let partial = dir.path().join("partial.json");
    std::fs::write(&partial, v.to_string()).unwrap();
    let o = ptorsion(&["report", path(&partial)]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("H0"));
}

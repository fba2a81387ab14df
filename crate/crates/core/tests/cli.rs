//! End-to-end tests of the `matsec` binary.

use std::path::Path;
use std::process::{Command, Output};

fn matsec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_matsec"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn opt_prints_basis_and_weight() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "m.txt", "uniform 4 2\n");
    let wts = write(dir.path(), "w.txt", "0 10\n1 7\n2 5\n3 1\n");
    let out = matsec(&["opt", "--instance", &inst, "--weights", &wts]);
    assert!(out.status.success());
    assert_eq!(stdout(&out), "elements=0 1\nweight=17\n");
}

#[test]
fn opt_on_empty_weights_reports_no_elements() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "m.txt", "uniform 4 2\n");
    let wts = write(dir.path(), "w.txt", "");
    let out = matsec(&["opt", "--instance", &inst, "--weights", &wts]);
    assert_eq!(out.status.code(), Some(5));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no elements"));
}

#[test]
fn zero_trials_print_header_and_no_trials() {
    let out = matsec(&["run", "--family", "uniform", "--n", "5", "--k", "2", "--seed", "1", "--trials", "0"]);
    assert!(out.status.success());
    assert_eq!(stdout(&out).lines().count(), 1);
    assert_eq!(String::from_utf8_lossy(&out.stderr), "no trials\n");
}

#[test]
fn flags_override_the_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let conf = write(dir.path(), "c.conf", "family = graphic\nn = 30\nvertices = 12\nseed = 3\ntrials = 50\n");
    let csv = dir.path().join("out.csv");
    let out = matsec(&["run", "--config", &conf, "--trials", "7", "--output", csv.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 8);
    assert!(stdout(&out).contains("trials=7"));
}

#[test]
fn same_seed_same_bytes() {
    let args = ["run", "--family", "laminar", "--n", "40", "--k", "5", "--seed", "9", "--trials", "300", "--order", "worst-of-3"];
    let a = matsec(&args);
    let b = matsec(&[&args[..], &["--workers", "1"]].concat());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn configuration_errors_exit_with_two() {
    for args in [
        vec!["run", "--family", "uniform", "--n", "5", "--k", "2"],
        vec!["run", "--family", "uniform", "--n", "5", "--k", "2", "--seed", "1", "--algorithm", "classical-baseline", "--order", "decreasing"],
        vec!["verify", "--family", "uniform", "--n", "40", "--k", "2", "--seed", "1"],
    ] {
        assert_eq!(matsec(&args).status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn axiom_check_reports_pass() {
    let out = matsec(&["verify", "--axioms", "--family", "transversal", "--n", "9", "--left", "4", "--degree", "2", "--seed", "2"]);
    assert!(out.status.success());
    assert!(stdout(&out).contains("pass=true"));
}

#[test]
fn exact_verification_passes_on_a_partition_matroid() {
    let out = matsec(&["verify", "--family", "partition", "--n", "10", "--blocks", "3", "--k", "2", "--seed", "5", "--weights", "exponential-spread", "--order", "decreasing"]);
    assert!(out.status.success(), "{}", stdout(&out));
    let csv = stdout(&out);
    assert!(csv.lines().skip(1).all(|l| l.ends_with(",true")));
}

/// A free matroid whose heavy element sits alone in class 7: the per-element
/// `τ ≥ 1` bound and the class total fail there, and verify says so.
#[test]
fn exact_verification_reports_the_clipped_first_bucket_failure() {
    let dir = tempfile::tempdir().unwrap();
    let inst = write(dir.path(), "m.txt", "uniform 2 2\n");
    let wts = write(dir.path(), "w.txt", "0 1\n1 0.01\n");
    let out = matsec(&["verify", "--instance", &inst, "--weights", &wts, "--seed", "1", "--order", "increasing"]);
    assert_eq!(out.status.code(), Some(6));
    let failing: Vec<String> = stdout(&out)
        .lines()
        .filter(|l| l.ends_with(",false"))
        .map(|l| l.split(',').next().unwrap().to_string())
        .collect();
    assert_eq!(failing, ["element-tau-positive", "class-total"]);
}

#[test]
fn monte_carlo_verification_passes() {
    let out = matsec(&["verify", "--monte-carlo", "--family", "uniform", "--n", "60", "--k", "6", "--seed", "4", "--trials", "20000"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

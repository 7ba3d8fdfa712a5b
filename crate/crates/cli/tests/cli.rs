use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn hopetree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hopetree"))
        .args(args)
        .output()
        .expect("spawn hopetree")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("spec.toml");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SMALL: &str = "protocol = \"gaussian_sweep\"\nm = 20\nn = 40\nk_range = [2, 4]\n";

#[test]
fn run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL);
    let out_dir = dir.path().join("out");
    let out = hopetree(&["run", "--config", &config, "--trials", "4", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    let trials = fs::read_to_string(out_dir.join("trials.csv")).unwrap();
    assert_eq!(trials.lines().count(), 1 + 5 * 2 * 4);
    assert!(trials.starts_with("algorithm,protocol,m,n,k,phi,trial,seed,exact,srer_db,wall_ms,candidates\n"));
    assert!(out_dir.join("summary.csv").exists());
    assert!(out_dir.join("metadata.toml").exists());
    assert!(out_dir.join("plots/exact_recovery__gsra.dat").exists());
}

fn strip_wall(csv: &str, col: usize) -> Vec<String> {
    csv.lines()
        .map(|l| {
            let mut f: Vec<&str> = l.split(',').collect();
            f.remove(col);
            f.join(",")
        })
        .collect()
}

#[test]
fn reruns_are_byte_stable_apart_from_timing() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), SMALL);
    let mut runs = Vec::new();
    for name in ["a", "b"] {
        let out_dir = dir.path().join(name);
        let out = hopetree(&["run", "--config", &config, "--trials", "6", "--seed", "9", "--out", out_dir.to_str().unwrap()]);
        assert!(out.status.success());
        runs.push(fs::read_to_string(out_dir.join("trials.csv")).unwrap());
    }
    assert_eq!(strip_wall(&runs[0], 10), strip_wall(&runs[1], 10));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), "protocol = \"gaussian_sweep\"\nnot_a_key = 1\n");
    let out = hopetree(&["run", "--config", &config]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not_a_key"));

    let out = hopetree(&["run", "--config", "/nonexistent/spec.toml"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn oracle_check_reports_and_passes_attainable_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(dir.path(), &format!("{SMALL}[oracle]\ntrials = 50\nmin_agreement = 0.5\n"));
    let out = hopetree(&["oracle-check", "--config", &config]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(stdout.contains("PASS") && stdout.contains("/50"), "{stdout}");
}

#[test]
fn oracle_check_failure_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    // Unreachable agreement threshold.
    let config = write_config(dir.path(), &format!("{SMALL}[oracle]\ntrials = 10\nmin_agreement = 1.5\n"));
    let out = hopetree(&["oracle-check", "--config", &config]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn srer_mean_mode_flag_is_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "protocol = \"noisy_srer\"\nn = 60\nk_range = [3]\n[noise]\nsampling_rates = [0.5]\nmatrices = 1\nsignals_per_matrix = 4\n[gsra]\nsearch_depth = 3\n",
    );
    let out_dir = dir.path().join("n");
    let out = hopetree(&["run", "--config", &config, "--srer-mean-mode", "db", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    let row = summary.lines().nth(1).unwrap();
    assert!(!row.split(',').nth(9).unwrap().is_empty());
}

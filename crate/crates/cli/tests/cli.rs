use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const HEADER: &str = "jsr_db,jammer,topology,ris_size,t_baseline,t_jammed,gain,detect_rate,classify_rate,tau_err,modulation,code_rate,payload_fraction,stderr_gain";

const SMALL: &str = r#"
[experiment]
jsr_grid_db = [-5, 10]
ris_sizes = [16]
trials = 4
frame_len = 2048
"#;

fn simulate(dir: &Path, config: &str, out: &str, extra: &[&str]) -> Output {
    let cfg = dir.join("cfg.toml");
    fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_simulate"))
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join(out))
        .args(extra)
        .output()
        .unwrap()
}

#[test]
fn writes_the_exact_header_and_one_row_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(dir.path(), SMALL, "a.csv", &["--summary"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("a.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some(HEADER));
    assert_eq!(lines.count(), 6);
    assert!(String::from_utf8_lossy(&out.stdout).contains("max gain"));
}

#[test]
fn output_is_reproducible_across_runs_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    for (name, jobs) in [("a.csv", "1"), ("b.csv", "1"), ("c.csv", "3")] {
        let out = simulate(dir.path(), SMALL, name, &["--seed", "7", "--jobs", jobs]);
        assert_eq!(out.status.code(), Some(0));
    }
    let a = fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, fs::read(dir.path().join("b.csv")).unwrap());
    assert_eq!(a, fs::read(dir.path().join("c.csv")).unwrap());
}

#[test]
fn seed_and_trials_flags_override_the_file() {
    let dir = tempfile::tempdir().unwrap();
    simulate(dir.path(), SMALL, "a.csv", &["--seed", "1"]);
    simulate(dir.path(), SMALL, "b.csv", &["--seed", "2", "--trials", "5"]);
    assert_ne!(fs::read(dir.path().join("a.csv")).unwrap(), fs::read(dir.path().join("b.csv")).unwrap());
}

#[test]
fn config_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    for bad in ["[experiment]\nbogus = 1\n", "[experiment]\ntrials = 0\n", "not toml at all ["] {
        let out = simulate(dir.path(), bad, "x.csv", &[]);
        assert_eq!(out.status.code(), Some(1), "{bad}");
        assert!(!dir.path().join("x.csv").exists());
    }
    assert_eq!(simulate(dir.path(), SMALL, "x.csv", &["--jobs", "0"]).status.code(), Some(1));
}

#[test]
fn io_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = simulate(dir.path(), SMALL, "missing/dir/out.csv", &[]);
    assert_eq!(out.status.code(), Some(2));
    let out = Command::new(env!("CARGO_BIN_EXE_simulate"))
        .args(["--config", "/nonexistent/cfg.toml", "--out"])
        .arg(dir.path().join("o.csv"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

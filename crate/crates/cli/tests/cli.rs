use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn fdris(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fdris")).args(args).output().expect("binary runs")
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn solve_writes_monotone_report_and_echoes_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    let o = fdris(&[
        "solve", "--seed", "7", "--set", "ris_elements=8", "--set", "solver.outer_max_iter=40", "--out", &out,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 7);
    assert_eq!(report["config"]["scenario"]["ris_elements"], 8);
    assert_eq!(report["config"]["solver"]["outer_max_iter"], 40);
    let trace: Vec<f64> = report["report"]["trace"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!(!trace.is_empty() && trace.len() <= 41);
    assert!(trace.windows(2).all(|w| w[1] >= w[0] - 1e-8 * w[0].abs()));
    assert!(String::from_utf8_lossy(&o.stdout).contains("sum rate"));
}

#[test]
fn sweep_is_reproducible_byte_for_byte() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut csvs = Vec::new();
    for (d, jobs) in dirs.iter().zip(["1", "2"]) {
        let out = out_arg(d.path());
        let o = fdris(&[
            "sweep",
            "--param",
            "ris_elements",
            "--values",
            "2,4,6",
            "--realizations",
            "2",
            "--schemes",
            "fd_no_ris,fd_random_ris",
            "--jobs",
            jobs,
            "--set",
            "solver.outer_max_iter=20",
            "--out",
            &out,
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        csvs.push(std::fs::read(d.path().join("results.csv")).unwrap());
        assert!(d.path().join("sweep.json").exists());
    }
    assert_eq!(csvs[0], csvs[1]);
    let text = String::from_utf8(csvs[0].clone()).unwrap();
    assert_eq!(text.lines().count(), 1 + 3 * 2 * 2);
}

#[test]
fn bad_configuration_exits_with_code_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    let o = fdris(&["solve", "--set", "no_such_key=3", "--out", &out]);
    assert_eq!(o.status.code(), Some(1));
    let o = fdris(&["solve", "--set", "ris_elements=0", "--out", &out]);
    assert_eq!(o.status.code(), Some(1));
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{ not json").unwrap();
    let o = fdris(&["solve", "--config", cfg.to_str().unwrap(), "--out", &out]);
    assert_eq!(o.status.code(), Some(1));
    let o = fdris(&["sweep", "--param", "nope", "--values", "1", "--out", &out]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn bundled_defaults_load() {
    let dir = tempfile::tempdir().unwrap();
    let out = out_arg(dir.path());
    let cfg = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/defaults.json");
    let o = fdris(&[
        "solve", "--config", cfg, "--scheme", "fd_no_ris", "--set", "solver.outer_max_iter=5", "--out", &out,
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn validate_passes() {
    let o = fdris(&["validate"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stdout));
    assert!(String::from_utf8_lossy(&o.stdout).contains("PASS"));
}

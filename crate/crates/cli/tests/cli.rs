use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pipeflow(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pipeflow"))
        .args(args)
        .env_remove("PIPEFLOW_THREADS")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn short_config(dir: &Path, preset: &str) -> String {
    let out = pipeflow(&["preset", preset]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let text: String = text
        .lines()
        .map(|l| match l.split_once(" = ").map(|(k, _)| k) {
            Some("cells") => "cells = 40".to_string(),
            Some("t_end") => "t_end = 4.0".to_string(),
            _ => l.to_string(),
        })
        .map(|l| l + "\n")
        .collect();
    let path = dir.join(format!("{preset}.cfg"));
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn still_state_preset_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("still");
    let out = pipeflow(&["run", "--preset", "still-state", "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let snapshots = fs::read_to_string(out_dir.join("snapshots.csv")).unwrap();
    assert!(snapshots.starts_with("t,x,h_w,A,Q,u,M,D,v,air_pressure,piezo,E_a,E_w\n"));
    assert!(out_dir.join("probes.csv").exists());
}

#[test]
fn missing_config_reports_path() {
    let out = pipeflow(&["run", "missing-file.cfg"]);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert_eq!(err.lines().count(), 1, "{err}");
    assert!(err.starts_with("error: io: "), "{err}");
    assert!(err.contains("missing-file.cfg"), "{err}");
}

#[test]
fn bad_config_names_key() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.cfg");
    fs::write(&path, "length = 10\ndiameter = -1\nt_end = 1\n").unwrap();
    let out = pipeflow(&["run", path.to_str().unwrap()]);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(err.starts_with("error: config: line 2: key `diameter`"), "{err}");
}

#[test]
fn unknown_preset_lists_options() {
    let out = pipeflow(&["run", "--preset", "bogus"]);
    assert!(!out.status.success());
    let err = stderr(&out);
    assert!(err.starts_with("error: unknown-preset: "), "{err}");
    assert!(err.contains("paper-high-air"), "{err}");
}

#[test]
fn usage_errors_are_one_line() {
    for args in [&["frobnicate"][..], &["run"][..], &["run", "a.cfg", "--preset", "still-state"][..]] {
        let out = pipeflow(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err = stderr(&out);
        assert_eq!(err.lines().count(), 1, "{err}");
        assert!(err.starts_with("error: usage: "), "{err}");
    }
}

#[test]
fn version_and_help() {
    let v = pipeflow(&["--version"]);
    assert!(v.status.success());
    assert!(String::from_utf8_lossy(&v.stdout).contains(env!("CARGO_PKG_VERSION")));
    let h = pipeflow(&["--help"]);
    assert!(h.status.success());
    let help = String::from_utf8_lossy(&h.stdout).into_owned();
    for sub in ["run", "compare", "eigen"] {
        assert!(help.contains(sub), "{help}");
    }
}

#[test]
fn compare_two_runs_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let two = short_config(dir.path(), "paper-high-air");
    let one = short_config(dir.path(), "paper-single-layer");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (cfg, out) in [(&two, &a), (&one, &b)] {
        let o = pipeflow(&["run", cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let report = dir.path().join("report.csv");
    let o = pipeflow(&["compare", a.to_str().unwrap(), b.to_str().unwrap(), "--report", report.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(report).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,quantity,max_abs,max_relative,max_normalized,peak_a,peak_b"));
    assert_eq!(lines.count(), 9);
    assert!(text.contains(",piezo,") && text.contains(",air_pressure,"));
}

#[test]
fn compare_missing_dir_fails() {
    let dir = tempfile::tempdir().unwrap();
    let o = pipeflow(&["compare", dir.path().to_str().unwrap(), "/nonexistent/run"]);
    assert!(!o.status.success());
    assert!(stderr(&o).starts_with("error: io: "));
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), "paper-low-air");
    let mut outputs = Vec::new();
    for name in ["one", "two"] {
        let out = dir.path().join(name);
        let o = pipeflow(&["run", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
        outputs.push((fs::read(out.join("snapshots.csv")).unwrap(), fs::read(out.join("probes.csv")).unwrap()));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn eigen_map_to_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), "paper-high-air");
    let o = pipeflow(&["eigen", &cfg, "--fills", "3", "--velocities", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("fill,u,v,re1,im1,"));
    assert_eq!(text.lines().count(), 16);
}

#[test]
fn thread_variable_is_honoured() {
    let bad = Command::new(env!("CARGO_BIN_EXE_pipeflow"))
        .args(["run", "--preset", "still-state", "--out", "/nonexistent/never"])
        .env("PIPEFLOW_THREADS", "many")
        .output()
        .unwrap();
    assert!(!bad.status.success());
    assert!(stderr(&bad).contains("PIPEFLOW_THREADS"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = short_config(dir.path(), "paper-high-air");
    let out = dir.path().join("t1");
    let ok = Command::new(env!("CARGO_BIN_EXE_pipeflow"))
        .args(["run", &cfg, "--out", out.to_str().unwrap()])
        .env("PIPEFLOW_THREADS", "1")
        .output()
        .unwrap();
    assert!(ok.status.success(), "{}", stderr(&ok));
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mflab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mflab")).args(args).output().expect("binary runs")
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, text).unwrap();
    p
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

#[test]
fn schema_is_json() {
    let o = mflab(&["schema"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v.get("$schema").is_some());
}

#[test]
fn usage_errors_are_validation_failures() {
    assert_eq!(code(&mflab(&["scatter"])), 1);
    assert_eq!(code(&mflab(&["no-such-command"])), 1);
    assert_eq!(code(&mflab(&["--help"])), 0);
}

#[test]
fn missing_config_exits_2() {
    let o = mflab(&["scatter", "--config", "/nonexistent/config.json"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn unknown_keys_and_kind_mismatch_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let bad = write_config(dir.path(), r#"{"experiment": {"kind": "scatter", "potential": {"shape": "zero"}, "r_max": 5, "extra": 1}}"#);
    assert_eq!(code(&mflab(&["scatter", "--config", bad.to_str().unwrap()])), 1);
    let o = mflab(&["tf", "--config", config("scatter.json").to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("scatter configuration"));
}

#[test]
fn scatter_run_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = mflab(&["scatter", "--config", config("scatter.json").to_str().unwrap(), "--out", out, "--threads", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().path()).find(|p| p.extension().unwrap() == "csv").unwrap();
    let text = fs::read_to_string(csv).unwrap();
    assert!(text.starts_with("# run: scatter-"));
    assert!(text.lines().nth(1).unwrap().starts_with("# config-sha256: "));
    let r = mflab(&["report", "--input", out]);
    assert_eq!(code(&r), 0);
    assert!(dir.path().join("report.json").exists() && dir.path().join("report.gp").exists());
}

#[test]
fn report_on_empty_directory_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&mflab(&["report", "--input", dir.path().to_str().unwrap()])), 2);
}

#[test]
fn report_through_a_config() {
    let dir = tempfile::tempdir().unwrap();
    let runs = dir.path().join("runs");
    let o = mflab(&["tf", "--config", config("tf.json").to_str().unwrap(), "--out", runs.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let text = format!(r#"{{"experiment": {{"kind": "report", "input": {:?}}}}}"#, runs.to_str().unwrap());
    let cfg = write_config(dir.path(), &text);
    assert_eq!(code(&mflab(&["report", "--config", cfg.to_str().unwrap()])), 0);
}

#[test]
fn refused_fit_writes_results_and_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"experiment": {"kind": "converge-hartree",
            "grid": {"dim": 1, "length": 6.0, "points": 6},
            "interaction": {"shape": "zero"},
            "packet": {"width": 1.0, "momentum": [0.5, 0.0, 0.0]},
            "t": 0.3, "particles": [2, 3, 4]}}"#,
    );
    let out = dir.path().join("out");
    let o = mflab(&["converge-hartree", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("degenerate data"));
    assert_eq!(fs::read_dir(&out).unwrap().count(), 2);
}

#[test]
fn numerical_failure_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"experiment": {"kind": "hartree",
            "grid": {"dim": 1, "length": 8.0, "points": 32},
            "interaction": {"shape": "gaussian", "amplitude": 1e6, "range": 1.0},
            "packet": {"width": 1.0}, "t": 1.0, "dt": 0.5}}"#,
    );
    let o = mflab(&["hartree", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn seed_override_changes_the_run_id() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let cfg = config("bbgky.json");
    let a = mflab(&["bbgky", "--config", cfg.to_str().unwrap(), "--out", out]);
    let b = mflab(&["bbgky", "--config", cfg.to_str().unwrap(), "--out", out, "--seed", "99"]);
    assert_eq!((code(&a), code(&b)), (0, 0));
    assert_ne!(a.stdout, b.stdout);
}

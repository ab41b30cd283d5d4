use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_snipforge"));
    c.env_remove("SNIPFORGE_OUT").env("RUST_LOG", "warn");
    c
}

fn fixture_config() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures/config.toml")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn no_arguments_prints_usage() {
    let o = bin().output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Usage"));
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = bin().args(["curate", "--frobnicate"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bad_config_gives_one_line_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[curation]\nsim_threshold = 1.5\nbogus = 1\n").unwrap();
    let o = bin().arg("--config").arg(&cfg).arg("curate").output().unwrap();
    assert_eq!(o.status.code(), Some(1));
    let err = stderr(&o);
    let line = err.lines().find(|l| l.starts_with("error ")).expect("error line");
    assert!(line.starts_with("error stage=config kind=config msg="), "{line}");
    assert!(line.contains("sim_threshold") && line.contains("bogus"), "{line}");
}

#[test]
fn stage_without_prior_output_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .arg("--config")
        .arg(fixture_config())
        .arg("--out")
        .arg(dir.path())
        .arg("lex")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).lines().any(|l| l.starts_with("error stage=lex kind=")), "{}", stderr(&o));
}

#[test]
fn validate_config_prints_filled_defaults() {
    let o = bin().arg("--config").arg(fixture_config()).arg("validate-config").output().unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("[seq2seq]") && out.contains("# embed jobs:"));
}

#[test]
fn pipeline_runs_on_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let o = bin()
        .arg("--config")
        .arg(fixture_config())
        .arg("--out")
        .arg(dir.path())
        .arg("--variant")
        .arg("hidden")
        .arg("pipeline")
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    let out = String::from_utf8_lossy(&o.stdout);
    assert_eq!(out.lines().filter(|l| l.starts_with("ok stage=")).count(), 8, "{out}");
    assert!(dir.path().join("evaluate/metrics_hidden.json").is_file());
    assert!(dir.path().join("report/report.md").is_file());
}

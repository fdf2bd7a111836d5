use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lbsn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lbsn"))
        .args(args)
        .env("LBSN_LOG", "error")
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn small_scenario(dir: &Path) {
    let scenario = dir.join("scenario.toml");
    let out = lbsn(&["synth", "--out", dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = fs::read_to_string(&scenario).unwrap();
    let text = text
        .replace("per_city = 80", "per_city = 8")
        .replace("per_city = 30", "per_city = 4");
    fs::write(&scenario, text).unwrap();
    let out = lbsn(&[
        "synth",
        "--config",
        scenario.to_str().unwrap(),
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn help_exits_zero_for_every_subcommand() {
    for sub in [
        "ingest-check",
        "classify",
        "behavior",
        "mobility",
        "graph",
        "profiles",
        "synth",
        "all",
    ] {
        let out = lbsn(&[sub, "--help"]);
        assert_eq!(out.status.code(), Some(0), "{sub}");
        assert!(String::from_utf8_lossy(&out.stdout).contains("Usage"), "{sub}");
    }
    assert_eq!(lbsn(&["--help"]).status.code(), Some(0));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(lbsn(&[]).status.code(), Some(1));
    assert_eq!(lbsn(&["graph"]).status.code(), Some(1));
    assert_eq!(lbsn(&["nonsense"]).status.code(), Some(1));
}

#[test]
fn graph_without_classify_names_the_predecessor() {
    let dir = tempfile::tempdir().unwrap();
    small_scenario(dir.path());
    let config = dir.path().join("pipeline.toml");
    let cfg = config.to_str().unwrap();
    assert!(lbsn(&["ingest-check", "-c", cfg]).status.success());
    let out = lbsn(&["graph", "-c", cfg]);
    assert_eq!(out.status.code(), Some(1));
    let msg = stderr(&out);
    assert!(msg.contains("classify"), "{msg}");
    assert!(msg.contains("stage graph"), "{msg}");
}

#[test]
fn stages_in_separate_processes_build_the_bundle() {
    let dir = tempfile::tempdir().unwrap();
    small_scenario(dir.path());
    let cfg = dir.path().join("pipeline.toml");
    let cfg = cfg.to_str().unwrap();
    for sub in ["ingest-check", "classify", "behavior", "mobility", "graph", "profiles"] {
        let out = lbsn(&[sub, "--config", cfg, "--seed", "9"]);
        assert!(out.status.success(), "{sub}: {}", stderr(&out));
    }
    let report = dir.path().join("report");
    for f in [
        "ingest/rejected.csv",
        "classify/users.csv",
        "behavior/categories.csv",
        "mobility/gyration_cdf.csv",
        "graph/summary.csv",
        "profiles/profiles.csv",
        "manifest.json",
    ] {
        assert!(report.join(f).is_file(), "{f}");
    }
}

#[test]
fn overrides_and_error_classes() {
    let dir = tempfile::tempdir().unwrap();
    small_scenario(dir.path());
    let cfg = dir.path().join("pipeline.toml");
    let cfg = cfg.to_str().unwrap();
    let alt = dir.path().join("alt");
    let out = lbsn(&[
        "all",
        "-c",
        cfg,
        "--out",
        alt.to_str().unwrap(),
        "--threshold-days",
        "400",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(alt.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(m["parameters"]["threshold_days"], 400);
    assert_eq!(m["classification"]["users_with_home_city"], 0);

    assert_eq!(
        lbsn(&["all", "-c", cfg, "--threshold-days", "0"]).status.code(),
        Some(1)
    );
    assert_eq!(lbsn(&["all", "-c", "/nonexistent/p.toml"]).status.code(), Some(1));

    fs::write(dir.path().join("venues.csv"), "venue_id,name\n").unwrap();
    let out = lbsn(&["ingest-check", "-c", cfg]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("stage ingest"));
}

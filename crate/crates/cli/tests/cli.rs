use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_negoteam"))
}

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

fn ok(out: Output) -> String {
    assert!(
        out.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn run_quick(dir: &Path, extra: &[&str]) -> String {
    let out = bin()
        .arg("run")
        .arg("--config")
        .arg(config("quick.json"))
        .arg("--out")
        .arg(dir)
        .args(extra)
        .output()
        .unwrap();
    ok(out)
}

#[test]
fn run_writes_csv_transcripts_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let stdout = run_quick(dir.path(), &[]);
    assert!(stdout.starts_with("8 sessions"), "{stdout}");

    let csv = std::fs::read_to_string(dir.path().join("sessions.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("team_index,team,opponent_index"));
    assert_eq!(lines.count(), 8);

    let transcripts = std::fs::read_dir(dir.path().join("transcripts"))
        .unwrap()
        .count();
    assert_eq!(transcripts, 8);
    let md = std::fs::read_to_string(dir.path().join("report.md")).unwrap();
    assert!(md.contains("| FUM B |"));
}

#[test]
fn overrides_change_the_run_and_seed_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let c = tempfile::tempdir().unwrap();
    let flags = [
        "--seed",
        "5",
        "--reps",
        "1",
        "--max-rounds",
        "40",
        "--no-transcripts",
    ];
    run_quick(a.path(), &flags);
    run_quick(b.path(), &flags);
    run_quick(
        c.path(),
        &["--seed", "6", "--reps", "1", "--max-rounds", "40"],
    );
    let read = |d: &Path| std::fs::read(d.join("sessions.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    assert_ne!(read(a.path()), read(c.path()));
    assert_eq!(
        String::from_utf8(read(a.path())).unwrap().lines().count(),
        5
    );
    assert!(!a.path().join("transcripts").exists());
}

#[test]
fn report_formats() {
    let dir = tempfile::tempdir().unwrap();
    run_quick(dir.path(), &["--no-transcripts"]);
    let report = |format: &str| {
        ok(bin()
            .args(["report", "--format", format, "--in"])
            .arg(dir.path())
            .output()
            .unwrap())
    };
    let json: serde_json::Value = serde_json::from_str(&report("json")).unwrap();
    assert_eq!(json["teams"].as_array().unwrap().len(), 2);
    assert!(report("markdown").contains("# Tournament report"));
    assert!(report("csv").starts_with("team_index,team"));

    let bad = bin()
        .args(["report", "--format", "xml", "--in"])
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(!bad.status.success());
}

#[test]
fn replay_verifies_and_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    run_quick(dir.path(), &["--reps", "1"]);
    let path = std::fs::read_dir(dir.path().join("transcripts"))
        .unwrap()
        .next()
        .unwrap()
        .unwrap()
        .path();
    let stdout = ok(bin()
        .arg("replay")
        .arg("--transcript")
        .arg(&path)
        .output()
        .unwrap());
    assert!(stdout.starts_with("identical"), "{stdout}");

    let mut file: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    file["actions"].as_array_mut().unwrap().pop();
    std::fs::write(&path, file.to_string()).unwrap();
    let out = bin()
        .arg("replay")
        .arg("--transcript")
        .arg(&path)
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("mismatch"));
}

#[test]
fn bad_config_is_reported() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(
        &cfg,
        r#"{"scenario":"hotel-booking","teams":[],"opponents":[]}"#,
    )
    .unwrap();
    let out = bin()
        .arg("run")
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path().join("out"))
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("at least one team"));
}

#[test]
fn shipped_desk_config_parses() {
    let text = std::fs::read_to_string(config("desk.json")).unwrap();
    let parsed: negoteam::experiments::TournamentConfig = serde_json::from_str(&text).unwrap();
    assert_eq!(parsed, negoteam::experiments::TournamentConfig::desk());
}

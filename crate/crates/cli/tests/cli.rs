use std::path::Path;
use std::process::{Command, Output};

fn isac(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isac"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("spawn isac")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn dr_sweep_is_identical_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert!(isac(&["dr-sweep", "--threads", "1"], a.path())
        .status
        .success());
    assert!(isac(&["dr-sweep", "--threads", "4"], b.path())
        .status
        .success());
    let read = |d: &Path| std::fs::read(d.join("dr_sweep.csv")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn profiles_repeat_bit_for_bit_with_same_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "p.json", r#"{"trials": 20}"#);
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(isac(
        &[
            "profiles",
            "--config",
            &cfg,
            "--seed",
            "9",
            "--threads",
            "2"
        ],
        &a
    )
    .status
    .success());
    assert!(isac(
        &[
            "profiles",
            "--config",
            &cfg,
            "--seed",
            "9",
            "--threads",
            "3"
        ],
        &b
    )
    .status
    .success());
    for f in [
        "profile_16x16.csv",
        "profile_64x32.csv",
        "profiles_summary.csv",
    ] {
        assert_eq!(
            std::fs::read(a.join(f)).unwrap(),
            std::fs::read(b.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn json_format_writes_columns_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    assert!(isac(&["dr-sweep", "--format", "json"], dir.path())
        .status
        .success());
    let text = std::fs::read_to_string(dir.path().join("dr_sweep.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["columns"][0], "snr_in_db");
    assert_eq!(v["rows"].as_array().unwrap().len(), 101);
}

#[test]
fn bad_config_exits_2_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.json",
        r#"{"solver": {"frame": {"N": "x"}}}"#,
    );
    let out = isac(&["pcs", "--config", &cfg], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("solver.frame.N"), "{err}");
}

#[test]
fn unknown_field_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "typo.json", r#"{"snr_db_strat": 0}"#);
    assert_eq!(
        isac(&["dr-sweep", "--config", &cfg], dir.path())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn zero_threads_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        isac(&["dr-sweep", "--threads", "0"], dir.path())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn missing_config_file_fails() {
    let dir = tempfile::tempdir().unwrap();
    let out = isac(&["verify", "--config", "/nonexistent/cfg.json"], dir.path());
    assert!(!out.status.success());
}

#[test]
fn pcs_codebook_round_trips_through_codebook_command() {
    let dir = tempfile::tempdir().unwrap();
    let out = isac(&["pcs"], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let book = dir.path().join("codebook.json");
    let solution: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("pcs_solution.json")).unwrap(),
    )
    .unwrap();
    assert!(solution["air_bits_bank"].as_f64().unwrap() > 0.0);

    let cfg = write(
        dir.path(),
        "cb.json",
        &format!(r#"{{"input": {}}}"#, serde_json::to_string(&book).unwrap()),
    );
    let again = dir.path().join("again");
    assert!(isac(&["codebook", "--config", &cfg], &again)
        .status
        .success());
    let a: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&book).unwrap()).unwrap();
    let b: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(again.join("codebook.json")).unwrap())
            .unwrap();
    assert_eq!(a["probs"], b["probs"]);
}

#[test]
fn malformed_codebook_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let book = write(dir.path(), "book.json", r#"{"family": "qam"}"#);
    let cfg = write(dir.path(), "cb.json", &format!(r#"{{"input": "{book}"}}"#));
    assert_eq!(
        isac(&["codebook", "--config", &cfg], dir.path())
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn verify_passes_with_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let out = isac(&["verify"], dir.path());
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stdout)
    );
    let report: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(dir.path().join("verify_report.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(report["all_pass"], true);
}

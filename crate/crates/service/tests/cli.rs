use std::process::Command;

fn triad(dir: &std::path::Path, args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_triad"))
        .arg("--data-dir")
        .arg(dir)
        .args(args)
        .output()
        .unwrap()
}

#[test]
fn exit_codes_follow_error_kinds() {
    let tmp = tempfile::tempdir().unwrap();

    let out = triad(tmp.path(), &["evaluate"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.trim_end().lines().last().unwrap().starts_with("ModelMissing: "), "{err}");

    let out = triad(tmp.path(), &["train", "resnet"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));

    let out = triad(tmp.path(), &["frobnicate"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("InvalidConfig: "));

    let cfg = tmp.path().join("bad.toml");
    std::fs::write(&cfg, "colour = \"red\"\n").unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_triad"))
        .arg("--config")
        .arg(&cfg)
        .arg("split")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));

    let out = triad(tmp.path(), &["split"]);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("CohortMissing: "));

    let out = triad(tmp.path(), &["--help"]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn ingest_and_augment_write_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let out = triad(tmp.path(), &["ingest"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let out = triad(tmp.path(), &["augment"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let dir = triad_core::pipeline::DataDir::new(tmp.path());
    assert!(dir.cohort().exists());
    let lines = std::fs::read_to_string(dir.augmented()).unwrap().lines().count();
    assert_eq!(lines, 4423);
}

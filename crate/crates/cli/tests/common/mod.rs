#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn fixtures() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

pub fn page(storage: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_page"))
        .arg("--storage")
        .arg(storage)
        .args(args)
        .env_remove("PAGE_LOG")
        .output()
        .expect("page binary runs")
}

pub fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

pub fn ok(o: Output) -> String {
    assert!(
        o.status.success(),
        "exit {:?}\nstdout:\n{}\nstderr:\n{}",
        o.status.code(),
        stdout(&o),
        String::from_utf8_lossy(&o.stderr)
    );
    stdout(&o)
}

/// Compares against a committed file; `UPDATE_GOLDEN=1` rewrites it instead.
pub fn golden(path: &Path, actual: &[u8]) -> bool {
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(path, actual).unwrap();
        return true;
    }
    match std::fs::read(path) {
        Ok(expected) => expected == actual,
        Err(_) => false,
    }
}

/// Runs ingest, profile import and personalize over the fixture course in a
/// fresh storage root and returns it.
pub fn personalize_fixture() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    let config = fixtures().join("page.json");
    let config = config.to_str().unwrap();
    let s = dir.path();
    ok(page(s, &["--config", config, "ingest", fixtures().join("course/tagi").to_str().unwrap()]));
    ok(page(s, &["profile", "import", fixtures().join("profiles/student_001.json").to_str().unwrap()]));
    ok(page(s, &["--config", config, "personalize", "--profile", "student_001", "--module", "multimodality"]));
    dir
}

pub const GOLDEN_SERVED: &str = "golden/student_001/multimodality.txt";
pub const GOLDEN_ADAPTATIONS: &str = "golden/student_001/multimodality.adaptations.json";

pub fn served_artifacts(root: &Path) -> (Vec<u8>, Vec<u8>) {
    (
        std::fs::read(root.join("served/student_001/multimodality.txt")).unwrap(),
        std::fs::read(root.join("adaptations/student_001/multimodality.json")).unwrap(),
    )
}

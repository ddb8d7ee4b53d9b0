//! Helpers for driving the compiled binary in tests.

use std::path::{Path, PathBuf};
use std::process::Command;

pub fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_ragline")
}

/// Repository root; fixture configs use paths relative to it.
pub fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("..")
        .join("..")
        .canonicalize()
        .expect("repo root")
}

pub fn fixture(name: &str) -> PathBuf {
    repo_root().join("fixtures").join(name)
}

pub struct CmdOut {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl CmdOut {
    pub fn expect_code(&self, expected: i32) -> &Self {
        assert_eq!(
            self.code, expected,
            "expected exit {expected}, got {}\nstdout:\n{}\nstderr:\n{}",
            self.code, self.stdout, self.stderr
        );
        self
    }
}

pub fn run(args: &[&str]) -> CmdOut {
    run_in(&repo_root(), args)
}

pub fn run_in(dir: &Path, args: &[&str]) -> CmdOut {
    let output = Command::new(bin())
        .args(args)
        .current_dir(dir)
        .env("RUST_LOG", "error")
        .output()
        .expect("binary runs");
    CmdOut {
        code: output.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&output.stdout).to_string(),
        stderr: String::from_utf8_lossy(&output.stderr).to_string(),
    }
}

/// Build the index for a shipped fixture into `dir`, returning its path.
pub fn build_fixture_index(name: &str, dir: &Path) -> PathBuf {
    let out = dir.join(format!("{name}.idx"));
    let corpus = fixture(name).join("corpus.jsonl");
    let embedder = format!("scripted:{}", fixture(name).join("embedder.json").display());
    run(&[
        "index",
        "--corpus",
        corpus.to_str().unwrap(),
        "--embedder",
        &embedder,
        "--out",
        out.to_str().unwrap(),
    ])
    .expect_code(0);
    out
}

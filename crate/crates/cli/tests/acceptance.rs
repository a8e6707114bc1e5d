//! Runs `hofer verify` on the shipped config and echoes one line per
//! criterion.

use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Command, ExitCode, Stdio};

use hofer_cli::acceptance::CRITERIA;

fn main() -> ExitCode {
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/verify.toml");
    let out = tempfile::tempdir().expect("temp dir");
    let mut child = Command::new(env!("CARGO_BIN_EXE_hofer"))
        .arg("verify")
        .arg("--config")
        .arg(&config)
        .arg("--out")
        .arg(out.path())
        .stdout(Stdio::piped())
        .spawn()
        .expect("hofer runs");
    let stdout = child.stdout.take().expect("piped stdout");
    let (mut pass, mut fail) = (0, 0);
    for line in BufReader::new(stdout).lines() {
        let line = line.expect("utf-8 output");
        if !line.starts_with("criterion") {
            continue;
        }
        println!("{line}");
        if line.contains(" PASS ") {
            pass += 1;
        } else {
            fail += 1;
        }
    }
    let status = child.wait().expect("hofer exits");
    println!("acceptance: {pass} passed, {fail} failed, {status}");
    if status.success() && fail == 0 && pass == CRITERIA.len() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

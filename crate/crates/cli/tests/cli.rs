use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn hofer(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hofer"))
        .args(args)
        .arg("--out")
        .arg(dir.join("out"))
        .output()
        .expect("hofer runs")
}

fn setup(config: &str) -> (TempDir, String) {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    fs::write(&path, config).unwrap();
    let p = path.to_string_lossy().into_owned();
    (dir, p)
}

fn report(dir: &Path, name: &str) -> Value {
    let text = fs::read_to_string(dir.join("out").join(name)).unwrap();
    serde_json::from_str(&text).unwrap()
}

#[test]
fn rho_of_the_zero_field_is_zero() {
    let (dir, cfg) = setup("[fields]\nzero = \"0\"\n");
    let out = hofer(dir.path(), &["rho", "--config", &cfg, "--grid", "64"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let r = report(dir.path(), "rho.json");
    assert_eq!(r["schema"], "hofer-spectrum/1");
    assert_eq!(r["values"][0]["rho_raw"], 0.0);
}

#[test]
fn rho_sweep_has_the_documented_columns() {
    let (dir, cfg) = setup(
        "[params]\nA = 0.75\ngrid = 64\n[fields]\nshift = \"h\"\n[rho]\nfields = [\"shift\"]\nsweep = [0.25, 0.5]\n",
    );
    let out = hofer(dir.path(), &["rho", "--config", &cfg]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("out/sweep_shift.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "s2,rho_raw");
    let last: Vec<f64> = lines[2].split(',').map(|v| v.parse().unwrap()).collect();
    assert!((last[1] - 0.75).abs() < 1e-6, "{csv}");
}

#[test]
fn bounds_for_four_times_the_annulus_generator() {
    let (dir, cfg) = setup("[surface]\npunctures = 1\narea = 1.0\n[bounds]\nclasses = [[4]]\n");
    let out = hofer(dir.path(), &["bounds", "--config", &cfg, "--A", "0.75"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let b = &report(dir.path(), "bounds.json")["bounds"][0];
    assert_eq!(b["lower"], 1.0);
    assert_eq!(b["upper"], 3.0);
}

#[test]
fn flags_override_the_file() {
    let (dir, cfg) = setup(
        "[params]\nA = 0.6\ngrid = 32\n[surface]\npunctures = 1\n[bounds]\nclasses = [[1]]\n",
    );
    let out = hofer(
        dir.path(),
        &["bounds", "--config", &cfg, "--A", "0.7", "--seed", "3"],
    );
    assert!(out.status.success());
    let r = report(dir.path(), "bounds.json");
    assert_eq!(r["params"]["A"], 0.7);
    assert_eq!(r["params"]["grid"], 32);
    assert_eq!(r["params"]["seed"], 3);
}

#[test]
fn reruns_are_byte_identical() {
    let (dir, cfg) =
        setup("[fields]\nf = \"0.3*sin(2*pi*θ)*sin(pi*h) + h\"\n[reeb]\nfield = \"f\"\ns = 0.1\n");
    let run = || {
        let out = hofer(dir.path(), &["reeb", "--config", &cfg, "--grid", "48"]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        ["reeb.json", "reeb.dot", "reeb_arcs.csv"]
            .map(|f| fs::read(dir.path().join("out").join(f)).unwrap())
    };
    assert_eq!(run(), run());
}

#[test]
fn sample_files_are_read_at_their_own_resolution() {
    let (dir, cfg) = setup("[fields]\nshift = { file = \"shift.txt\" }\n");
    let n = 16;
    let rows: Vec<String> = (0..=n)
        .map(|j| {
            let v = if j < n { j as f64 / n as f64 } else { 0.0 };
            vec![format!("{v}"); n].join(" ")
        })
        .collect();
    fs::write(dir.path().join("shift.txt"), rows.join("\n")).unwrap();
    let out = hofer(
        dir.path(),
        &["rho", "--config", &cfg, "--s1", "0.1", "--s2", "0.4"],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v = report(dir.path(), "rho.json")["values"][0]["rho_normalized"]
        .as_f64()
        .unwrap();
    assert!((v - 1.0).abs() < 1e-6, "{v}");
}

#[test]
fn config_errors_exit_with_two() {
    let cases = [
        "[params]\nbogus = 1\n",
        "[params]\nA = 1.5\n",
        "[fields]\nf = \"h + nope\"\n",
        "[fields]\nf = { file = \"missing.txt\" }\n",
        "[params]\ngrid = 4\n",
    ];
    for cfg_text in cases {
        let (dir, cfg) = setup(cfg_text);
        let out = hofer(dir.path(), &["rho", "--config", &cfg]);
        assert_eq!(out.status.code(), Some(2), "{cfg_text}");
    }
    let dir = tempfile::tempdir().unwrap();
    let out = hofer(dir.path(), &["rho", "--config", "/nonexistent/run.toml"]);
    assert_eq!(out.status.code(), Some(2));
    let (dir, cfg) = setup("");
    let out = hofer(
        dir.path(),
        &["rho", "--config", &cfg, "--s1", "0.4", "--s2", "0.2"],
    );
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn computation_errors_exit_with_one() {
    let (dir, cfg) = setup(
        "[fields]\nf = \"h\"\n[simulate]\nfield = \"f\"\nduration = 1.0\npoints = [[0.5, 2.0]]\n",
    );
    let out = hofer(dir.path(), &["simulate", "--config", &cfg, "--grid", "32"]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulate_writes_trajectories_and_windings() {
    let (dir, cfg) = setup(
        "[fields]\nshift = \"h\"\n[simulate]\nfield = \"shift\"\nduration = 1.0\npoints = [[0.2, 0.5]]\ndisk = [0.2, 0.5, 0.05]\n",
    );
    let out = hofer(
        dir.path(),
        &[
            "simulate", "--config", &cfg, "--grid", "64", "--step", "0.01",
        ],
    );
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let csv = fs::read_to_string(dir.path().join("out/trajectory_0.csv")).unwrap();
    assert!(csv.starts_with("t,θ,h\n"));
    let r = report(dir.path(), "simulate.json");
    assert_eq!(r["trajectories"][0]["winding"]["windings"][0], 1);
    assert!((r["energy"].as_f64().unwrap() - 0.98).abs() < 0.02);
}

#[test]
fn verify_runs_selected_criteria() {
    let (dir, cfg) = setup("[verify]\ncriteria = [6, 9]\n");
    let out = hofer(dir.path(), &["verify", "--config", &cfg]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text
        .lines()
        .filter(|l| l.starts_with("criterion"))
        .collect();
    assert_eq!(lines.len(), 2);
    assert!(lines.iter().all(|l| l.contains(" PASS ")), "{text}");
    assert_eq!(report(dir.path(), "verify.json")["failed"], 0);
    let (dir, cfg) = setup("[verify]\ncriteria = [12]\n");
    assert_eq!(
        hofer(dir.path(), &["verify", "--config", &cfg])
            .status
            .code(),
        Some(2)
    );
}

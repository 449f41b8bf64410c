use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

/// Keeps the runs short; the numbers checked below do not need finer grids.
const QUICK: &str = "grid = 4096\ndepth = 10\nangles = 32\ndegree = 64\nn_schedule = 8, 16, 32\n";

fn wcop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wcop"))
        .args(args)
        .env("WCOP_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn write_scenario(dir: &Path, file: &str, body: &str) -> String {
    let path = dir.join(file);
    std::fs::write(&path, format!("{body}\n{QUICK}")).unwrap();
    path.to_str().unwrap().to_string()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn analyze_identity() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_scenario(dir.path(), "id.scn", "name = identity\nphi = z\np = 2\nq = 2");
    let out = dir.path().join("report.json");
    let o = wcop(&["analyze", "--scenario", &s, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&out);
    assert_eq!(r["tool"], "wcop");
    assert_eq!(r["status"], "ok");
    assert_eq!(r["regime"], "p<=q");
    let b = &r["result"]["analysis"]["bracket"];
    assert!((b["lower"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!((b["upper"].as_f64().unwrap() - 2.0).abs() < 1e-6);
    assert!(r["version"].is_string());
}

#[test]
fn reports_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_scenario(dir.path(), "half.scn", "phi = mul(0.5, z)\np = 2\nq = inf");
    let a = wcop(&["analyze", "--scenario", &s]);
    let b = wcop(&["analyze", "--scenario", &s]);
    assert_eq!(a.status.code(), Some(0));
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
    let c = Command::new(env!("CARGO_BIN_EXE_wcop"))
        .args(["analyze", "--scenario", &s])
        .env("WCOP_THREADS", "5")
        .output()
        .unwrap();
    assert_eq!(a.stdout, c.stdout);
}

#[test]
fn essnorm_unbounded_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_scenario(dir.path(), "z24.scn", "phi = z\np = 2\nq = 4");
    let o = wcop(&["essnorm", "--scenario", &s]);
    assert_eq!(o.status.code(), Some(1));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["status"], "unbounded");
}

#[test]
fn flags_override_scenario() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_scenario(dir.path(), "half.scn", "phi = mul(0.5, z)\np = 4\nq = 2");
    let o = wcop(&["carleson", "--scenario", &s, "--grid", "2048", "--alpha", "0.6"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["config"]["carleson"]["grid"], 2048);
    assert_eq!(r["config"]["carleson"]["aperture"], 0.6);
    assert_eq!(r["result"]["carleson"]["verdict"], "holds");
}

#[test]
fn csv_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_scenario(dir.path(), "half.scn", "name = half\nphi = mul(0.5, z)\np = 2\nq = 2");
    let o = wcop(&["analyze", "--scenario", &s, "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("scenario,series,x,value\n"));
    assert!(text.lines().any(|l| l.starts_with("half,ring_max,")));

    let o = wcop(&["truncate", "--scenario", &s, "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("row,column,re,im\n"));
    assert_eq!(text.lines().count(), 1 + 65 * 65);

    let o = wcop(&["carleson", "--scenario", &s, "--format", "csv", "--grid", "1024"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("location_re,location_im,weight\n"));
    assert_eq!(text.lines().count(), 1 + 1024);
}

#[test]
fn sweep_merges_directory() {
    let dir = tempfile::tempdir().unwrap();
    write_scenario(dir.path(), "a.scn", "name = a\nphi = mul(0.5, z)\np = 2\nq = 2");
    write_scenario(dir.path(), "b.scn", "name = b\nphi = pow(z, 2)\np = inf\nq = 2");
    let o = wcop(&["sweep", "--scenario", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    let names: Vec<&str> = r["reports"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x["scenario"]["name"].as_str().unwrap())
        .collect();
    assert_eq!(names, ["a", "b"]);
}

#[test]
fn parse_errors_exit_one_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_scenario(dir.path(), "bad.scn", "phi = z\np = 2\nq = 2\nspeed = 3");
    let o = wcop(&["analyze", "--scenario", &s]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("line 4, column 1"), "{err}");

    let s = write_scenario(dir.path(), "shift.scn", "phi = add(1, z)\np = 2\nq = 2");
    let o = wcop(&["analyze", "--scenario", &s]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8(o.stderr).unwrap().contains("self-map"));
}

#[test]
fn selftest_subset() {
    let o = wcop(&["selftest", "--only", "3,10"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(r["passed"], 2);
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("PASS  3") && err.contains("PASS 10"), "{err}");
}

#[test]
fn bad_thread_count_is_an_error() {
    let o = Command::new(env!("CARGO_BIN_EXE_wcop"))
        .args(["selftest", "--only", "3"])
        .env("WCOP_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn nonconvergent_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let s = write_scenario(dir.path(), "lens.scn", "phi = poly(0.5, 0.5)\np = inf\nq = 2\neps_depth = 12");
    let o = wcop(&["essnorm", "--scenario", &s]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8(o.stderr).unwrap().contains("still changing"));
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn vpm(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vpm"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("VPM_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Header row and data rows, comment lines dropped.
fn table(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

#[test]
fn multipliers_schema() {
    let dir = TempDir::new().unwrap();
    let o = vpm(&["multipliers", "--d", "3", "--n-max", "8"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (header, rows) = table(&dir.path().join("multipliers.csv"));
    assert_eq!(header, ["d", "n", "k", "closed_form", "quadrature", "abs_diff"]);
    assert_eq!(rows.len(), (0..=8).map(|n| n + 5).sum::<usize>());
    let first = fs::read_to_string(dir.path().join("multipliers.csv")).unwrap();
    assert!(first.starts_with("# suite=multipliers config_hash="));
}

#[test]
fn converse_schema() {
    let dir = TempDir::new().unwrap();
    let o = vpm(&["converse", "--corpus", "cusp:1.0", "--p", "inf", "--n-list", "4,8,16"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (header, rows) = table(&dir.path().join("converse.csv"));
    assert_eq!(header, ["function_id", "p", "n", "e_n", "w_n", "ratio", "flag"]);
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r[0] == "cusp:1.0" && r[1] == "inf"));
}

#[test]
fn usage_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let o = vpm(&["nonsense"], dir.path());
    assert_eq!(code(&o), 2);
    let o = vpm(&["lemmas", "--n-list", "4,8,512"], dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("band budget") && stderr(&o).contains("256"), "{}", stderr(&o));
    let o = vpm(&["lemmas", "--d", "2"], dir.path());
    assert_eq!(code(&o), 2);
    let o = vpm(&["lemmas", "--p", "3"], dir.path());
    assert_eq!(code(&o), 2);
    let o = vpm(&["lemmas", "--no-such-flag"], dir.path());
    assert_eq!(code(&o), 2);
    let o = vpm(&["lemmas", "--config", "/nonexistent/vpm.ini"], dir.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn unknown_config_key_named() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.ini");
    fs::write(&cfg, "d = 3\nwibble = 4\n").unwrap();
    let o = vpm(&["lemmas", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("wibble"), "{}", stderr(&o));
}

#[test]
fn flags_override_file() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.ini");
    fs::write(&cfg, "d = 3\nn_max = 4\n").unwrap();
    let o = vpm(&["multipliers", "--config", cfg.to_str().unwrap(), "--d", "4"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (_, rows) = table(&dir.path().join("multipliers.csv"));
    assert!(rows.iter().all(|r| r[0] == "4"));
    assert_eq!(rows.iter().map(|r| r[1].parse::<usize>().unwrap()).max(), Some(4));
}

#[test]
fn failing_window_exits_1() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("strict.ini");
    fs::write(&cfg, "n_max = 4\nmultiplier_tol = 1e-300\n").unwrap();
    let o = vpm(&["multipliers", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert_eq!(summary(dir.path())["suites"]["multipliers"]["passed"], Value::Bool(false));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let args = ["modulus", "--corpus", "bump,harmonic:4", "--n-list", "4,16"];
    let body = |p: &Path| {
        let text = fs::read_to_string(p).unwrap();
        text.lines().filter(|l| !l.starts_with("# timestamp_unix=")).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(code(&vpm(&args, dir.path())), 0);
    let a = body(&dir.path().join("modulus.csv"));
    assert_eq!(code(&vpm(&args, dir.path())), 0);
    assert_eq!(a, body(&dir.path().join("modulus.csv")));
}

#[test]
fn summary_contents_and_merge() {
    let dir = TempDir::new().unwrap();
    let common = ["--n-list", "16,32,64,128", "--corpus", "harmonic:4"];
    let run = |suite: &str| {
        let mut args = vec![suite];
        args.extend(common);
        vpm(&args, dir.path())
    };
    assert_eq!(code(&run("voronovskaya")), 0);
    assert_eq!(code(&run("lemmas")), 0);
    let s = summary(dir.path());
    assert_eq!(s["config_hash"].as_str().unwrap().len(), 64);
    assert_eq!(s["suites"]["voronovskaya"]["passed"], Value::Bool(true));
    assert_eq!(s["suites"]["lemmas"]["passed"], Value::Bool(true));
    let env = &s["envelope_constants"];
    for key in ["c5_hat", "n_alpha_min", "n_alpha_max", "lemma_windows", "converse_ratio_window_max"] {
        assert!(env.get(key).is_some(), "missing {key}");
    }
    assert!(env["c5_hat"].is_null());
    assert!(env["n_alpha_min"].as_f64().unwrap() > 0.5);
    assert!(env["lemma_windows"]["fourth_moment"].as_f64().unwrap() <= 2.0);

    // a different configuration starts a fresh summary
    assert_eq!(code(&vpm(&["lemmas", "--n-list", "16,32"], dir.path())), 0);
    assert!(summary(dir.path())["suites"].get("voronovskaya").is_none());
}

#[test]
fn out_dir_from_environment() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_vpm"))
        .args(["multipliers", "--n-max", "2"])
        .env("VPM_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(dir.path().join("multipliers.csv").exists());
    assert!(dir.path().join("summary.json").exists());
}

#[test]
fn selftest_passes() {
    let dir = TempDir::new().unwrap();
    let o = vpm(&["selftest"], dir.path());
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let (header, _) = table(&dir.path().join("selftest.csv"));
    assert_eq!(header, ["check", "value", "bound", "passed"]);
    assert!(summary(dir.path())["envelope_constants"]["c5_hat"].as_f64().unwrap() <= 10.0);
}

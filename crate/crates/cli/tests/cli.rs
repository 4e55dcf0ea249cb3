use std::path::Path;
use std::process::{Command, Output};

use conifold_core::experiments::SweepResult;

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conifold-lab")).args(args).output().expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const PASSING: &str = r#"{"experiments": [
    {"experiment": "eta_bounds"},
    {"experiment": "region_atlas", "atlas": {"step": 0.5}}
]}"#;

const FAILING: &str = r#"{"experiments": [
    {"experiment": "eta_bounds"},
    {"experiment": "invertibility_uniformity", "label": "tight", "t_list": [0.1, 0.01],
     "grid": 400, "tolerances": {"ratio": 1.000001}}
]}"#;

#[test]
fn passing_run_exits_zero_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ok.json", PASSING);
    let out = dir.path().join("out");
    let o = lab(&["run", &cfg, "--out", out.to_str().unwrap(), "--emit", "csv", "--emit", "plotdata"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert!(stdout.contains("PASS eta_bounds") && stdout.contains("PASS region_atlas"));
    assert!(out.join("eta_bounds.csv").exists());
    assert!(out.join("region_atlas.fredholm.dat").exists());
    assert!(!out.join("eta_bounds.json").exists(), "--emit replaces the configured formats");
}

#[test]
fn failing_tolerance_exits_nonzero_and_names_the_experiment() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.json", FAILING);
    let o = lab(&["run", &cfg, "--out", dir.path().join("out").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let stderr = String::from_utf8(o.stderr).unwrap();
    assert!(stderr.contains("tight"), "{stderr}");
    assert!(!stderr.contains("eta_bounds"), "{stderr}");
}

#[test]
fn unknown_experiment_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "x.json", r#"{"experiment": "warp_drive"}"#);
    let o = lab(&["run", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warp_drive"));
}

#[test]
fn invalid_t_list_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "x.json", r#"{"experiment": "poincare_uniformity", "t_list": [0.01, 0.1]}"#);
    assert_eq!(lab(&["run", &cfg]).status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "id.json",
        r#"{"experiments": [{"experiment": "norm_identities"}, {"experiment": "eta_bounds"}]}"#,
    );
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        let o = lab(&["run", &cfg, "--seed", "7", "--out", d.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    for f in ["norm_identities.csv", "norm_identities.json", "eta_bounds.csv"] {
        assert_eq!(std::fs::read(a.join(f)).unwrap(), std::fs::read(b.join(f)).unwrap(), "{f}");
    }
    let json = std::fs::read_to_string(a.join("norm_identities.json")).unwrap();
    let r = SweepResult::from_json(&json).unwrap();
    assert_eq!(r.seed, 7);
    assert_eq!(r.to_json().unwrap() + "\n", json);
}

#[test]
fn output_dir_defaults_relative_to_the_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", r#"{"experiment": "eta_bounds", "outputs": {"dir": "res", "formats": ["json"]}}"#);
    assert_eq!(lab(&["run", &cfg]).status.code(), Some(0));
    assert!(dir.path().join("res/eta_bounds.json").exists());
}

#[test]
fn weights_lists_sphere_harmonics() {
    let o = lab(&["weights", "--link", "sphere:2", "--m", "3", "--range", "-4:3"]);
    assert_eq!(o.status.code(), Some(0));
    let rows: Vec<serde_json::Value> = serde_json::from_slice(&o.stdout).unwrap();
    let pairs: Vec<(f64, u64)> = rows.iter().map(|r| (r["gamma"].as_f64().unwrap(), r["mult"].as_u64().unwrap())).collect();
    let expected = [(-4.0, 7), (-3.0, 5), (-2.0, 3), (-1.0, 1), (0.0, 1), (1.0, 3), (2.0, 5), (3.0, 7)];
    assert_eq!(pairs, expected);
}

#[test]
fn regions_prints_a_grid_csv() {
    let o = lab(&["regions", "--kind", "AC", "--m", "3", "--grid", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = String::from_utf8(o.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("beta_1,beta_2,class,injective,surjective,index,kernel_dim"));
    // (-3, 2) in steps of 0.5 gives 11 values per axis.
    assert_eq!(lines.count(), 121);
}

#[test]
fn bad_range_is_rejected() {
    let o = lab(&["weights", "--link", "sphere:2", "--m", "3", "--range", "3:-4"]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn thread_cap_is_honoured() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "ok.json", r#"{"experiment": "eta_bounds"}"#);
    let o = Command::new(env!("CARGO_BIN_EXE_conifold-lab"))
        .args(["run", &cfg, "--out", dir.path().to_str().unwrap()])
        .env("CONIFOLD_LAB_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_conifold-lab"))
        .args(["run", &cfg])
        .env("CONIFOLD_LAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

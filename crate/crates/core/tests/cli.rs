use std::path::Path;
use std::process::{Command, Output};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swipt-maxmin")).args(args).output().unwrap()
}

fn specs_dir() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/../../specs"))
}

const SPEC: &str = r#"
name = "cli"
algorithms = ["GOA", "DWA-UPS", "EFM-only"]
realizations = 2

[scenario]
N = 4
K = 4
P_T = "10 W"
sigma_a_sq = "-70 dBm"
sigma_d_sq = "-50 dBm"
gamma_bar = "10 dB"
L = 5.0
theta = 0.1
alpha = 2.5
S_E = "-30 dBm"

[sweep]
gamma_db = [10.0]
N = [4]
K = [4]
L = [5.0]
"#;

#[test]
fn run_then_summarize() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.toml");
    std::fs::write(&spec, SPEC).unwrap();
    let out = dir.path().join("out");
    let o = cli(&["run", "--spec", spec.to_str().unwrap(), "--out", out.to_str().unwrap(), "--verbose"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = out.join("cli.csv");
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("# swipt-maxmin v1\npreset,gamma_db,N,K,L,algorithm,"));
    assert_eq!(text.lines().count(), 2 + 6);
    assert!(out.join("cli.goa.jsonl").exists());

    let o = cli(&["summarize", "--csv", csv.to_str().unwrap(), "--metric", "P_star", "--group-by", "algorithm", "--baseline", "DWA-UPS"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = String::from_utf8(o.stdout).unwrap();
    assert!(table.starts_with("algorithm,count,total,mean"));
    assert_eq!(table.lines().count(), 4);

    // identical spec and seed give identical bytes
    let again = dir.path().join("again");
    let o = cli(&["run", "--spec", spec.to_str().unwrap(), "--out", again.to_str().unwrap(), "--workers", "2"]);
    assert!(o.status.success());
    assert_eq!(std::fs::read(&csv).unwrap(), std::fs::read(again.join("cli.csv")).unwrap());
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.toml");
    std::fs::write(&spec, SPEC.replace("\"GOA\"", "\"NOPE\"")).unwrap();
    let o = cli(&["run", "--spec", spec.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("config error"));

    let o = cli(&["run", "--preset", "F99", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));

    let o = cli(&["summarize", "--csv", spec.to_str().unwrap(), "--metric", "P_star", "--group-by", "algorithm"]);
    assert_eq!(o.status.code(), Some(2));

    let o = cli(&["check", "--suite", "nothing"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn preset_run_with_override() {
    let dir = tempfile::tempdir().unwrap();
    let o = cli(&["run", "--preset", "F7", "--realizations", "1", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(dir.path().join("F7.csv")).unwrap();
    // 2 targets x 2 antenna counts x 2 field sizes x 3 rows
    assert_eq!(text.lines().count(), 2 + 24);
    assert!(text.contains(",P_lb,") && text.contains(",P_ub,"));
}

#[test]
fn shipped_spec_uses_its_curve_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = specs_dir().join("quick.toml");
    let o = cli(&["run", "--spec", spec.to_str().unwrap(), "--out", dir.path().to_str().unwrap(), "--realizations", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let spec = specs_dir().join("reference.toml");
    let text = std::fs::read_to_string(spec).unwrap();
    let parsed = swipt_maxmin::harness::ExperimentSpec::from_toml_str(&text).unwrap();
    swipt_maxmin::harness::load_curve(&parsed.eh_curve, 1e-6, Some(specs_dir())).unwrap();
}

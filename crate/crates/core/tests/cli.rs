use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_entroflow"))
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/configs")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn column(csv: &str, name: &str) -> Vec<f64> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect()
}

const SMALL_OU: &str = r#"
schema = 1
name = "small"
seed = 5
d0 = 0.5
times = [0.0, 0.5, 1.0]

[preset]
name = "ou"

[u0]
kind = "gaussian"
mean = [1.0]
variance = 1.0

[v0]
kind = "gaussian"
mean = [0.0]
variance = 1.0

[checks]
trials = 3
"#;

#[test]
fn version_help_and_unknown() {
    let v = run(&["--version"]);
    assert_eq!(code(&v), 0);
    assert!(String::from_utf8_lossy(&v.stdout).starts_with("entroflow "));
    assert_eq!(code(&run(&["--help"])), 0);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&[])), 2);
}

#[test]
fn bad_configs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.toml");
    assert_eq!(code(&run(&["run", missing.to_str().unwrap()])), 2);
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, SMALL_OU.replace("schema = 1", "schema = 9")).unwrap();
    assert_eq!(code(&run(&["run", bad.to_str().unwrap()])), 2);
    fs::write(&bad, SMALL_OU.replace("name = \"ou\"", "name = \"wave\"")).unwrap();
    assert_eq!(code(&run(&["check", bad.to_str().unwrap()])), 2);
}

#[test]
fn thread_cap_must_be_numeric() {
    let o = bin().env("ENTROFLOW_THREADS", "many").args(["ou-demo", "--lambda", "1"]).output().unwrap();
    assert_eq!(code(&o), 2);
    let o = bin().env("ENTROFLOW_THREADS", "2").args(["ou-demo", "--lambda", "1"]).output().unwrap();
    assert_eq!(code(&o), 0);
}

#[test]
fn heat_run_is_deterministic() {
    let cfg = configs().join("heat.toml");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = run(&["run", cfg.to_str().unwrap(), "--out", d.path().to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    for f in ["orbit.csv", "bounds.csv", "curvature.csv", "inequalities.csv", "summary.toml"] {
        let x = fs::read(a.path().join(f)).unwrap();
        let y = fs::read(b.path().join(f)).unwrap();
        assert!(!x.is_empty());
        assert_eq!(x, y, "{f} differs between runs");
    }
}

#[test]
fn heat_bounds_follow_the_flat_formula() {
    let out = tempfile::tempdir().unwrap();
    let cfg = configs().join("heat.toml");
    let o = run(&["bounds", cfg.to_str().unwrap(), "--out", out.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(out.path().join("bounds.csv")).unwrap();
    let d0 = 1.0;
    for (t, c) in column(&csv, "t").iter().zip(column(&csv, "c_envelope")) {
        assert!((c - 1.0 / (1.0 + t / d0)).abs() <= 1e-9, "t = {t}: {c}");
    }
}

#[test]
fn falsified_run_exits_one_and_keeps_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("shifted.toml");
    fs::write(&cfg, SMALL_OU.replace("seed = 5", "seed = 5\nrho_shift = 0.5")).unwrap();
    let out = dir.path().join("out");
    let o = run(&["curvature", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    let summary = fs::read_to_string(out.join("summary.toml")).unwrap();
    assert!(summary.contains("status = \"falsified\""));
}

#[test]
fn check_on_ou_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("ou.toml");
    fs::write(&cfg, SMALL_OU).unwrap();
    let out = dir.path().join("out");
    let o = run(&["check", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let csv = fs::read_to_string(out.join("inequalities.csv")).unwrap();
    assert!(csv.starts_with("kind,s,t,worst_residual,tolerance,pass\ncommutation,"));
}

#[test]
fn ou_demo_with_negative_rate() {
    let o = run(&["ou-demo", "--lambda", "-1", "--x", "1", "--y", "-1", "--points", "10"]);
    assert_eq!(code(&o), 0);
    let csv = String::from_utf8(o.stdout).unwrap();
    let alpha = column(&csv, "alpha");
    // limit −λ(x − y)²/2 = 2
    assert!((alpha.last().unwrap() - 2.0).abs() < 1e-6);
    assert!(alpha.windows(2).all(|w| w[1] < w[0]));
    assert!(csv.lines().nth(1).unwrap().ends_with("exponential_to_positive_limit"));

    let dir = tempfile::tempdir().unwrap();
    let o = run(&["ou-demo", "--lambda", "0.5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    for r in ["exponential_to_zero", "algebraic_to_zero", "exponential_to_positive_limit"] {
        assert!(dir.path().join(format!("ou_alpha_{r}.csv")).exists());
    }
}

#[test]
fn heat_demo_writes_asymptotics() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["heat-demo", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let csv = fs::read_to_string(dir.path().join("asymptotics.csv")).unwrap();
    let h = column(&csv, "H_vs_fundamental");
    assert!(h.windows(2).all(|w| w[1] < w[0]));
    assert!(*column(&csv, "l1_to_gaussian").last().unwrap() <= 0.05);
}

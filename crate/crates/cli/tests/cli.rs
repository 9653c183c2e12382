use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_layerheat"))
}

fn config(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

#[test]
fn solve_is_deterministic_and_self_describing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("homogeneous.toml");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = run(&["solve", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", text(&o.stderr));
    }
    let first = std::fs::read(a.join("solution.csv")).unwrap();
    assert_eq!(first, std::fs::read(b.join("solution.csv")).unwrap());
    let csv = text(&first);
    assert!(csv.contains("# config_sha256 = "));
    assert!(csv.contains("# weight_mode = calibrated"));
    assert!(csv.lines().any(|l| l == "t,x,y1,layer,u"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 3 * 81);
}

#[test]
fn solution_matches_widened_gaussian() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("homogeneous.toml");
    let o = run(&["solve", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let csv = std::fs::read_to_string(dir.path().join("solution.csv")).unwrap();
    for line in csv.lines().filter(|l| !l.starts_with('#')).skip(1) {
        let v: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        let (t, x, y, u) = (v[0], v[1], v[2], v[4]);
        let var = 0.25 + 2.0 * t;
        let want = 0.25 / var * (-(x * x + y * y) / (2.0 * var)).exp();
        assert!((u - want).abs() <= 1e-6, "{line}: {want}");
    }
}

#[test]
fn verify_passes_on_both_configs() {
    for name in ["homogeneous.toml", "two_layer.toml"] {
        let o = run(&["verify", "--config", config(name).to_str().unwrap()]);
        let out = text(&o.stdout);
        assert!(o.status.success(), "{name}: {out}{}", text(&o.stderr));
        assert_eq!(out.matches(": PASS").count(), 3, "{out}");
    }
    let o = run(&["verify", "--config", config("two_layer.toml").to_str().unwrap(), "--suite", "kernels"]);
    assert_eq!(text(&o.stdout).matches(": PASS").count(), 1);
}

#[test]
fn compare_reports_small_error_and_fails_tight_tolerance() {
    let cfg = config("two_layer.toml");
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["compare", "--config", cfg.to_str().unwrap(), "--fd-h", "0.02", "--fd-dt", "0.001", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let csv = text(&o.stdout);
    assert_eq!(csv, std::fs::read_to_string(dir.path().join("compare.csv")).unwrap());
    let all = csv.lines().find(|l| l.starts_with("all,")).unwrap();
    let l2: f64 = all.split(',').nth(2).unwrap().parse().unwrap();
    assert!(l2 <= 1e-2, "{all}");
    assert!(csv.lines().any(|l| l.starts_with("layer 1,")));
    let o = run(&["compare", "--config", cfg.to_str().unwrap(), "--fd-h", "0.04", "--fd-dt", "0.004", "--tolerance", "1e-9"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn kernels_table() {
    let o = run(&["kernels", "--config", config("two_layer.toml").to_str().unwrap(), "--grid", "rho=0.5,2;x=-1:1:3;xi=-0.3;s=0"]);
    // x = 0 sits on the interface
    assert_eq!(o.status.code(), Some(2), "{}", text(&o.stderr));
    let o = run(&["kernels", "--config", config("two_layer.toml").to_str().unwrap(), "--grid", "rho=0.5,2;x=-1,1;xi=-0.3;s=0,1"]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let out = text(&o.stdout);
    let rows: Vec<&str> = out.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 8);
    for r in rows {
        let f: Vec<&str> = r.split(',').collect();
        let (v, c): (f64, f64) = (f[6].parse().unwrap(), f[8].parse().unwrap());
        assert!((v - c).abs() <= 1e-9 * c.abs().max(1.0), "{r}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["solve"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    assert_eq!(run(&["verify", "--config", "/nonexistent.toml"]).status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "transverse_dim = 1\ntimes = [0.1]\n[medium]\ninterfaces = [0.0]\ndiffusivity = [1.0, 2.0]\n[coupling]\nkind = \"ideal\"\n").unwrap();
    let o = run(&["verify", "--config", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(text(&o.stderr).contains("nu"), "{}", text(&o.stderr));
    let o = run(&["kernels", "--config", config("two_layer.toml").to_str().unwrap(), "--grid", "rho=1"]);
    assert_eq!(o.status.code(), Some(1));
}

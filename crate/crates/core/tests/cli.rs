use std::path::Path;
use std::process::{Command, Output};

use reiflab::exponents::alpha_max_cor1;

fn reiflab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reiflab")).args(args).output().expect("binary runs")
}

fn report_value(dir: &Path, key: &str) -> f64 {
    let md = std::fs::read_to_string(dir.join("report.md")).unwrap();
    let line = md.lines().find(|l| l.starts_with(key)).unwrap_or_else(|| panic!("no {key:?} in report"));
    line[key.len()..].trim().parse().unwrap()
}

#[test]
fn exponents_table_matches_the_library() {
    let dir = tempfile::tempdir().unwrap();
    let out = reiflab(&["exponents", "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("cor1.csv")).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let (ni, qi, ai) = (
        header.iter().position(|h| *h == "n").unwrap(),
        header.iter().position(|h| *h == "q").unwrap(),
        header.iter().position(|h| *h == "alpha_max").unwrap(),
    );
    let mut rows = 0;
    for l in lines {
        let cells: Vec<&str> = l.split(',').collect();
        let n: u32 = cells[ni].parse().unwrap();
        let q: f64 = cells[qi].parse().unwrap();
        let a: f64 = cells[ai].parse().unwrap();
        assert_eq!(a, alpha_max_cor1(n, q).alpha_max, "n = {n}, q = {q}");
        rows += 1;
    }
    assert_eq!(rows, 4 * 3);
}

#[test]
fn solve_on_the_disk_reports_the_centre_value() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("disk.toml");
    std::fs::write(&cfg, "[domain]\nkind = \"disk\"\nsides = 315\n\n[mesh]\nh = 0.02\n\n[source]\nkind = \"constant\"\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = reiflab(&["solve", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let u0 = report_value(&out_dir, "- u(0, 0) =");
    assert!((u0 - 0.25).abs() < 5e-3, "u(0) = {u0}");
    for f in ["mesh.off", "solution.csv", "run_log.json", "report.md"] {
        assert!(out_dir.join(f).exists(), "{f} missing");
    }
}

#[test]
fn flat_square_fractal_reports_corner_flatness() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("sq.toml");
    std::fs::write(&cfg, "[domain]\nkind = \"koch\"\nbase = \"square\"\nbump = 0.0\ndepth = 2\n").unwrap();
    let out_dir = dir.path().join("out");
    let out = reiflab(&["check-flatness", "--config", cfg.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let eps = report_value(&out_dir, "- eps_global:");
    assert!((0.35..=0.45).contains(&eps), "eps_global {eps}");
}

#[test]
fn failed_check_and_bad_config_have_distinct_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[mesh]\nhh = 0.1\n").unwrap();
    let out = reiflab(&["solve", "--config", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));

    // A square corner is far too rough for beta = 1.9.
    let strict = dir.path().join("strict.toml");
    std::fs::write(&strict, "[domain]\nkind = \"square\"\n\n[flatness]\nbeta = 1.9\n").unwrap();
    let out = reiflab(&["check-flatness", "--config", strict.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("check failed"));
}

#[test]
fn seed_flag_changes_the_fractal() {
    let dir = tempfile::tempdir().unwrap();
    let run = |seed: &str| {
        let o = dir.path().join(seed);
        let out = reiflab(&["generate-domain", "--seed", seed, "--out", o.to_str().unwrap()]);
        assert!(out.status.success());
        std::fs::read_to_string(o.join("domain.json")).unwrap()
    };
    assert_eq!(run("3"), run("3"));
    assert_ne!(run("3"), run("4"));
}

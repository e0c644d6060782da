use std::path::Path;
use std::process::{Command, Output};

fn shearlift(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_shearlift")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

const FS: &str = "lambda = 1.5\n[potential]\nkind = \"fubini_study\"\n";

#[test]
fn check_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let fs = write(dir.path(), "fs.toml", FS);
    assert_eq!(shearlift(&["check", "--config", &fs]).status.code(), Some(0));

    let degenerate = write(dir.path(), "x.toml", "lambda = 0\n[potential]\nkind = \"custom\"\nexpr = \"x\"\n");
    let out = shearlift(&["check", "--config", &degenerate]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("pseudoconvex"));

    let bad = write(dir.path(), "bad.toml", "lambda = [\n");
    assert_eq!(shearlift(&["check", "--config", &bad]).status.code(), Some(2));
    let unknown = write(dir.path(), "u.toml", "lambda = 1\nfoo = 2\n[potential]\nkind = \"flat\"\n");
    assert_eq!(shearlift(&["verify", "--config", &unknown]).status.code(), Some(2));
    assert_eq!(shearlift(&["check", "--config", "/nonexistent/cfg.toml"]).status.code(), Some(2));
    assert_eq!(shearlift(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn lift_branches() {
    let dir = tempfile::tempdir().unwrap();
    let flat = write(dir.path(), "flat.toml", "lambda = 0\nmode = \"constant\"\n[potential]\nkind = \"flat\"\n");
    let out = shearlift(&["lift", "--config", &flat]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no constant solution: Λ₀ = 0"));

    let fs = write(dir.path(), "fs.toml", FS);
    let out_dir = dir.path().join("fs");
    let out = shearlift(&["lift", "--config", &fs, "--json", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["solver"]["branch"], "constant");
    assert!((v["solver"]["q_constant"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!(out_dir.join("profile.json").exists());

    let tub = write(dir.path(), "tub.toml", "lambda = 1\nmode = \"ode\"\n[potential]\nkind = \"tubular\"\n");
    let tub_dir = dir.path().join("tub");
    assert_eq!(shearlift(&["lift", "--config", &tub, "--out", tub_dir.to_str().unwrap()]).status.code(), Some(0));
    let ode = std::fs::read_to_string(tub_dir.join("ode.csv")).unwrap();
    assert!(ode.starts_with("y,q,dq\n"));
    assert!(ode.lines().count() > 100);
}

#[test]
fn verify_verdicts_and_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        (FS, "einstein", 0),
        ("lambda = 0\n[potential]\nkind = \"harmonic\"\n", "einstein", 0),
        ("lambda = 1\n[potential]\nkind = \"tubular\"\n", "quasi_einstein", 0),
        ("lambda = 0\n[potential]\nkind = \"frt\"\n", "fail", 1),
    ];
    for (i, (cfg, verdict, code)) in cases.into_iter().enumerate() {
        let path = write(dir.path(), &format!("{i}.toml"), cfg);
        let out_dir = dir.path().join(format!("out{i}"));
        let out = shearlift(&["verify", "--config", &path, "--json", "--out", out_dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(code), "{cfg}");
        let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
        assert_eq!(v["verdict"], verdict, "{cfg}");
        assert_eq!(v["curvature"]["samples"].as_array().unwrap().len(), 20);
        let csv = std::fs::read_to_string(out_dir.join("residuals.csv")).unwrap();
        assert!(csv.starts_with("x,y,u,r,component,value\n"));
        let on_disk: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
        assert_eq!(on_disk, v);
        if verdict == "quasi_einstein" {
            assert!(v["curvature"]["max_phi"].as_f64().unwrap() > 1.0);
        }
    }
}

const GRID_LIFT: &str = r#"lambda = 1.5
mode = "pde"

[potential]
kind = "custom"
expr = "log(1 + x^2 + y^2) + 0.1*x^2"
domain = { type = "rect", x = [-0.5, 0.5], y = [-0.5, 0.5] }

[grid]
n = 81
"#;

#[test]
fn grid_lift_of_custom_potential() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "g.toml", GRID_LIFT);
    let out = shearlift(&["verify", "--config", &path, "--json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["verdict"], "quasi_einstein");
    assert!(v["curvature"]["pattern_residual"].as_f64().unwrap() < 1e-3);
    assert!(v["solver"]["description"].as_str().unwrap().contains("extrapolated"), "{v}");

    // without extrapolation the O(h^2) error dominates near the grid edge
    let path = write(dir.path(), "raw.toml", &GRID_LIFT.replace("n = 81", "n = 81\nextrapolate = false"));
    let out = shearlift(&["verify", "--config", &path, "--json"]);
    let raw: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(raw["curvature"]["pattern_residual"].as_f64().unwrap() > v["curvature"]["pattern_residual"].as_f64().unwrap());
}

#[test]
fn reports_are_deterministic_per_seed() {
    let dir = tempfile::tempdir().unwrap();
    let path = write(dir.path(), "t.toml", "lambda = -1\n[potential]\nkind = \"tubular\"\n");
    let a = shearlift(&["verify", "--config", &path, "--json", "--seed", "3"]);
    let b = shearlift(&["verify", "--config", &path, "--json", "--seed", "3"]);
    let c = shearlift(&["verify", "--config", &path, "--json", "--seed", "4"]);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn catalog_lists_six_entries() {
    let out = shearlift(&["catalog", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 6);
    let text = String::from_utf8(shearlift(&["catalog"]).stdout).unwrap();
    for name in ["flat", "fubini_study", "poincare", "harmonic", "tubular", "frt"] {
        assert!(text.contains(name));
    }
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn scri_solve(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scri-solve")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.display().to_string()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.cfg", "medium = short-range\nkappa = 0.5\nk = 3\nm = 0, 2\nnrho = 8, 16, 24\n");
    let out = dir.path().join("out");
    let run = || {
        let r = scri_solve(&["modal-convergence", "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(r.status.code(), Some(0), "{}", stderr(&r));
        ["modal-convergence.csv", "modal-convergence.json"].map(|f| fs::read(out.join(f)).unwrap())
    };
    assert_eq!(run(), run());
    let csv = fs::read_to_string(out.join("modal-convergence.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "m,k,kappa,n_rho,n_theta,error,unitarity_defect,condition");
    assert_eq!(lines.len(), 1 + 2 * 3);
    // Config order, not completion order.
    let nrho: Vec<&str> = lines[1..].iter().map(|l| l.split(',').nth(3).unwrap()).collect();
    assert_eq!(nrho, ["8", "16", "24", "8", "16", "24"]);
}

#[test]
fn manifest_lists_outputs_and_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.cfg", "# beam run\nbeta = 1\nnrho = 12\nntheta = 32\n");
    let out = dir.path().join("beam");
    let r = scri_solve(&["beam-compare", "--config", &cfg, "--out", out.to_str().unwrap(), "--k", "1.5"]);
    assert_eq!(r.status.code(), Some(0), "{}", stderr(&r));
    let manifest: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["tool"], "scri");
    assert_eq!(manifest["experiment"], "beam-compare");
    assert_eq!(manifest["config"]["k"], serde_json::json!([1.5]));
    assert_eq!(manifest["raw_config"]["k"], "1.5");
    assert_eq!(manifest["raw_config"]["beta"], "1");
    let files: Vec<&str> = manifest["files"].as_array().unwrap().iter().map(|v| v.as_str().unwrap()).collect();
    assert_eq!(files, ["beam-compare.csv", "beam-compare-field.csv", "beam-compare.json"]);
    for f in files {
        assert!(out.join(f).is_file());
    }
    assert!(manifest["wall_seconds"]["total"].as_f64().unwrap() >= 0.0);
    let field = fs::read_to_string(out.join("beam-compare-field.csv")).unwrap();
    assert_eq!(field.lines().count(), 1 + 32);
}

#[test]
fn long_range_on_hyperbolic_route_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.cfg", "medium = long-range\nkappa = 0.5\nk = 2\nm = 0\n");
    let r = scri_solve(&["scattering-map", "--config", &cfg, "--route", "hyperbolic", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    assert!(stderr(&r).contains("rate condition"), "{}", stderr(&r));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("nope.cfg");
    let r = scri_solve(&["scattering-map", "--config", missing.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    assert!(stderr(&r).contains("nope.cfg"));

    let cfg = write_config(dir.path(), "bad.cfg", "colour = blue\n");
    assert_eq!(scri_solve(&["scattering-map", "--config", &cfg]).status.code(), Some(2));

    let cfg = write_config(dir.path(), "ok.cfg", "k = 2\nm = 0\n");
    let r = scri_solve(&["scattering-map", "--config", &cfg, "--nrho", "500"]);
    assert_eq!(r.status.code(), Some(2), "{}", stderr(&r));
}

#[test]
fn unwritable_output_is_reported_with_its_path() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let cfg = write_config(dir.path(), "ok.cfg", "k = 2\nm = 0\nnrho = 8\n");
    let target = blocker.join("sub");
    let r = scri_solve(&["scattering-map", "--config", &cfg, "--out", target.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(2));
    assert!(stderr(&r).contains(target.to_str().unwrap()), "{}", stderr(&r));
}

#[test]
fn check_mode_turns_failed_checks_into_exit_four() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.cfg", "k = 12\nm = 8\nnrho = 8\ntolerance = 1e-8\n");
    let out = dir.path().join("o");
    let out = out.to_str().unwrap();
    let relaxed = scri_solve(&["scattering-map", "--config", &cfg, "--out", out]);
    assert_eq!(relaxed.status.code(), Some(0));
    let strict = scri_solve(&["scattering-map", "--config", &cfg, "--out", out, "--check"]);
    assert_eq!(strict.status.code(), Some(4));
    assert!(stderr(&strict).contains("FAIL"));
    let passing = scri_solve(&["scattering-map", "--config", &cfg, "--out", out, "--nrho", "48", "--check"]);
    assert_eq!(passing.status.code(), Some(0), "{}", stderr(&passing));
}

#[test]
fn flags_accept_negative_modes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.cfg", "k = 4\nnrho = 24\n");
    let out = dir.path().join("o");
    let r = scri_solve(&["scattering-map", "--config", &cfg, "--m", "-3,3", "--out", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(0), "{}", stderr(&r));
    let csv = fs::read_to_string(out.join("scattering-map.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    assert_eq!(rows[0][0], "-3");
    // S depends on |m| only.
    assert_eq!(rows[0][5..7], rows[1][5..7]);
}

use std::path::Path;
use std::process::{Command, Output};

fn polyvem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyvem")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn bar_config(dir: &Path, dt: &str, v0: &str) -> std::path::PathBuf {
    bar_config_with(dir, dt, v0, "{}")
}

fn bar_config_with(dir: &Path, dt: &str, v0: &str, newton: &str) -> std::path::PathBuf {
    let text = r#"{
  "name": "cli_bar",
  "mesh": { "generate": { "kind": "structured", "family": "q1", "divisions": [4, 1], "lo": [0, 0], "hi": [30, 5] } },
  "material": { "youngs_modulus": 210000, "poisson_ratio": 0.3, "density": 2.7e-9 },
  "bcs": [
    { "kind": "fixed", "set": "x_min" },
    { "kind": "initial_velocity", "set": "all", "value": [V0, 0] }
  ],
  "mass_scheme": "exact",
  "newton": NEWTON,
  "time": { "dt": DT, "t_end": 4e-6 },
  "probes": [ { "name": "tip", "point": [30, 5] } ],
  "output": { "directory": "results" }
}"#
    .replace("DT", dt)
    .replace("V0", v0)
    .replace("NEWTON", newton);
    let p = dir.join("bar.json");
    std::fs::write(&p, text).unwrap();
    p
}

#[test]
fn run_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = bar_config(dir.path(), "2e-7", "20000");
    let o = polyvem(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("cli_bar: 4 elements"));
    let csv = std::fs::read_to_string(dir.path().join("results/tip.csv")).unwrap();
    assert!(csv.starts_with("t,u_x,u_y,v_x,v_y,a_x,a_y\n"));
    assert_eq!(csv.lines().count(), 22);
    assert!(dir.path().join("results/summary.json").exists());
}

#[test]
fn output_directory_can_be_overridden() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = bar_config(dir.path(), "2e-7", "20000");
    let out = dir.path().join("elsewhere");
    let o = polyvem(&["run", cfg.to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(out.join("tip.csv").exists());
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = bar_config(dir.path(), "0", "20000");
    let o = polyvem(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("dt"));
    assert_eq!(polyvem(&["run", "/nonexistent/config.json"]).status.code(), Some(2));
    assert_eq!(polyvem(&["mesh", "{\"kind\": \"nope\"}", "-o", "x.json"]).status.code(), Some(2));
    assert_eq!(polyvem(&["verify", "patch", "--mesh", "hexagon"]).status.code(), Some(2));
    assert_eq!(polyvem(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn solver_failures_exit_3() {
    // crushing the bar at ten times the wave speed inverts the first element
    let dir = tempfile::tempdir().unwrap();
    let cfg = bar_config_with(dir.path(), "4e-6", "-5e7", r#"{"max_cuts": 0, "max_step_splits": 0}"#);
    let o = polyvem(&["run", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn mesh_command_writes_loadable_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("vor.json");
    let spec = r#"{"kind": "voronoi", "cells": 10, "seed": 3, "lo": [0, 0], "hi": [1, 1]}"#;
    let o = polyvem(&["mesh", spec, "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("10 elements"));
    let mesh = polyvem::mesh::load_mesh(&out).unwrap();
    assert_eq!(mesh.elements.len(), 10);

    let spec_file = dir.path().join("spec.json");
    std::fs::write(&spec_file, r#"{"kind": "cook", "n": 1}"#).unwrap();
    let out = dir.path().join("cook.json");
    let o = polyvem(&["mesh", spec_file.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("4 elements"));
}

#[test]
fn analytic_bar_matches_library() {
    let o = polyvem(&["analytic", "bar", "--x", "10", "30", "--t", "0", "1e-6", "1e-5"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,t,u"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 6);
    let c = polyvem::bench::MaterialConfig::table().wave_speed();
    for r in &rows {
        let want = polyvem::bench::analytical_bar_displacement_with_factor(
            r[0],
            r[1],
            2e4,
            c,
            30.0,
            2000,
            polyvem::bench::DEFAULT_OMEGA_FACTOR,
        );
        assert!((r[2] - want).abs() <= 1e-11 * want.abs().max(1e-12));
    }
    assert_eq!(rows[0][2], 0.0);
    // before the wave returns from the clamp, the tip moves at v0 / factor
    assert!((rows[4][2] - 0.95 * 2e4 * 1e-6).abs() < 1e-7);
}

#[test]
fn analytic_omega_factor_changes_the_series() {
    let a = stdout(&polyvem(&["analytic", "bar", "--x", "30", "--t", "2e-5"]));
    let b = stdout(&polyvem(&["analytic", "bar", "--x", "30", "--t", "2e-5", "--omega-factor", "1"]));
    assert_ne!(a, b);
    let early = stdout(&polyvem(&["analytic", "bar", "--x", "30", "--t", "1e-6", "--omega-factor", "1"]));
    let u: f64 = early.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!((u - 2e4 * 1e-6).abs() < 1e-7);
    assert_eq!(polyvem(&["analytic", "bar", "--x", "1", "--t", "0", "--omega-factor", "0"]).status.code(), Some(2));
}

#[test]
fn verify_mass_passes() {
    let o = polyvem(&["verify", "mass"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().last().unwrap().starts_with("PASS mass"));
}

#[test]
fn verify_patch_single_family() {
    let o = polyvem(&["verify", "patch", "--dim", "2", "--mesh", "q2s"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(!stdout(&o).contains("FAIL"));
}

#[test]
fn verify_fd_single_state() {
    let o = polyvem(&["verify", "fd", "--elements", "q1,h1", "--states", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(polyvem(&["verify", "fd", "--states", "0"]).status.code(), Some(2));
}

#[test]
fn preset_prints_a_runnable_config() {
    let o = polyvem(&["preset", "bar2d"]);
    assert_eq!(o.status.code(), Some(0));
    let cfg = polyvem::bench::SimulationConfig::from_json(&stdout(&o), None).unwrap();
    assert_eq!(cfg.material, polyvem::bench::MaterialConfig::table());
    assert_eq!(polyvem(&["preset", "nonexistent"]).status.code(), Some(2));
}

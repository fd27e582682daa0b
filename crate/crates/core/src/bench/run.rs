//! Configuration-driven simulation runs.

use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use serde::Serialize;

use super::config::SimulationConfig;
use super::output::{vtk_snapshot, History};
use crate::assembly::Model;
use crate::dynamics::{Integrator, State};
use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EnergyRecord {
    pub t: f64,
    pub kinetic: f64,
    pub strain: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunSummary {
    pub name: String,
    pub dimension: usize,
    pub elements: usize,
    pub dofs: usize,
    pub free_dofs: usize,
    pub dt: f64,
    pub steps: usize,
    pub newton_iterations: usize,
    pub max_newton_iterations: usize,
    pub step_cuts: usize,
    pub step_splits: usize,
    pub wall_time_s: f64,
    pub probes: BTreeMap<String, usize>,
    pub energy: Vec<EnergyRecord>,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub summary: RunSummary,
    pub histories: BTreeMap<String, History>,
    /// `(time, VTK text)`.
    pub snapshots: Vec<(f64, String)>,
    pub final_state: State,
}

/// Number of steps covering `[0, t_end]`.
pub fn step_count(dt: f64, t_end: f64) -> usize {
    let n = t_end / dt;
    let r = n.round();
    if (n - r).abs() < 1e-9 * n.max(1.0) {
        r as usize
    } else {
        n.ceil() as usize
    }
}

pub fn build_model(cfg: &SimulationConfig) -> Result<Model> {
    cfg.validate_static()?;
    let mesh = cfg.build_mesh()?;
    Model::new(mesh, cfg.material.build()?, cfg.model_options(), &cfg.bcs)
}

/// Runs the configured simulation in memory.
pub fn simulate(cfg: &SimulationConfig) -> Result<RunResult> {
    let model = build_model(cfg)?;
    simulate_model(cfg, &model)
}

pub fn simulate_model(cfg: &SimulationConfig, model: &Model) -> Result<RunResult> {
    let start = Instant::now();
    let probes = cfg.probe_nodes(&model.mesh)?;
    let d = model.dim();
    let dt = cfg.time.dt;
    let steps = step_count(dt, cfg.time.t_end);
    let every = cfg.output.history_every;
    let snapshot_steps: Vec<(usize, f64)> = cfg
        .output
        .snapshot_times
        .iter()
        .map(|&t| (((t / dt).round().max(0.0) as usize).min(steps), t))
        .collect();

    let integrator = Integrator::new(model, cfg.newmark, cfg.newton, dt)?;
    let mut state = integrator.initial_state()?;
    let mut histories: BTreeMap<String, History> =
        probes.iter().map(|(name, node)| (name.clone(), History::new(*node))).collect();
    let mut energy = Vec::new();
    let mut snapshots = Vec::new();
    let mut record = |k: usize, s: &State, histories: &mut BTreeMap<String, History>| -> Result<()> {
        if k.is_multiple_of(every) || k == steps {
            for h in histories.values_mut() {
                let dofs = h.node * d..h.node * d + d;
                h.t.push(s.t);
                h.u.push(s.u[dofs.clone()].to_vec());
                h.v.push(s.v[dofs.clone()].to_vec());
                h.a.push(s.a[dofs].to_vec());
            }
            let (kinetic, strain) = integrator.energies(s)?;
            energy.push(EnergyRecord { t: s.t, kinetic, strain });
        }
        for &(_, t) in snapshot_steps.iter().filter(|(ks, _)| *ks == k) {
            let title = format!("{} t={:.6e} (requested {t:.6e})", cfg.name, s.t);
            snapshots.push((s.t, vtk_snapshot(&model.mesh, &s.u, &s.v, &title)));
        }
        Ok(())
    };
    record(0, &state, &mut histories)?;
    let (mut total_its, mut max_its, mut cuts, mut splits) = (0, 0, 0, 0);
    for k in 1..=steps {
        let (next, report) = integrator.step(&state)?;
        state = State {
            // avoid drift of the accumulated time
            t: k as f64 * dt,
            ..next
        };
        total_its += report.iterations;
        max_its = max_its.max(report.iterations);
        cuts += report.cuts;
        splits += report.splits;
        record(k, &state, &mut histories)?;
    }
    let summary = RunSummary {
        name: cfg.name.clone(),
        dimension: d,
        elements: model.mesh.elements.len(),
        dofs: model.n_dofs,
        free_dofs: model.free.len(),
        dt,
        steps,
        newton_iterations: total_its,
        max_newton_iterations: max_its,
        step_cuts: cuts,
        step_splits: splits,
        wall_time_s: start.elapsed().as_secs_f64(),
        probes: probes.into_iter().collect(),
        energy,
    };
    Ok(RunResult {
        summary,
        histories,
        snapshots,
        final_state: state,
    })
}

/// Writes `<probe>.csv`, `snapshot_<k>.vtk` and `summary.json` into the output directory.
pub fn write_outputs(cfg: &SimulationConfig, result: &RunResult) -> Result<Vec<PathBuf>> {
    let dir = &cfg.output.directory;
    std::fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for (name, h) in &result.histories {
        let p = dir.join(format!("{name}.csv"));
        std::fs::write(&p, h.to_csv(result.summary.dimension))?;
        written.push(p);
    }
    for (k, (_, vtk)) in result.snapshots.iter().enumerate() {
        let p = dir.join(format!("snapshot_{k:03}.vtk"));
        std::fs::write(&p, vtk)?;
        written.push(p);
    }
    let p = dir.join("summary.json");
    std::fs::write(&p, serde_json::to_string_pretty(&result.summary).expect("summary serializes"))?;
    written.push(p);
    Ok(written)
}

pub fn run(cfg: &SimulationConfig) -> Result<(RunResult, Vec<PathBuf>)> {
    let result = simulate(cfg)?;
    let files = write_outputs(cfg, &result)?;
    Ok((result, files))
}

//! Benchmark problems, configuration, runs, outputs and self-checks.

pub mod analytic;
pub mod config;
pub mod output;
pub mod presets;
pub mod run;
pub mod verify;

pub use analytic::{
    analytical_bar_displacement, analytical_bar_displacement_with_factor, beam_force_period, cantilever_first_period,
    clamped_plate_first_period, DEFAULT_OMEGA_FACTOR,
};
pub use config::{MaterialConfig, MeshSource, MeshSpec, OutputConfig, Probe, ProbeTarget, SimulationConfig, TimeConfig};
pub use output::{vtk_snapshot, History};
pub use presets::{BenchmarkPreset, PresetConstants};
pub use run::{build_model, run, simulate, simulate_model, write_outputs, RunResult, RunSummary};

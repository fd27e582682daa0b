//! Benchmark problems with their geometry, loads and default discretizations.

use serde::{Deserialize, Serialize};

use super::analytic::{cantilever_first_period, clamped_plate_first_period};
use super::config::{MaterialConfig, MeshSource, MeshSpec, OutputConfig, Probe, ProbeTarget, SimulationConfig, TimeConfig};
use crate::assembly::{BoundaryCondition, TimeFunction};
use crate::dynamics::{NewmarkParams, NewtonSettings};
use crate::mass::MassScheme;
use crate::mesh::StructuredKind;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BenchmarkPreset {
    Bar2D,
    TransversalBeam2D,
    Cooks2D,
    Bar3D,
    Beam3D,
    Plate3D,
}

/// Geometry and load constants of a benchmark (N, mm, s).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PresetConstants {
    pub length: f64,
    pub height: f64,
    pub width: f64,
    pub v0: f64,
    pub p_max: f64,
    /// Half-sine load duration.
    pub period: f64,
}

/// Duration of the Cook half-sine pulse.
pub const COOK_PERIOD: f64 = 1e-4;

impl BenchmarkPreset {
    pub const ALL: [BenchmarkPreset; 6] = [
        BenchmarkPreset::Bar2D,
        BenchmarkPreset::TransversalBeam2D,
        BenchmarkPreset::Cooks2D,
        BenchmarkPreset::Bar3D,
        BenchmarkPreset::Beam3D,
        BenchmarkPreset::Plate3D,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BenchmarkPreset::Bar2D => "bar2d",
            BenchmarkPreset::TransversalBeam2D => "transversal_beam2d",
            BenchmarkPreset::Cooks2D => "cooks2d",
            BenchmarkPreset::Bar3D => "bar3d",
            BenchmarkPreset::Beam3D => "beam3d",
            BenchmarkPreset::Plate3D => "plate3d",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        let key = name.to_ascii_lowercase().replace('-', "_");
        Self::ALL.into_iter().find(|p| p.name() == key)
    }

    pub fn constants(self) -> PresetConstants {
        let m = MaterialConfig::table();
        let beam_period = cantilever_first_period(m.youngs_modulus, m.density, 30.0, 5.0);
        match self {
            BenchmarkPreset::Bar2D => PresetConstants {
                length: 30.0,
                height: 0.3,
                width: 1.0,
                v0: 2.0e4,
                p_max: 0.0,
                period: 0.0,
            },
            BenchmarkPreset::TransversalBeam2D => PresetConstants {
                length: 30.0,
                height: 5.0,
                width: 1.0,
                v0: 0.0,
                p_max: 1.0e5,
                period: beam_period,
            },
            BenchmarkPreset::Cooks2D => PresetConstants {
                length: 48.0,
                height: 16.0,
                width: 1.0,
                v0: 0.0,
                p_max: 1.0e7,
                period: COOK_PERIOD,
            },
            BenchmarkPreset::Bar3D => PresetConstants {
                length: 30.0,
                height: 5.0,
                width: 5.0,
                v0: 2.0e4,
                p_max: 0.0,
                period: 0.0,
            },
            BenchmarkPreset::Beam3D => PresetConstants {
                length: 30.0,
                height: 5.0,
                width: 5.0,
                v0: 0.0,
                p_max: 6.0e3,
                period: beam_period,
            },
            BenchmarkPreset::Plate3D => PresetConstants {
                length: 30.0,
                height: 5.0,
                width: 30.0,
                v0: 2.0e5,
                p_max: 0.0,
                period: 0.0,
            },
        }
    }

    /// Default configuration; mesh resolution and time span are desk scale.
    pub fn config(self) -> SimulationConfig {
        let k = self.constants();
        let m = MaterialConfig::table();
        let c = m.wave_speed();
        let (l, h, b) = (k.length, k.height, k.width);
        let fixed = |set: &str, components: Option<Vec<usize>>| BoundaryCondition::Fixed {
            set: set.into(),
            components,
        };
        let probe = |name: &str, point: Vec<f64>| Probe {
            name: name.into(),
            target: ProbeTarget::Point { point },
        };
        let half_sine = TimeFunction::HalfSine {
            p_max: k.p_max,
            period: k.period,
        };
        let structured = |family, divisions: Vec<usize>, hi: Vec<f64>| MeshSpec::Structured {
            family,
            lo: vec![0.0; hi.len()],
            divisions,
            hi,
        };
        let (mesh, bcs, probes, time) = match self {
            BenchmarkPreset::Bar2D => (
                structured(StructuredKind::Q2s, vec![100, 4], vec![l, h]),
                vec![
                    fixed("x_min", Some(vec![0])),
                    BoundaryCondition::InitialVelocity {
                        set: "all".into(),
                        value: vec![k.v0, 0.0],
                    },
                ],
                vec![probe("mid", vec![l / 2.0, h / 2.0]), probe("end", vec![l, h / 2.0])],
                TimeConfig {
                    dt: l / (200.0 * c),
                    t_end: 6.0 * l / c,
                },
            ),
            BenchmarkPreset::TransversalBeam2D => (
                structured(StructuredKind::Q2s, vec![20, 5], vec![l, h]),
                vec![
                    fixed("x_min", None),
                    BoundaryCondition::Traction {
                        set: "x_max".into(),
                        value: vec![0.0, -1.0 / h],
                        time_function: half_sine,
                    },
                ],
                vec![probe("mid", vec![l / 2.0, h / 2.0]), probe("tip", vec![l, h / 2.0])],
                TimeConfig {
                    dt: k.period / 100.0,
                    t_end: 4.0 * k.period,
                },
            ),
            BenchmarkPreset::Cooks2D => (
                MeshSpec::Cook { n: 3 },
                vec![
                    fixed("x_min", None),
                    BoundaryCondition::Traction {
                        set: "x_max".into(),
                        value: vec![0.0, 1.0],
                        time_function: half_sine,
                    },
                ],
                vec![probe("vertex", vec![48.0, 60.0])],
                TimeConfig {
                    dt: k.period / 100.0,
                    t_end: 2.0 * k.period,
                },
            ),
            BenchmarkPreset::Bar3D => (
                structured(StructuredKind::H2s, vec![25, 4, 4], vec![l, b, h]),
                vec![
                    fixed("x_min", Some(vec![0])),
                    BoundaryCondition::InitialVelocity {
                        set: "all".into(),
                        value: vec![k.v0, 0.0, 0.0],
                    },
                ],
                vec![
                    probe("mid", vec![l / 2.0, b / 2.0, h / 2.0]),
                    probe("end", vec![l, b / 2.0, h / 2.0]),
                ],
                TimeConfig {
                    dt: l / (200.0 * c),
                    t_end: 6.0 * l / c,
                },
            ),
            BenchmarkPreset::Beam3D => (
                structured(StructuredKind::H2s, vec![16, 4, 4], vec![l, b, h]),
                vec![
                    fixed("x_min", None),
                    // line load over the width, spread across the end face
                    BoundaryCondition::Traction {
                        set: "x_max".into(),
                        value: vec![0.0, 0.0, -1.0 / h],
                        time_function: half_sine,
                    },
                ],
                vec![probe("tip", vec![l, b / 2.0, h / 2.0])],
                TimeConfig {
                    dt: k.period / 100.0,
                    t_end: 2.0 * k.period,
                },
            ),
            BenchmarkPreset::Plate3D => {
                let period = clamped_plate_first_period(m.youngs_modulus, m.poisson_ratio, m.density, l, h);
                (
                    structured(StructuredKind::H2s, vec![8, 8, 2], vec![l, b, h]),
                    vec![
                        fixed("x_min", None),
                        fixed("x_max", None),
                        fixed("y_min", None),
                        fixed("y_max", None),
                        BoundaryCondition::InitialVelocity {
                            set: "all".into(),
                            value: vec![0.0, 0.0, k.v0],
                        },
                    ],
                    vec![probe("centre", vec![l / 2.0, b / 2.0, h / 2.0])],
                    TimeConfig {
                        dt: period / 100.0,
                        t_end: 2.0 * period,
                    },
                )
            }
        };
        SimulationConfig {
            name: self.name().into(),
            mesh: MeshSource::Generate { generate: mesh },
            material: m,
            bcs,
            newmark: NewmarkParams::default(),
            newton: NewtonSettings::default(),
            mass_scheme: MassScheme::Centroid,
            beta_stat: 0.4,
            beta_dyn: 0.0,
            scaled_monomials: false,
            time,
            probes,
            output: OutputConfig {
                directory: format!("{}_output", self.name()).into(),
                ..Default::default()
            },
        }
    }
}

//! JSON simulation configuration.

use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assembly::{BoundaryCondition, ModelOptions};
use crate::dynamics::{NewmarkParams, NewtonSettings};
use crate::error::{Error, Result};
use crate::mass::MassScheme;
use crate::material::NeoHookean;
use crate::mesh::{
    extrude, generate_c_mesh, generate_mapped_q2s, generate_structured, generate_voronoi_2d, load_mesh, Mesh,
    StructuredKind, Vec3,
};
use crate::stabilization::StabilizationConfig;

fn vec3(v: &[f64]) -> Result<Vec3> {
    if v.is_empty() || v.len() > 3 || v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Validation(format!("expected 2 or 3 finite coordinates, got {v:?}")));
    }
    let mut p = Vec3::zeros();
    p.as_mut_slice()[..v.len()].copy_from_slice(v);
    Ok(p)
}

/// Mesh generator specification.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshSpec {
    Structured {
        family: StructuredKind,
        divisions: Vec<usize>,
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    /// Two elements per cell: a C-shaped loop and the rectangle filling its notch.
    CMesh {
        divisions: [usize; 2],
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    /// Clipped Voronoi tessellation of a box from uniformly random or explicit seeds.
    Voronoi {
        #[serde(default)]
        cells: usize,
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        seeds: Vec<Vec<f64>>,
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    /// Tapered Cook panel with corners (0,0), (48,44), (48,60), (0,44), `2^n` Q2S divisions per side.
    Cook { n: u32 },
    Extruded {
        base: Box<MeshSpec>,
        layers: usize,
        thickness: f64,
    },
}

impl MeshSpec {
    pub fn generate(&self) -> Result<Mesh> {
        match self {
            MeshSpec::Structured {
                family,
                divisions,
                lo,
                hi,
            } => generate_structured(*family, divisions, vec3(lo)?, vec3(hi)?),
            MeshSpec::CMesh { divisions, lo, hi } => generate_c_mesh(divisions[0], divisions[1], vec3(lo)?, vec3(hi)?),
            MeshSpec::Voronoi {
                cells,
                seed,
                seeds,
                lo,
                hi,
            } => {
                let (lo, hi) = (vec3(lo)?, vec3(hi)?);
                let pts: Vec<Vec3> = if seeds.is_empty() {
                    if *cells == 0 {
                        return Err(Error::Validation("voronoi mesh needs cells > 0 or explicit seeds".into()));
                    }
                    let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                    (0..*cells)
                        .map(|_| {
                            Vec3::new(
                                lo[0] + (hi[0] - lo[0]) * rng.random::<f64>(),
                                lo[1] + (hi[1] - lo[1]) * rng.random::<f64>(),
                                0.0,
                            )
                        })
                        .collect()
                } else {
                    seeds.iter().map(|s| vec3(s)).collect::<Result<_>>()?
                };
                generate_voronoi_2d(&pts, lo, hi)
            }
            MeshSpec::Cook { n } => {
                if *n > 8 {
                    return Err(Error::Validation(format!("cook refinement {n} too large")));
                }
                let k = 1usize << n;
                generate_mapped_q2s(&[k, k], &cook_map)
            }
            MeshSpec::Extruded {
                base,
                layers,
                thickness,
            } => extrude(&base.generate()?, *layers, *thickness),
        }
    }
}

/// Bilinear map of the unit square onto the Cook panel.
pub fn cook_map(p: Vec3) -> Vec3 {
    let (s, t) = (p[0], p[1]);
    let corners = [(0.0, 0.0), (48.0, 44.0), (48.0, 60.0), (0.0, 44.0)];
    let w = [(1.0 - s) * (1.0 - t), s * (1.0 - t), s * t, (1.0 - s) * t];
    let mut x = Vec3::zeros();
    for (c, wi) in corners.iter().zip(w) {
        x[0] += wi * c.0;
        x[1] += wi * c.1;
    }
    x
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MeshSource {
    File { file: PathBuf },
    Generate { generate: MeshSpec },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialConfig {
    pub youngs_modulus: f64,
    pub poisson_ratio: f64,
    pub density: f64,
}

impl MaterialConfig {
    /// Steel-like parameters used by every benchmark (N, mm, s, tonne).
    pub fn table() -> Self {
        Self {
            youngs_modulus: 210_000.0,
            poisson_ratio: 0.3,
            density: 2.7e-9,
        }
    }

    pub fn build(&self) -> Result<NeoHookean> {
        NeoHookean::from_engineering(self.youngs_modulus, self.poisson_ratio, self.density)
    }

    pub fn wave_speed(&self) -> f64 {
        (self.youngs_modulus / self.density).sqrt()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TimeConfig {
    pub dt: f64,
    pub t_end: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProbeTarget {
    Node { node: usize },
    Point { point: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Probe {
    pub name: String,
    #[serde(flatten)]
    pub target: ProbeTarget,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    /// Record histories and energies every this many steps.
    #[serde(default = "one")]
    pub history_every: usize,
    /// Times at which VTK snapshots are written (nearest step).
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
}

fn one() -> usize {
    1
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("output"),
            history_every: 1,
            snapshot_times: Vec::new(),
        }
    }
}

fn default_beta_stat() -> f64 {
    StabilizationConfig::default().beta_stat
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(default)]
    pub name: String,
    pub mesh: MeshSource,
    pub material: MaterialConfig,
    #[serde(default)]
    pub bcs: Vec<BoundaryCondition>,
    #[serde(default)]
    pub newmark: NewmarkParams,
    #[serde(default)]
    pub newton: NewtonSettings,
    #[serde(default)]
    pub mass_scheme: MassScheme,
    #[serde(default = "default_beta_stat")]
    pub beta_stat: f64,
    #[serde(default)]
    pub beta_dyn: f64,
    #[serde(default)]
    pub scaled_monomials: bool,
    pub time: TimeConfig,
    #[serde(default)]
    pub probes: Vec<Probe>,
    #[serde(default)]
    pub output: OutputConfig,
}

impl SimulationConfig {
    /// Parses JSON; relative mesh and output paths resolve against `base`.
    pub fn from_json(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut cfg: SimulationConfig = serde_json::from_str(text).map_err(|e| Error::Parse {
            location: format!("line {} column {}", e.line(), e.column()),
            message: e.to_string(),
        })?;
        if let Some(base) = base {
            if let MeshSource::File { file } = &mut cfg.mesh {
                if file.is_relative() {
                    *file = base.join(&*file);
                }
            }
            if cfg.output.directory.is_relative() {
                cfg.output.directory = base.join(&cfg.output.directory);
            }
        }
        cfg.validate_static()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text, path.parent())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn model_options(&self) -> ModelOptions {
        ModelOptions {
            stabilization: StabilizationConfig {
                beta_stat: self.beta_stat,
                beta_dyn: self.beta_dyn,
            },
            mass_scheme: self.mass_scheme,
            scaled_monomials: self.scaled_monomials,
        }
    }

    /// Checks that need no mesh.
    pub fn validate_static(&self) -> Result<()> {
        let TimeConfig { dt, t_end } = self.time;
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Validation(format!("time.dt must be positive, got {dt}")));
        }
        if !(t_end >= 0.0 && t_end.is_finite()) {
            return Err(Error::Validation(format!("time.t_end must be non-negative, got {t_end}")));
        }
        if t_end / dt > 1e8 {
            return Err(Error::Validation("more than 1e8 time steps requested".into()));
        }
        if self.output.history_every == 0 {
            return Err(Error::Validation("output.history_every must be at least 1".into()));
        }
        self.model_options().stabilization.validate()?;
        self.newmark.validate()?;
        self.material.build()?;
        let mut names = std::collections::BTreeSet::new();
        for p in &self.probes {
            if p.name.is_empty() || !p.name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-') {
                return Err(Error::Validation(format!("probe name '{}' must be alphanumeric", p.name)));
            }
            if !names.insert(&p.name) {
                return Err(Error::Validation(format!("duplicate probe name '{}'", p.name)));
            }
        }
        Ok(())
    }

    pub fn build_mesh(&self) -> Result<Mesh> {
        match &self.mesh {
            MeshSource::File { file } => load_mesh(file),
            MeshSource::Generate { generate } => generate.generate(),
        }
    }

    /// Resolves probes to node ids against a mesh.
    pub fn probe_nodes(&self, mesh: &Mesh) -> Result<Vec<(String, usize)>> {
        let (lo, hi) = mesh.bbox();
        let tol = 1e-9 * mesh.bbox_diagonal();
        self.probes
            .iter()
            .map(|p| {
                let node = match &p.target {
                    ProbeTarget::Node { node } => {
                        if *node >= mesh.n_nodes() {
                            return Err(Error::Validation(format!("probe '{}' node {node} out of range", p.name)));
                        }
                        *node
                    }
                    ProbeTarget::Point { point } => {
                        let x = vec3(point)?;
                        if point.len() != mesh.dim || (0..mesh.dim).any(|i| x[i] < lo[i] - tol || x[i] > hi[i] + tol) {
                            return Err(Error::Validation(format!(
                                "probe '{}' point {point:?} outside the mesh bounding box",
                                p.name
                            )));
                        }
                        mesh.nearest_node(&x)
                    }
                };
                Ok((p.name.clone(), node))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn minimal() -> &'static str {
        r#"{
            "mesh": {"generate": {"kind": "structured", "family": "q2s", "divisions": [4, 1], "lo": [0, 0], "hi": [4, 1]}},
            "material": {"youngs_modulus": 210000, "poisson_ratio": 0.3, "density": 2.7e-9},
            "bcs": [{"kind": "fixed", "set": "x_min"}],
            "time": {"dt": 1e-7, "t_end": 1e-6},
            "probes": [{"name": "tip", "point": [4, 0.5]}, {"name": "n0", "node": 0}]
        }"#
    }

    #[test]
    fn defaults_and_round_trip() {
        let cfg = SimulationConfig::from_json(minimal(), None).unwrap();
        assert_eq!(cfg.beta_stat, 0.4);
        assert_eq!(cfg.beta_dyn, 0.0);
        assert_eq!(cfg.mass_scheme, MassScheme::Centroid);
        assert_eq!(cfg.newmark, NewmarkParams::default());
        let back = SimulationConfig::from_json(&cfg.to_json(), None).unwrap();
        assert_eq!(back, cfg);
        let mesh = cfg.build_mesh().unwrap();
        let probes = cfg.probe_nodes(&mesh).unwrap();
        assert_eq!(mesh.nodes[probes[0].1].x, Vec3::new(4.0, 0.5, 0.0));
        assert_eq!(probes[1], ("n0".to_string(), 0));
    }

    #[test]
    fn rejects_bad_values() {
        let bad_dt = minimal().replace("\"dt\": 1e-7", "\"dt\": 0");
        assert!(matches!(SimulationConfig::from_json(&bad_dt, None), Err(Error::Validation(_))));
        let bad_beta = minimal().replace("\"bcs\"", "\"beta_stat\": 2, \"bcs\"");
        assert!(SimulationConfig::from_json(&bad_beta, None).is_err());
        let unknown = minimal().replace("\"bcs\"", "\"bogus\": 1, \"bcs\"");
        assert!(matches!(SimulationConfig::from_json(&unknown, None), Err(Error::Parse { .. })));
        let outside = minimal().replace("[4, 0.5]", "[9, 0.5]");
        let cfg = SimulationConfig::from_json(&outside, None).unwrap();
        assert!(cfg.probe_nodes(&cfg.build_mesh().unwrap()).is_err());
    }

    #[test]
    fn mesh_specs_generate() {
        let cook = MeshSpec::Cook { n: 2 }.generate().unwrap();
        assert_eq!(cook.elements.len(), 16);
        let area: f64 = (0..16).map(|e| cook.element_measure_centroid(e).unwrap().0).sum();
        assert!((area - 48.0 * (44.0 + 16.0) / 2.0).abs() < 1e-9);
        let vor = MeshSpec::Voronoi {
            cells: 25,
            seed: 1,
            seeds: vec![],
            lo: vec![0.0, 0.0],
            hi: vec![1.0, 1.0],
        };
        assert_eq!(vor.generate().unwrap().elements.len(), 25);
        assert_eq!(vor.generate().unwrap(), vor.generate().unwrap());
        let ext = MeshSpec::Extruded {
            base: Box::new(vor),
            layers: 2,
            thickness: 0.5,
        };
        let m = ext.generate().unwrap();
        assert_eq!((m.dim, m.elements.len()), (3, 50));
        let json = serde_json::to_string(&ext).unwrap();
        assert_eq!(serde_json::from_str::<MeshSpec>(&json).unwrap(), ext);
    }
}

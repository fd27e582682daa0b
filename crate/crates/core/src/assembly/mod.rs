//! Global degrees of freedom, boundary conditions, loads and parallel assembly.
//!
//! Degree of freedom `node * dim + axis`. Dirichlet conditions are imposed by
//! elimination: tangents are stored for the free block only, residuals for all
//! degrees of freedom so that reactions can be recovered.

pub mod solver;
pub mod sparse;

use std::collections::BTreeMap;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mass::{total_element_mass, MassScheme};
use crate::material::NeoHookean;
use crate::mesh::{subdivide_element, Mesh, Vec3};
use crate::projection::{assemble_pi_nabla, ProjectionOperator};
use crate::stabilization::{element_static, GradientOperator, StabilizationConfig};

pub use solver::{reverse_cuthill_mckee, Factorization, SkylineSolver};
pub use sparse::CsrMatrix;

/// Scalar load amplitude in time.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum TimeFunction {
    Constant {
        #[serde(default = "one")]
        p_max: f64,
    },
    /// `p_max sin(pi t / period)` on `[0, period]`, zero afterwards.
    HalfSine { p_max: f64, period: f64 },
}

fn one() -> f64 {
    1.0
}

impl Default for TimeFunction {
    fn default() -> Self {
        TimeFunction::Constant { p_max: 1.0 }
    }
}

impl TimeFunction {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            TimeFunction::Constant { p_max } => p_max,
            TimeFunction::HalfSine { p_max, period } => {
                if (0.0..=period).contains(&t) {
                    p_max * (PI * t / period).sin()
                } else {
                    0.0
                }
            }
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            TimeFunction::Constant { p_max } if p_max.is_finite() => Ok(()),
            TimeFunction::HalfSine { p_max, period } if p_max.is_finite() && period > 0.0 => Ok(()),
            other => Err(Error::Validation(format!("invalid time function {other:?}"))),
        }
    }
}

/// Boundary conditions, loads and initial data, applied in order (later Dirichlet
/// entries override earlier ones on shared degrees of freedom).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BoundaryCondition {
    /// Homogeneous Dirichlet on the listed axes (all axes when omitted).
    Fixed {
        set: String,
        #[serde(default)]
        components: Option<Vec<usize>>,
    },
    /// `u_i = value_i f(t)` on the listed axes.
    Prescribed {
        set: String,
        #[serde(default)]
        components: Option<Vec<usize>>,
        value: Vec<f64>,
        #[serde(default)]
        time_function: TimeFunction,
    },
    /// `u = offset + gradient X` on every node of the set.
    LinearField {
        set: String,
        offset: Vec<f64>,
        gradient: Vec<Vec<f64>>,
    },
    /// Reference traction `value f(t)` (force per unit reference length or area) on the set's facets.
    Traction {
        set: String,
        value: Vec<f64>,
        #[serde(default)]
        time_function: TimeFunction,
    },
    /// Body force per unit reference volume on the whole body.
    BodyForce {
        value: Vec<f64>,
        #[serde(default)]
        time_function: TimeFunction,
    },
    InitialVelocity { set: String, value: Vec<f64> },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelOptions {
    #[serde(default)]
    pub stabilization: StabilizationConfig,
    #[serde(default)]
    pub mass_scheme: MassScheme,
    /// Centre monomials at the element centroid and scale by the diameter.
    #[serde(default)]
    pub scaled_monomials: bool,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self {
            stabilization: StabilizationConfig::default(),
            mass_scheme: MassScheme::Centroid,
            scaled_monomials: false,
        }
    }
}

/// Precomputed element operators.
#[derive(Clone, Debug)]
pub struct ElementData {
    pub dofs: Vec<usize>,
    pub projection: ProjectionOperator,
    pub pi: GradientOperator,
    pub submesh: Vec<GradientOperator>,
    pub mass: DMatrix<f64>,
    /// `int_E phi_I dX` for the projected shape functions.
    pub body_weights: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Constraint {
    pub value: f64,
    pub time_function: TimeFunction,
}

#[derive(Clone, Copy, Debug, PartialEq)]
struct NodalLoad {
    dof: usize,
    value: f64,
    time_function: TimeFunction,
}

/// Strain energy, internal forces (all dofs) and free-block tangent.
#[derive(Clone, Debug)]
pub struct Evaluation {
    pub energy: f64,
    pub internal: Vec<f64>,
    /// Largest element force entry before assembly; sets the roundoff level of `internal`.
    pub magnitude: f64,
    pub tangent: Option<CsrMatrix>,
}

pub struct Model {
    pub mesh: Mesh,
    pub material: NeoHookean,
    pub options: ModelOptions,
    pub elements: Vec<ElementData>,
    pub n_dofs: usize,
    pub constraints: BTreeMap<usize, Constraint>,
    /// Free dof ids in increasing order.
    pub free: Vec<usize>,
    /// Position of each dof in `free`.
    pub free_index: Vec<Option<usize>>,
    /// Full mass matrix.
    pub mass: CsrMatrix,
    /// Free block of the mass matrix, on the tangent pattern.
    pub mass_free: CsrMatrix,
    pub solver: SkylineSolver,
    pub initial_velocity: Vec<f64>,
    /// Volume attached to every node by the projected shape functions.
    pub nodal_volume: Vec<f64>,
    loads: Vec<NodalLoad>,
    body_forces: Vec<(Vec<f64>, TimeFunction)>,
    free_pattern: CsrMatrix,
}

impl std::fmt::Debug for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Model")
            .field("dim", &self.mesh.dim)
            .field("elements", &self.elements.len())
            .field("n_dofs", &self.n_dofs)
            .field("free", &self.free.len())
            .finish()
    }
}

fn check_len(what: &str, v: &[f64], dim: usize) -> Result<()> {
    if v.len() != dim || v.iter().any(|x| !x.is_finite()) {
        return Err(Error::Validation(format!("{what} needs {dim} finite components, got {v:?}")));
    }
    Ok(())
}

fn axes(components: &Option<Vec<usize>>, dim: usize) -> Result<Vec<usize>> {
    let c = components.clone().unwrap_or_else(|| (0..dim).collect());
    if let Some(bad) = c.iter().find(|&&a| a >= dim) {
        return Err(Error::Validation(format!("component {bad} out of range for dimension {dim}")));
    }
    Ok(c)
}

impl ElementData {
    fn build(mesh: &Mesh, e: usize, mat: &NeoHookean, options: &ModelOptions) -> Result<Self> {
        let d = mesh.dim;
        let el = &mesh.elements[e];
        let projection = assemble_pi_nabla(mesh, e, options.scaled_monomials)?;
        let simplices = subdivide_element(mesh, e)?;
        let submesh = simplices
            .iter()
            .map(|s| GradientOperator::from_simplex(mesh, &el.nodes, s))
            .collect();
        let mass = total_element_mass(
            mesh,
            e,
            mat,
            options.mass_scheme,
            &projection,
            &simplices,
            options.stabilization.beta_dyn,
        )?;
        let pts = mesh.coords(&el.nodes);
        let n = pts.len();
        let mean = pts.iter().fold(Vec3::zeros(), |a, p| a + p) / n as f64;
        let body_weights = projection
            .grad_weights
            .iter()
            .map(|b| projection.element_measure * (1.0 / n as f64 + b.dot(&(projection.centroid - mean))))
            .collect();
        let dofs = el.nodes.iter().flat_map(|&g| (0..d).map(move |i| g * d + i)).collect();
        Ok(Self {
            dofs,
            pi: GradientOperator::from_projection(&projection),
            projection,
            submesh,
            mass,
            body_weights,
        })
    }
}

impl Model {
    pub fn new(mesh: Mesh, material: NeoHookean, options: ModelOptions, bcs: &[BoundaryCondition]) -> Result<Self> {
        options.stabilization.validate()?;
        mesh.validate()?;
        let d = mesh.dim;
        let n_dofs = d * mesh.n_nodes();
        let elements: Vec<ElementData> = (0..mesh.elements.len())
            .into_par_iter()
            .map(|e| ElementData::build(&mesh, e, &material, &options).map_err(|err| err.at_element(e)))
            .collect::<Result<_>>()?;

        let mut constraints = BTreeMap::new();
        let mut loads = Vec::new();
        let mut body_forces = Vec::new();
        let mut initial_velocity = vec![0.0; n_dofs];
        let boundary = mesh.boundary_facets();
        for bc in bcs {
            match bc {
                BoundaryCondition::Fixed { set, components } => {
                    let s = mesh.boundary_set(set)?;
                    for &n in &s.nodes {
                        for a in axes(components, d)? {
                            constraints.insert(
                                n * d + a,
                                Constraint {
                                    value: 0.0,
                                    time_function: TimeFunction::default(),
                                },
                            );
                        }
                    }
                }
                BoundaryCondition::Prescribed {
                    set,
                    components,
                    value,
                    time_function,
                } => {
                    check_len("prescribed value", value, d)?;
                    time_function.validate()?;
                    let s = mesh.boundary_set(set)?;
                    for &n in &s.nodes {
                        for a in axes(components, d)? {
                            constraints.insert(
                                n * d + a,
                                Constraint {
                                    value: value[a],
                                    time_function: *time_function,
                                },
                            );
                        }
                    }
                }
                BoundaryCondition::LinearField { set, offset, gradient } => {
                    check_len("linear field offset", offset, d)?;
                    if gradient.len() != d {
                        return Err(Error::Validation(format!("linear field gradient needs {d} rows")));
                    }
                    for row in gradient {
                        check_len("linear field gradient row", row, d)?;
                    }
                    let s = mesh.boundary_set(set)?;
                    for &n in &s.nodes {
                        let x = mesh.nodes[n].x;
                        for i in 0..d {
                            let v = offset[i] + (0..d).map(|j| gradient[i][j] * x[j]).sum::<f64>();
                            constraints.insert(
                                n * d + i,
                                Constraint {
                                    value: v,
                                    time_function: TimeFunction::default(),
                                },
                            );
                        }
                    }
                }
                BoundaryCondition::Traction {
                    set,
                    value,
                    time_function,
                } => {
                    check_len("traction", value, d)?;
                    time_function.validate()?;
                    let s = mesh.boundary_set(set)?;
                    for facet in &s.facets {
                        let mut key = facet.clone();
                        key.sort_unstable();
                        if !boundary.contains_key(&key) {
                            return Err(Error::FacetNotOnBoundary { facet: facet.clone() });
                        }
                        for (node, w) in facet_weights(&mesh, facet) {
                            for (i, &t) in value.iter().enumerate() {
                                loads.push(NodalLoad {
                                    dof: node * d + i,
                                    value: t * w,
                                    time_function: *time_function,
                                });
                            }
                        }
                    }
                }
                BoundaryCondition::BodyForce { value, time_function } => {
                    check_len("body force", value, d)?;
                    time_function.validate()?;
                    body_forces.push((value.clone(), *time_function));
                }
                BoundaryCondition::InitialVelocity { set, value } => {
                    check_len("initial velocity", value, d)?;
                    let s = mesh.boundary_set(set)?;
                    for &n in &s.nodes {
                        for i in 0..d {
                            initial_velocity[n * d + i] = value[i];
                        }
                    }
                }
            }
        }
        // constrained dofs start at rest
        for &dof in constraints.keys() {
            initial_velocity[dof] = 0.0;
        }

        let mut free_index = vec![None; n_dofs];
        let free: Vec<usize> = (0..n_dofs).filter(|k| !constraints.contains_key(k)).collect();
        for (k, &dof) in free.iter().enumerate() {
            free_index[dof] = Some(k);
        }

        let mut nodal_volume = vec![0.0; mesh.n_nodes()];
        for (e, el) in elements.iter().enumerate() {
            for (k, &g) in mesh.elements[e].nodes.iter().enumerate() {
                nodal_volume[g] += el.body_weights[k];
            }
        }

        let mut mass = CsrMatrix::from_groups(n_dofs, elements.iter().map(|e| e.dofs.as_slice()));
        let free_groups: Vec<Vec<usize>> = elements
            .iter()
            .map(|e| e.dofs.iter().filter_map(|&g| free_index[g]).collect())
            .collect();
        let free_pattern = CsrMatrix::from_groups(free.len(), free_groups.iter().map(|g| g.as_slice()));
        let mut mass_free = free_pattern.clone();
        for el in &elements {
            for (a, &ga) in el.dofs.iter().enumerate() {
                for (b, &gb) in el.dofs.iter().enumerate() {
                    let m = el.mass[(a, b)];
                    if m == 0.0 {
                        continue;
                    }
                    mass.add(ga, gb, m);
                    if let (Some(fa), Some(fb)) = (free_index[ga], free_index[gb]) {
                        mass_free.add(fa, fb, m);
                    }
                }
            }
        }
        let solver = SkylineSolver::new(&free_pattern);
        Ok(Self {
            mesh,
            material,
            options,
            elements,
            n_dofs,
            constraints,
            free,
            free_index,
            mass,
            mass_free,
            solver,
            initial_velocity,
            nodal_volume,
            loads,
            body_forces,
            free_pattern,
        })
    }

    pub fn dim(&self) -> usize {
        self.mesh.dim
    }

    /// Zero matrix on the free-block pattern.
    pub fn free_matrix(&self) -> CsrMatrix {
        self.free_pattern.clone()
    }

    /// Overwrites constrained entries of `u` with their prescribed values at time `t`.
    pub fn apply_dirichlet(&self, u: &mut [f64], t: f64) {
        for (&dof, c) in &self.constraints {
            u[dof] = c.value * c.time_function.eval(t);
        }
    }

    pub fn external_force(&self, t: f64) -> Vec<f64> {
        let d = self.dim();
        let mut f = vec![0.0; self.n_dofs];
        for l in &self.loads {
            f[l.dof] += l.value * l.time_function.eval(t);
        }
        for (value, tf) in &self.body_forces {
            let s = tf.eval(t);
            for (n, &w) in self.nodal_volume.iter().enumerate() {
                for i in 0..d {
                    f[n * d + i] += value[i] * s * w;
                }
            }
        }
        f
    }

    /// Internal forces and strain energy at `u`; elements are evaluated in parallel and
    /// reduced in element order, so results do not depend on the thread count.
    pub fn evaluate(&self, u: &[f64], with_tangent: bool) -> Result<Evaluation> {
        let d = self.dim();
        let beta = self.options.stabilization.beta_stat;
        let responses: Vec<Result<_>> = self
            .elements
            .par_iter()
            .enumerate()
            .map(|(e, el)| {
                let u_e: Vec<f64> = el.dofs.iter().map(|&g| u[g]).collect();
                element_static(&el.pi, &el.submesh, &self.material, d, beta, &u_e, with_tangent)
                    .map_err(|err| err.at_element(e))
            })
            .collect();
        let mut energy = 0.0;
        let mut magnitude = 0.0f64;
        let mut internal = vec![0.0; self.n_dofs];
        let mut tangent = with_tangent.then(|| self.free_matrix());
        for (el, r) in self.elements.iter().zip(responses) {
            let r = r?;
            energy += r.energy;
            for (a, &g) in el.dofs.iter().enumerate() {
                internal[g] += r.residual[a];
                magnitude = magnitude.max(r.residual[a].abs());
            }
            if let (Some(k), Some(ke)) = (tangent.as_mut(), r.tangent.as_ref()) {
                for (a, &ga) in el.dofs.iter().enumerate() {
                    let Some(fa) = self.free_index[ga] else { continue };
                    for (b, &gb) in el.dofs.iter().enumerate() {
                        if let Some(fb) = self.free_index[gb] {
                            k.add(fa, fb, ke[(a, b)]);
                        }
                    }
                }
            }
        }
        Ok(Evaluation {
            energy,
            internal,
            magnitude,
            tangent,
        })
    }

    pub fn kinetic_energy(&self, v: &[f64]) -> f64 {
        let mv = self.mass.mul_vec(v);
        0.5 * v.iter().zip(&mv).map(|(a, b)| a * b).sum::<f64>()
    }

    pub fn restrict(&self, full: &[f64]) -> Vec<f64> {
        self.free.iter().map(|&g| full[g]).collect()
    }

    /// Support forces on constrained dofs: the full residual `R_int + M a - F` restricted there.
    pub fn reactions(&self, residual: &[f64]) -> BTreeMap<usize, f64> {
        self.constraints.keys().map(|&k| (k, residual[k])).collect()
    }

    /// Displacement of the projected field of element `e` at `x`.
    pub fn projected_displacement(&self, e: usize, u: &[f64], x: &Vec3) -> Vec<f64> {
        let el = &self.elements[e];
        let u_e: Vec<f64> = el.dofs.iter().map(|&g| u[g]).collect();
        let a = el.projection.parameters(&u_e);
        let h = crate::projection::monomial_matrix_h(x, &el.projection.basis);
        (h * nalgebra::DVector::from_vec(a)).as_slice().to_vec()
    }
}

/// Nodal weights `int_F phi_I dA` of the boundary trace.
///
/// 2D facets are straight segments with a linear trace. 3D faces use the piecewise-linear
/// trace on the fan about the vertex average, whose value there is the nodal mean.
pub fn facet_weights(mesh: &Mesh, facet: &[usize]) -> Vec<(usize, f64)> {
    let pts = mesh.coords(facet);
    if mesh.dim == 2 {
        let l = (pts[1] - pts[0]).norm();
        return vec![(facet[0], 0.5 * l), (facet[1], 0.5 * l)];
    }
    let n = facet.len();
    let c = pts.iter().fold(Vec3::zeros(), |a, p| a + p) / n as f64;
    let mut w = vec![0.0; n];
    let mut centre = 0.0;
    for i in 0..n {
        let j = (i + 1) % n;
        let a = 0.5 * (pts[i] - c).cross(&(pts[j] - c)).norm() / 3.0;
        w[i] += a;
        w[j] += a;
        centre += a;
    }
    facet
        .iter()
        .zip(w)
        .map(|(&node, wi)| (node, wi + centre / n as f64))
        .collect()
}

#[cfg(test)]
mod tests;

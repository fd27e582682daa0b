//! Consistency energy on the projected field plus simplex-submesh stabilization.
//!
//! The element strain energy is
//! `(1 - beta) Psi(F_Pi) Omega + beta sum_T Psi(F_T) Omega_T`,
//! where `F_Pi` comes from the projected gradient and `F_T` from the nodal
//! field restricted to submesh simplex `T`. External loads are not blended.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::material::{deformation_gradient, NeoHookean};
use crate::mesh::{Mesh, Simplex, Vec3};
use crate::projection::{simplex_gradient_weights, ProjectionOperator};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StabilizationConfig {
    #[serde(default = "default_beta_stat")]
    pub beta_stat: f64,
    #[serde(default)]
    pub beta_dyn: f64,
}

fn default_beta_stat() -> f64 {
    0.4
}

impl Default for StabilizationConfig {
    fn default() -> Self {
        Self {
            beta_stat: default_beta_stat(),
            beta_dyn: 0.0,
        }
    }
}

impl StabilizationConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("beta_stat", self.beta_stat), ("beta_dyn", self.beta_dyn)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Validation(format!("{name} must lie in [0, 1], got {v}")));
            }
        }
        Ok(())
    }
}

/// Constant-gradient operator on a subset of the element nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct GradientOperator {
    /// Positions in the element's node list.
    pub local: Vec<usize>,
    pub weights: Vec<Vec3>,
    pub measure: f64,
}

impl GradientOperator {
    pub fn from_projection(pi: &ProjectionOperator) -> Self {
        Self {
            local: (0..pi.n_nodes()).collect(),
            weights: pi.grad_weights.clone(),
            measure: pi.element_measure,
        }
    }

    pub fn from_simplex(mesh: &Mesh, element_nodes: &[usize], s: &Simplex) -> Self {
        let local = s
            .nodes
            .iter()
            .map(|g| element_nodes.iter().position(|n| n == g).expect("submesh node outside element"))
            .collect();
        Self {
            local,
            weights: simplex_gradient_weights(&mesh.coords(&s.nodes), s.measure),
            measure: s.measure,
        }
    }

    fn gradient(&self, dim: usize, u_e: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; dim * dim];
        for (k, &a) in self.local.iter().enumerate() {
            let b = &self.weights[k];
            for i in 0..dim {
                let u = u_e[a * dim + i];
                for j in 0..dim {
                    g[i * dim + j] += u * b[j];
                }
            }
        }
        g
    }
}

/// Energy, residual and (optional) tangent of one element-level contribution.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementResponse {
    pub energy: f64,
    pub residual: DVector<f64>,
    pub tangent: Option<DMatrix<f64>>,
}

impl ElementResponse {
    fn zeros(n: usize, with_tangent: bool) -> Self {
        Self {
            energy: 0.0,
            residual: DVector::zeros(n),
            tangent: with_tangent.then(|| DMatrix::zeros(n, n)),
        }
    }
}

/// Adds `weight * Omega * Psi(Id + grad u)` and its derivatives for one gradient operator.
fn accumulate(
    out: &mut ElementResponse,
    op: &GradientOperator,
    mat: &NeoHookean,
    dim: usize,
    u_e: &[f64],
    weight: f64,
) -> Result<()> {
    if weight == 0.0 {
        return Ok(());
    }
    let f = deformation_gradient(&op.gradient(dim, u_e), dim);
    let (psi, p, a) = mat.first_piola(&f)?;
    let w = weight * op.measure;
    out.energy += w * psi;
    for (ka, &na) in op.local.iter().enumerate() {
        let ba = &op.weights[ka];
        for i in 0..dim {
            let mut r = 0.0;
            for j in 0..dim {
                r += p[(i, j)] * ba[j];
            }
            out.residual[na * dim + i] += w * r;
        }
    }
    if let Some(k) = out.tangent.as_mut() {
        for (ka, &na) in op.local.iter().enumerate() {
            let ba = &op.weights[ka];
            for (kb, &nb) in op.local.iter().enumerate() {
                let bb = &op.weights[kb];
                for i in 0..dim {
                    for kk in 0..dim {
                        let mut v = 0.0;
                        for j in 0..dim {
                            for l in 0..dim {
                                v += a[(3 * i + j, 3 * kk + l)] * ba[j] * bb[l];
                            }
                        }
                        k[(na * dim + i, nb * dim + kk)] += w * v;
                    }
                }
            }
        }
    }
    Ok(())
}

/// Strain part of the consistency energy, `Psi(F_Pi) Omega`, with derivatives.
pub fn consistency_energy(
    pi: &GradientOperator,
    mat: &NeoHookean,
    dim: usize,
    u_e: &[f64],
    with_tangent: bool,
) -> Result<ElementResponse> {
    let mut out = ElementResponse::zeros(u_e.len(), with_tangent);
    accumulate(&mut out, pi, mat, dim, u_e, 1.0)?;
    Ok(out)
}

/// Submesh energy `sum_T Psi(F_T) Omega_T` on the nodal field, with derivatives.
pub fn stabilization_energy(
    submesh: &[GradientOperator],
    mat: &NeoHookean,
    dim: usize,
    u_e: &[f64],
    with_tangent: bool,
) -> Result<ElementResponse> {
    let mut out = ElementResponse::zeros(u_e.len(), with_tangent);
    for s in submesh {
        accumulate(&mut out, s, mat, dim, u_e, 1.0)?;
    }
    Ok(out)
}

/// Blended static strain response `(1 - beta) U_c + beta U_stab`.
pub fn element_static(
    pi: &GradientOperator,
    submesh: &[GradientOperator],
    mat: &NeoHookean,
    dim: usize,
    beta_stat: f64,
    u_e: &[f64],
    with_tangent: bool,
) -> Result<ElementResponse> {
    let mut out = ElementResponse::zeros(u_e.len(), with_tangent);
    accumulate(&mut out, pi, mat, dim, u_e, 1.0 - beta_stat)?;
    for s in submesh {
        accumulate(&mut out, s, mat, dim, u_e, beta_stat)?;
    }
    Ok(out)
}

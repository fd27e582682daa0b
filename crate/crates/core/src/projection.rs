//! Element projection onto the linear ansatz `{1, X, Y[, Z]}`.
//!
//! The virtual parameter vector `a` has length `d(d+1)` and is ordered by monomial,
//! then by direction: `a[k*d + i]` multiplies monomial `k` in direction `i`, where
//! `k = 0` is the constant and `k = 1..=d` are the coordinates. This is the column
//! order of [`monomial_matrix_h`] and the single source of truth for that layout.

use nalgebra::DMatrix;

use crate::error::Result;
use crate::mesh::{face_geometry, triangulate_faces, Mesh, Vec3};

/// Monomials `{1, (X - shift)/scale, ...}`; the unscaled basis has `shift = 0`, `scale = 1`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MonomialBasis {
    pub dim: usize,
    pub shift: Vec3,
    pub scale: f64,
}

impl MonomialBasis {
    pub fn unscaled(dim: usize) -> Self {
        Self {
            dim,
            shift: Vec3::zeros(),
            scale: 1.0,
        }
    }

    pub fn n_params(&self) -> usize {
        self.dim * (self.dim + 1)
    }

    /// `[1, m_1(X), ..., m_d(X)]`.
    pub fn eval(&self, x: &Vec3) -> [f64; 4] {
        let s = (x - self.shift) / self.scale;
        let mut m = [1.0, 0.0, 0.0, 0.0];
        m[1..=self.dim].copy_from_slice(&s.as_slice()[..self.dim]);
        m
    }
}

/// `H(X)` with `u_Pi(X) = H(X) a`.
pub fn monomial_matrix_h(x: &Vec3, basis: &MonomialBasis) -> DMatrix<f64> {
    let d = basis.dim;
    let m = basis.eval(x);
    let mut h = DMatrix::zeros(d, d * (d + 1));
    for k in 0..=d {
        for i in 0..d {
            h[(i, k * d + i)] = m[k];
        }
    }
    h
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionOperator {
    pub dim: usize,
    pub basis: MonomialBasis,
    /// `(d(d+1)) x (d n_V)`, nodal displacements stacked node by node.
    pub pi_nabla: DMatrix<f64>,
    /// Gradient weights `b_I` with `grad u_Pi = sum_I u_I (x) b_I`.
    pub grad_weights: Vec<Vec3>,
    pub element_measure: f64,
    pub centroid: Vec3,
}

impl ProjectionOperator {
    pub fn n_nodes(&self) -> usize {
        self.grad_weights.len()
    }

    /// `(d*d) x (d n_V)` map to the row-major gradient `G_ij = du_i/dX_j`.
    pub fn grad_map(&self) -> DMatrix<f64> {
        gradient_matrix(&self.grad_weights, self.dim)
    }

    pub fn gradient(&self, u_e: &[f64]) -> Vec<f64> {
        apply_gradient(&self.grad_weights, self.dim, u_e)
    }

    pub fn parameters(&self, u_e: &[f64]) -> Vec<f64> {
        (&self.pi_nabla * nalgebra::DVector::from_column_slice(u_e))
            .as_slice()
            .to_vec()
    }
}

pub(crate) fn gradient_matrix(weights: &[Vec3], dim: usize) -> DMatrix<f64> {
    let mut g = DMatrix::zeros(dim * dim, dim * weights.len());
    for (n, b) in weights.iter().enumerate() {
        for i in 0..dim {
            for j in 0..dim {
                g[(i * dim + j, n * dim + i)] = b[j];
            }
        }
    }
    g
}

pub(crate) fn apply_gradient(weights: &[Vec3], dim: usize, u_e: &[f64]) -> Vec<f64> {
    let mut g = vec![0.0; dim * dim];
    for (n, b) in weights.iter().enumerate() {
        for i in 0..dim {
            let u = u_e[n * dim + i];
            for j in 0..dim {
                g[i * dim + j] += u * b[j];
            }
        }
    }
    g
}

/// Boundary-integral gradient weights of a counter-clockwise loop, divided by `area`.
///
/// Each edge contributes `(L/2) N` to both of its end nodes; exact for the linear edge trace.
pub(crate) fn loop_gradient_weights(pts: &[Vec3], area: f64) -> Vec<Vec3> {
    let n = pts.len();
    let mut b = vec![Vec3::zeros(); n];
    for i in 0..n {
        let j = (i + 1) % n;
        let e = pts[j] - pts[i];
        let ln = Vec3::new(e.y, -e.x, 0.0) * (0.5 / area);
        b[i] += ln;
        b[j] += ln;
    }
    b
}

/// Gradient weights of a linear simplex with local node order; equals the FEM B-operator.
pub(crate) fn simplex_gradient_weights(pts: &[Vec3], measure: f64) -> Vec<Vec3> {
    if pts.len() == 3 {
        return loop_gradient_weights(pts, measure);
    }
    // tet: opposite-face vector areas, oriented outward, over volume, one third per face vertex
    let faces = [[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]];
    let mut b = vec![Vec3::zeros(); 4];
    for f in faces {
        let g = (pts[f[1]] - pts[f[0]]).cross(&(pts[f[2]] - pts[f[0]]));
        for &v in &f {
            b[v] += g / (6.0 * measure);
        }
    }
    b
}

/// Gradient weights of element `e` (nodes in the element's own order), its measure and centroid.
pub fn projected_gradient(mesh: &Mesh, e: usize) -> Result<(Vec<Vec3>, f64, Vec3)> {
    let el = &mesh.elements[e];
    let (measure, centroid) = mesh.element_measure_centroid(e)?;
    if mesh.dim == 2 {
        let pts = mesh.coords(&el.nodes);
        return Ok((loop_gradient_weights(&pts, measure), measure, centroid));
    }
    let local: std::collections::HashMap<usize, usize> =
        el.nodes.iter().enumerate().map(|(k, &n)| (n, k)).collect();
    let mut b = vec![Vec3::zeros(); el.nodes.len()];
    for tri in triangulate_faces(el, &mesh.nodes).map_err(|err| err.at_element(e))? {
        if tri.degenerate {
            continue;
        }
        // one-point rule at (1/3, 1/3), weight 1/2: u_h there is the vertex average
        let (normal, n_zeta) = face_geometry(&tri, 1.0 / 3.0, 1.0 / 3.0)?;
        let w = normal * (0.5 * n_zeta / (3.0 * measure));
        for v in tri.nodes {
            b[local[&v]] += w;
        }
    }
    Ok((b, measure, centroid))
}

/// Largest node-to-node distance of element `e`.
pub fn element_diameter(mesh: &Mesh, e: usize) -> f64 {
    let pts = mesh.coords(&mesh.elements[e].nodes);
    let mut h: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            h = h.max((pts[i] - pts[j]).norm());
        }
    }
    h
}

/// Builds `Pi_nabla` from the gradient weights and the nodal averaging condition
/// `sum_I u_Pi(X_I) = sum_I u_I`.
///
/// With `scaled`, monomials are centred at the element centroid and divided by the diameter.
pub fn assemble_pi_nabla(mesh: &Mesh, e: usize, scaled: bool) -> Result<ProjectionOperator> {
    let d = mesh.dim;
    let (b, measure, centroid) = projected_gradient(mesh, e)?;
    let basis = if scaled {
        MonomialBasis {
            dim: d,
            shift: centroid,
            scale: element_diameter(mesh, e),
        }
    } else {
        MonomialBasis::unscaled(d)
    };
    let el = &mesh.elements[e];
    let n = el.nodes.len();
    let pts = mesh.coords(&el.nodes);
    let mean = pts.iter().fold(Vec3::zeros(), |acc, p| acc + p) / n as f64;
    let offset = mean - basis.shift;
    let mut pi = DMatrix::zeros(d * (d + 1), d * n);
    for (node, bi) in b.iter().enumerate() {
        let c = 1.0 / n as f64 - bi.dot(&offset);
        for i in 0..d {
            pi[(i, node * d + i)] = c;
            for k in 0..d {
                pi[((k + 1) * d + i, node * d + i)] = basis.scale * bi[k];
            }
        }
    }
    Ok(ProjectionOperator {
        dim: d,
        basis,
        pi_nabla: pi,
        grad_weights: b,
        element_measure: measure,
        centroid,
    })
}

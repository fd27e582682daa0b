//! Element mass matrices from the inertia pseudo-potential.

use nalgebra::{DMatrix, Matrix3};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::material::NeoHookean;
use crate::mesh::{subdivide_element, triangulate_faces, Mesh, Simplex, Vec3};
use crate::projection::{MonomialBasis, ProjectionOperator};

/// Evaluation of `int H^T H dOmega`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MassScheme {
    /// One point at the element centroid.
    #[default]
    Centroid,
    /// One point at the centroid of every submesh simplex.
    #[serde(alias = "sub_triangulation")]
    SubTriangulation,
    /// Exact monomial moments from the boundary.
    #[serde(rename = "exact", alias = "boundary_exact")]
    BoundaryExact,
}

/// Zeroth, first and second moments of an element about a reference point.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Moments {
    vol: f64,
    first: Vec3,
    second: Matrix3<f64>,
}

impl Moments {
    fn zero() -> Self {
        Self {
            vol: 0.0,
            first: Vec3::zeros(),
            second: Matrix3::zeros(),
        }
    }

    fn point(w: f64, y: Vec3) -> Self {
        Self {
            vol: w,
            first: y * w,
            second: y * y.transpose() * w,
        }
    }

    fn add(&mut self, o: &Moments) {
        self.vol += o.vol;
        self.first += o.first;
        self.second += o.second;
    }
}

/// Exact moments of a simplex with vertices `v` (relative coordinates) and signed measure `m`.
fn simplex_moments(v: &[Vec3], m: f64) -> Moments {
    let k = v.len() as f64;
    let sum: Vec3 = v.iter().sum();
    let mut outer = sum * sum.transpose();
    for p in v {
        outer += p * p.transpose();
    }
    Moments {
        vol: m,
        first: sum * (m / k),
        second: outer * (m / (k * (k + 1.0))),
    }
}

/// Moments of area of a counter-clockwise loop by the shoelace-type boundary sums.
fn polygon_moments(y: &[Vec3]) -> Moments {
    let n = y.len();
    let (mut a, mut sx, mut sy, mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        let (x0, y0) = (y[(i + n - 1) % n].x, y[(i + n - 1) % n].y);
        let (x1, y1) = (y[i].x, y[i].y);
        let cr = y1 * x0 - y0 * x1;
        a += cr;
        sx += cr * (x1 + x0);
        sy += cr * (y1 + y0);
        sxx += cr * ((x1 + x0).powi(2) - x1 * x0);
        syy += cr * ((y1 + y0).powi(2) - y1 * y0);
        sxy += cr * (2.0 * x0 * y0 + x0 * y1 + x1 * y0 + 2.0 * x1 * y1);
    }
    let mut second = Matrix3::zeros();
    second[(0, 0)] = sxx / 12.0;
    second[(1, 1)] = syy / 12.0;
    second[(0, 1)] = sxy / 24.0;
    second[(1, 0)] = sxy / 24.0;
    Moments {
        vol: a / 2.0,
        first: Vec3::new(sx / 6.0, sy / 6.0, 0.0),
        second,
    }
}

fn element_moments(mesh: &Mesh, e: usize, scheme: MassScheme, origin: &Vec3) -> Result<Moments> {
    let el = &mesh.elements[e];
    match scheme {
        MassScheme::Centroid => {
            let (vol, c) = mesh.element_measure_centroid(e)?;
            Ok(Moments::point(vol, c - origin))
        }
        MassScheme::SubTriangulation => {
            let mut m = Moments::zero();
            for s in subdivide_element(mesh, e)? {
                let pts = mesh.coords(&s.nodes);
                let c = pts.iter().sum::<Vec3>() / pts.len() as f64;
                m.add(&Moments::point(s.measure, c - origin));
            }
            Ok(m)
        }
        MassScheme::BoundaryExact if mesh.dim == 2 => {
            let y: Vec<Vec3> = mesh.coords(&el.nodes).iter().map(|p| p - origin).collect();
            Ok(polygon_moments(&y))
        }
        MassScheme::BoundaryExact => {
            // signed cones from the origin over the face triangles
            mesh.element_measure_centroid(e)?;
            let mut m = Moments::zero();
            for t in triangulate_faces(el, &mesh.nodes).map_err(|err| err.at_element(e))? {
                let v: Vec<Vec3> = t.coords.iter().map(|p| p - origin).collect();
                let vol = v[0].dot(&v[1].cross(&v[2])) / 6.0;
                let cone = [Vec3::zeros(), v[0], v[1], v[2]];
                m.add(&simplex_moments(&cone, vol));
            }
            Ok(m)
        }
    }
}

/// Monomial moment matrix `Q_kl = int m_k m_l dOmega`, size `(d+1) x (d+1)`.
pub fn monomial_moments(mesh: &Mesh, e: usize, scheme: MassScheme, basis: &MonomialBasis) -> Result<DMatrix<f64>> {
    let d = mesh.dim;
    let origin = mesh.nodes[mesh.elements[e].nodes[0]].x;
    let m = element_moments(mesh, e, scheme, &origin)?;
    let delta = origin - basis.shift;
    let h = basis.scale;
    let first = (m.first + delta * m.vol) / h;
    let second = (m.second + m.first * delta.transpose() + delta * m.first.transpose() + delta * delta.transpose() * m.vol) / (h * h);
    let mut q = DMatrix::zeros(d + 1, d + 1);
    q[(0, 0)] = m.vol;
    for k in 0..d {
        q[(0, k + 1)] = first[k];
        q[(k + 1, 0)] = first[k];
        for l in 0..d {
            q[(k + 1, l + 1)] = 0.5 * (second[(k, l)] + second[(l, k)]);
        }
    }
    Ok(q)
}

/// `int H^T H dOmega = Q (x) I_d` in the parameter ordering of [`crate::projection`].
pub fn hth_integral(mesh: &Mesh, e: usize, scheme: MassScheme, basis: &MonomialBasis) -> Result<DMatrix<f64>> {
    let q = monomial_moments(mesh, e, scheme, basis)?;
    Ok(kron_identity(&q, mesh.dim))
}

pub(crate) fn kron_identity(q: &DMatrix<f64>, d: usize) -> DMatrix<f64> {
    let n = q.nrows();
    let mut out = DMatrix::zeros(n * d, n * d);
    for k in 0..n {
        for l in 0..n {
            for i in 0..d {
                out[(k * d + i, l * d + i)] = q[(k, l)];
            }
        }
    }
    out
}

fn symmetrize(m: DMatrix<f64>) -> DMatrix<f64> {
    (&m + m.transpose()) * 0.5
}

/// Projection-only mass `Pi^T (rho int H^T H) Pi`.
pub fn element_mass(
    mesh: &Mesh,
    e: usize,
    mat: &NeoHookean,
    scheme: MassScheme,
    pi: &ProjectionOperator,
) -> Result<DMatrix<f64>> {
    let hth = hth_integral(mesh, e, scheme, &pi.basis)?;
    Ok(symmetrize(pi.pi_nabla.transpose() * (hth * mat.rho) * &pi.pi_nabla))
}

/// Simplex-level centroid-rule mass on the nodal field, in the element's local node order.
pub fn stabilized_element_mass(mesh: &Mesh, e: usize, mat: &NeoHookean, submesh: &[Simplex]) -> DMatrix<f64> {
    let d = mesh.dim;
    let el = &mesh.elements[e];
    let n = el.nodes.len();
    let mut m = DMatrix::zeros(d * n, d * n);
    for s in submesh {
        let local: Vec<usize> = s
            .nodes
            .iter()
            .map(|g| el.nodes.iter().position(|x| x == g).expect("submesh node outside element"))
            .collect();
        let w = mat.rho * s.measure / ((d + 1) * (d + 1)) as f64;
        for &a in &local {
            for &b in &local {
                for i in 0..d {
                    m[(a * d + i, b * d + i)] += w;
                }
            }
        }
    }
    m
}

/// `(1 - beta_dyn) M_Pi + beta_dyn M_stab`.
pub fn total_element_mass(
    mesh: &Mesh,
    e: usize,
    mat: &NeoHookean,
    scheme: MassScheme,
    pi: &ProjectionOperator,
    submesh: &[Simplex],
    beta_dyn: f64,
) -> Result<DMatrix<f64>> {
    let mut m = if beta_dyn < 1.0 {
        element_mass(mesh, e, mat, scheme, pi)? * (1.0 - beta_dyn)
    } else {
        DMatrix::zeros(pi.pi_nabla.ncols(), pi.pi_nabla.ncols())
    };
    if beta_dyn > 0.0 {
        m += stabilized_element_mass(mesh, e, mat, submesh) * beta_dyn;
    }
    Ok(m)
}

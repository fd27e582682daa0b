//! Self-checks: linear patch test, finite-difference derivatives, mass quadrature, rigid modes.

use std::fmt;

use nalgebra::{DMatrix, Matrix3, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::assembly::{BoundaryCondition, Model, ModelOptions, TimeFunction};
use crate::dynamics::{solve_static, NewtonSettings};
use crate::error::{Error, Result};
use crate::mass::{monomial_moments, MassScheme};
use crate::material::{deformation_gradient, NeoHookean};
use crate::mesh::{
    extrude, generate_c_mesh, generate_structured, generate_voronoi_2d, subdivide_element, BoundarySet, Mesh,
    StructuredKind, Vec3,
};
use crate::projection::MonomialBasis;
use crate::stabilization::StabilizationConfig;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub tolerance: f64,
}

impl Check {
    pub fn new(name: impl Into<String>, value: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            value,
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.value.is_finite() && self.value < self.tolerance
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Report {
    pub suite: String,
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    pub fn max_value(&self) -> f64 {
        self.checks.iter().fold(0.0, |m, c| m.max(c.value))
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            let tag = if c.passed() { "PASS" } else { "FAIL" };
            writeln!(f, "{tag} {}: {:.3e} (< {:.1e})", c.name, c.value, c.tolerance)?;
        }
        let tag = if self.passed() { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: {} checks", self.suite, self.checks.len())
    }
}

/// Element families used by the checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Q2s,
    Q1,
    CMesh,
    Voronoi,
    H2s,
    H1,
    VoronoiPrism,
}

impl Family {
    pub const ALL: [Family; 7] = [
        Family::Q2s,
        Family::Q1,
        Family::CMesh,
        Family::Voronoi,
        Family::H2s,
        Family::H1,
        Family::VoronoiPrism,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::Q2s => "q2s",
            Family::Q1 => "q1",
            Family::CMesh => "c",
            Family::Voronoi => "voronoi",
            Family::H2s => "h2s",
            Family::H1 => "h1",
            Family::VoronoiPrism => "voronoi_prism",
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Family::Q2s | Family::Q1 | Family::CMesh | Family::Voronoi => 2,
            _ => 3,
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == s)
    }

    /// Multi-element patch with interior nodes.
    pub fn patch_mesh(self) -> Mesh {
        let unit2 = Vec3::new(1.0, 1.0, 0.0);
        let unit3 = Vec3::new(1.0, 1.0, 1.0);
        match self {
            Family::Q2s => generate_structured(StructuredKind::Q2s, &[3, 3], Vec3::zeros(), unit2),
            Family::Q1 => generate_structured(StructuredKind::Q1, &[3, 3], Vec3::zeros(), unit2),
            Family::CMesh => generate_c_mesh(3, 3, Vec3::zeros(), unit2),
            Family::Voronoi => return self.mesh(),
            Family::H2s => generate_structured(StructuredKind::H2s, &[2, 2, 2], Vec3::zeros(), unit3),
            Family::H1 => generate_structured(StructuredKind::H1, &[2, 2, 2], Vec3::zeros(), unit3),
            Family::VoronoiPrism => generate_voronoi_2d(&jittered_seeds(3, 9), Vec3::zeros(), unit2)
                .and_then(|m| extrude(&m, 2, 1.0)),
        }
        .expect("family mesh generates")
    }

    /// Single element (two for the C family), or a small patch for the Voronoi families.
    pub fn mesh(self) -> Mesh {
        let unit2 = Vec3::new(1.0, 1.0, 0.0);
        let unit3 = Vec3::new(1.0, 1.0, 1.0);
        match self {
            Family::Q2s => generate_structured(StructuredKind::Q2s, &[1, 1], Vec3::zeros(), unit2),
            Family::Q1 => generate_structured(StructuredKind::Q1, &[1, 1], Vec3::zeros(), unit2),
            Family::CMesh => generate_c_mesh(1, 1, Vec3::zeros(), unit2),
            Family::Voronoi => generate_voronoi_2d(&jittered_seeds(5, 7), Vec3::zeros(), unit2),
            Family::H2s => generate_structured(StructuredKind::H2s, &[1, 1, 1], Vec3::zeros(), unit3),
            Family::H1 => generate_structured(StructuredKind::H1, &[1, 1, 1], Vec3::zeros(), unit3),
            Family::VoronoiPrism => generate_voronoi_2d(&jittered_seeds(3, 9), Vec3::zeros(), unit2)
                .and_then(|m| extrude(&m, 1, 0.5)),
        }
        .expect("family mesh generates")
    }
}

/// One seed per cell of an `n x n` grid on the unit square, jittered by up to 35% of a cell.
pub fn jittered_seeds(n: usize, seed: u64) -> Vec<Vec3> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let h = 1.0 / n as f64;
    let mut s = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            let jx: f64 = rng.random_range(-0.35..0.35);
            let jy: f64 = rng.random_range(-0.35..0.35);
            s.push(Vec3::new((i as f64 + 0.5 + jx) * h, (j as f64 + 0.5 + jy) * h, 0.0));
        }
    }
    s
}

pub fn table_material() -> NeoHookean {
    NeoHookean::from_engineering(210_000.0, 0.3, 2.7e-9).expect("valid material")
}

// ---------------------------------------------------------------------------
// Patch test

/// Adds a `boundary` set holding every node on a boundary facet.
pub fn with_boundary_set(mut mesh: Mesh) -> Mesh {
    let mut nodes: Vec<usize> = mesh.boundary_facets().keys().flatten().copied().collect();
    nodes.sort_unstable();
    nodes.dedup();
    mesh.boundary_sets.insert(
        "boundary".into(),
        BoundarySet {
            nodes,
            facets: Vec::new(),
        },
    );
    mesh
}

/// Linear field used by the patch test.
pub fn patch_field(dim: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    let offset = vec![0.3, -0.2, 0.1][..dim].to_vec();
    let g = [[2.0e-3, 1.0e-3, -0.5e-3], [-1.5e-3, 3.0e-3, 0.7e-3], [0.4e-3, -0.9e-3, 1.2e-3]];
    (offset, g[..dim].iter().map(|r| r[..dim].to_vec()).collect())
}

/// Patch test errors `(displacement, force)`.
///
/// Boundary nodes follow `u = c + A X` and interior nodes are solved for; the displacement
/// error is the interior max-norm relative to `|A| l`. The force error compares the nodal
/// internal forces of the exact field with `Omega P b_I` from the projection. It is only
/// meaningful in 2D: in 3D the simplex part sees a different face trace than the fan
/// triangulation of the projection, and is `None`.
pub fn patch_errors(mesh: &Mesh, beta_stat: f64) -> Result<(f64, Option<f64>)> {
    let d = mesh.dim;
    let mesh = with_boundary_set(mesh.clone());
    let (offset, grad) = patch_field(d);
    let bcs = [BoundaryCondition::LinearField {
        set: "boundary".into(),
        offset: offset.clone(),
        gradient: grad.clone(),
    }];
    let options = ModelOptions {
        stabilization: StabilizationConfig { beta_stat, beta_dyn: 0.0 },
        ..Default::default()
    };
    let model = Model::new(mesh, table_material(), options, &bcs)?;
    let exact: Vec<f64> = model
        .mesh
        .nodes
        .iter()
        .flat_map(|n| (0..d).map(|i| offset[i] + (0..d).map(|j| grad[i][j] * n.x[j]).sum::<f64>()).collect::<Vec<_>>())
        .collect();
    let settings = NewtonSettings {
        abs_tol: 1e-10,
        ..Default::default()
    };
    // start from the rigid translation; the gradient part is left to Newton
    let guess: Vec<f64> = (0..model.n_dofs).map(|k| offset[k % d]).collect();
    let (u, _) = solve_static(&model, 0.0, &guess, &settings)?;
    let a_norm = grad.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
    let scale = a_norm * model.mesh.bbox_diagonal();
    let disp = model
        .free
        .iter()
        .fold(0.0f64, |m, &g| m.max((u[g] - exact[g]).abs()))
        / scale;

    if d == 3 {
        return Ok((disp, None));
    }
    let ev = model.evaluate(&exact, false)?;
    let flat: Vec<f64> = grad.iter().flatten().copied().collect();
    let f = deformation_gradient(&flat, d);
    let (_, p, _) = model.material.first_piola(&f)?;
    let mut expected = vec![0.0; model.n_dofs];
    for (e, el) in model.elements.iter().enumerate() {
        for (k, &node) in model.mesh.elements[e].nodes.iter().enumerate() {
            let b = el.projection.grad_weights[k];
            for i in 0..d {
                let r: f64 = (0..d).map(|j| p[(i, j)] * b[j]).sum();
                expected[node * d + i] += el.projection.element_measure * r;
            }
        }
    }
    let fmax = expected.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let force = ev
        .internal
        .iter()
        .zip(&expected)
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()))
        / fmax;
    Ok((disp, Some(force)))
}

pub const PATCH_BETAS: [f64; 4] = [0.2, 0.4, 0.6, 1.0];

pub fn verify_patch(families: &[Family]) -> Result<Report> {
    let mut report = Report {
        suite: "patch".into(),
        ..Default::default()
    };
    for &fam in families {
        let mut meshes = vec![("element", fam.mesh())];
        if fam != Family::Voronoi {
            meshes.push(("patch", fam.patch_mesh()));
        }
        for (kind, mesh) in &meshes {
            for beta in PATCH_BETAS {
                let name = format!("{} {kind} beta={beta}", fam.name());
                let (disp, force) = patch_errors(mesh, beta)?;
                report.checks.push(Check::new(format!("{name} displacement"), disp, 1e-9));
                if let Some(force) = force {
                    report.checks.push(Check::new(format!("{name} force"), force, 1e-9));
                }
            }
        }
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Finite differences

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Smallest distance between two nodes of one element.
pub fn min_node_spacing(mesh: &Mesh) -> f64 {
    let mut h = f64::INFINITY;
    for el in &mesh.elements {
        for (k, &a) in el.nodes.iter().enumerate() {
            for &b in &el.nodes[k + 1..] {
                h = h.min((mesh.nodes[a].x - mesh.nodes[b].x).norm());
            }
        }
    }
    h
}

/// Random state `u = G X + noise` with `|G| <= 0.05` and noise up to `2%` of the smallest node spacing.
pub fn random_state(mesh: &Mesh, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let d = mesh.dim;
    let g: Vec<f64> = (0..d * d).map(|_| rng.random_range(-0.05..0.05)).collect();
    let h = 4.0 * min_node_spacing(mesh);
    let mut u = Vec::with_capacity(d * mesh.n_nodes());
    for n in &mesh.nodes {
        for i in 0..d {
            let lin: f64 = (0..d).map(|j| g[i * d + j] * n.x[j]).sum();
            u.push(lin + rng.random_range(-0.005..0.005) * h);
        }
    }
    u
}

/// Relative max-norm errors `(residual vs dEnergy, tangent vs dResidual)` by central differences.
pub fn fd_errors(model: &Model, u: &[f64], step: f64) -> Result<(f64, f64)> {
    let ev = model.evaluate(u, true)?;
    let k = ev.tangent.expect("tangent requested");
    let n = model.n_dofs;
    let mut fd_r = vec![0.0; n];
    let mut k_err: f64 = 0.0;
    let k_max = max_abs(k.vals.iter().copied());
    for j in 0..n {
        let mut up = u.to_vec();
        let mut um = u.to_vec();
        up[j] += step;
        um[j] -= step;
        let ep = model.evaluate(&up, false)?;
        let em = model.evaluate(&um, false)?;
        fd_r[j] = (ep.energy - em.energy) / (2.0 * step);
        if let Some(col) = model.free_index[j] {
            for (row, &g) in model.free.iter().enumerate() {
                let fd = (ep.internal[g] - em.internal[g]) / (2.0 * step);
                k_err = k_err.max((fd - k.get(row, col)).abs());
            }
        }
    }
    let r_max = max_abs(ev.internal.iter().copied());
    let r_err = max_abs(fd_r.iter().zip(&ev.internal).map(|(a, b)| a - b));
    Ok((r_err / r_max, k_err / k_max))
}

/// Effective dynamic tangent `K + M / (zeta dt^2)` against differences of the dynamic residual,
/// and the residual against differences of the incremental potential.
pub fn dynamic_fd_errors(model: &Model, u: &[f64], u_star: &[f64], c: f64, t: f64, step: f64) -> Result<(f64, f64)> {
    let f = model.external_force(t);
    let potential = |u: &[f64]| -> Result<(f64, Vec<f64>)> {
        let ev = model.evaluate(u, false)?;
        let du: Vec<f64> = u.iter().zip(u_star).map(|(a, b)| a - b).collect();
        let mdu = model.mass.mul_vec(&du);
        let pi = ev.energy + 0.5 * c * du.iter().zip(&mdu).map(|(a, b)| a * b).sum::<f64>()
            - f.iter().zip(u).map(|(a, b)| a * b).sum::<f64>();
        let r = (0..u.len()).map(|k| ev.internal[k] + c * mdu[k] - f[k]).collect();
        Ok((pi, r))
    };
    let (_, r) = potential(u)?;
    let mut k = model.evaluate(u, true)?.tangent.expect("tangent requested");
    for (kv, m) in k.vals.iter_mut().zip(&model.mass_free.vals) {
        *kv += c * m;
    }
    let (mut r_err, mut k_err): (f64, f64) = (0.0, 0.0);
    for (col, &j) in model.free.iter().enumerate() {
        let mut up = u.to_vec();
        let mut um = u.to_vec();
        up[j] += step;
        um[j] -= step;
        let (pp, rp) = potential(&up)?;
        let (pm, rm) = potential(&um)?;
        r_err = r_err.max(((pp - pm) / (2.0 * step) - r[j]).abs());
        for (row, &g) in model.free.iter().enumerate() {
            k_err = k_err.max(((rp[g] - rm[g]) / (2.0 * step) - k.get(row, col)).abs());
        }
    }
    let r_max = max_abs(model.free.iter().map(|&g| r[g]));
    Ok((r_err / r_max, k_err / max_abs(k.vals.iter().copied())))
}

pub fn verify_fd(families: &[Family], states: usize) -> Result<Report> {
    let mut report = Report {
        suite: "fd".into(),
        ..Default::default()
    };
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for &fam in families {
        let mesh = fam.mesh();
        let model = Model::new(mesh, table_material(), ModelOptions::default(), &[])?;
        let (mut r, mut k): (f64, f64) = (0.0, 0.0);
        for _ in 0..states {
            let u = random_state(&model.mesh, &mut rng);
            let (er, ek) = fd_errors(&model, &u, 1e-6 * model.mesh.bbox_diagonal())?;
            r = r.max(er);
            k = k.max(ek);
        }
        report.checks.push(Check::new(format!("{} residual", fam.name()), r, 1e-5));
        report.checks.push(Check::new(format!("{} tangent", fam.name()), k, 1e-5));
    }
    // global incremental potential with inertia, loads and constraints
    let mesh = Family::Voronoi.mesh();
    let bcs = [
        BoundaryCondition::Fixed {
            set: "x_min".into(),
            components: None,
        },
        BoundaryCondition::Traction {
            set: "x_max".into(),
            value: vec![1.0e3, -2.0e3],
            time_function: TimeFunction::default(),
        },
        BoundaryCondition::BodyForce {
            value: vec![0.0, -50.0],
            time_function: TimeFunction::default(),
        },
    ];
    let options = ModelOptions {
        stabilization: StabilizationConfig {
            beta_stat: 0.4,
            beta_dyn: 0.3,
        },
        mass_scheme: MassScheme::BoundaryExact,
        ..Default::default()
    };
    let model = Model::new(mesh, table_material(), options, &bcs)?;
    let (mut r, mut k): (f64, f64) = (0.0, 0.0);
    let dt = 1e-6;
    let c = 1.0 / (0.25 * dt * dt);
    for _ in 0..states.min(3) {
        let mut u = random_state(&model.mesh, &mut rng);
        model.apply_dirichlet(&mut u, 0.0);
        let mut u_star = random_state(&model.mesh, &mut rng);
        model.apply_dirichlet(&mut u_star, 0.0);
        let (er, ek) = dynamic_fd_errors(&model, &u, &u_star, c, 0.0, 1e-6)?;
        r = r.max(er);
        k = k.max(ek);
    }
    report.checks.push(Check::new("global dynamic residual", r, 1e-5));
    report.checks.push(Check::new("global dynamic tangent", k, 1e-5));
    Ok(report)
}

// ---------------------------------------------------------------------------
// Mass quadrature

/// Gauss-Legendre nodes and weights on `[0, 1]`, four points.
fn gauss01() -> [(f64, f64); 4] {
    let x = [-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526];
    let w = [0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538];
    let mut g = [(0.0, 0.0); 4];
    for k in 0..4 {
        g[k] = (0.5 * (x[k] + 1.0), 0.5 * w[k]);
    }
    g
}

/// `(int 1, int X, int X X^T)` over a simplex by a collapsed product Gauss rule,
/// exact through degree 5 on triangles and 4 on tetrahedra.
pub fn simplex_quadrature_moments(v: &[Vec3], measure: f64) -> (f64, Vec3, Matrix3<f64>) {
    let g = gauss01();
    let (mut m0, mut m1, mut m2) = (0.0, Vec3::zeros(), Matrix3::zeros());
    let mut acc = |p: Vec3, w: f64| {
        m0 += w;
        m1 += p * w;
        m2 += p * p.transpose() * w;
    };
    if v.len() == 3 {
        for &(s, ws) in &g {
            for &(t, wt) in &g {
                let (l1, l2) = (s * (1.0 - t), s * t);
                let p = v[0] + (v[1] - v[0]) * l1 + (v[2] - v[0]) * l2;
                acc(p, ws * wt * s * 2.0 * measure);
            }
        }
    } else {
        for &(r, wr) in &g {
            for &(s, ws) in &g {
                for &(t, wt) in &g {
                    let l1 = r * (1.0 - s);
                    let l2 = r * s * (1.0 - t);
                    let l3 = r * s * t;
                    let p = v[0] + (v[1] - v[0]) * l1 + (v[2] - v[0]) * l2 + (v[3] - v[0]) * l3;
                    acc(p, wr * ws * wt * r * r * s * 6.0 * measure);
                }
            }
        }
    }
    (m0, m1, m2)
}

/// Unscaled monomial moment matrix of element `e` by quadrature over its submesh.
pub fn quadrature_moments(mesh: &Mesh, e: usize) -> Result<DMatrix<f64>> {
    let d = mesh.dim;
    let mut q = DMatrix::zeros(d + 1, d + 1);
    for s in subdivide_element(mesh, e)? {
        let (m0, m1, m2) = simplex_quadrature_moments(&mesh.coords(&s.nodes), s.measure);
        q[(0, 0)] += m0;
        for k in 0..d {
            q[(0, k + 1)] += m1[k];
            q[(k + 1, 0)] += m1[k];
            for l in 0..d {
                q[(k + 1, l + 1)] += m2[(k, l)];
            }
        }
    }
    Ok(q)
}

/// `(exact vs quadrature, worst degree <= 1 mismatch of the approximate schemes)` over all elements.
pub fn mass_errors(mesh: &Mesh) -> Result<(f64, f64)> {
    let basis = MonomialBasis::unscaled(mesh.dim);
    let (mut exact_err, mut low_err): (f64, f64) = (0.0, 0.0);
    for e in 0..mesh.elements.len() {
        let qe = monomial_moments(mesh, e, MassScheme::BoundaryExact, &basis)?;
        let qb = quadrature_moments(mesh, e)?;
        let scale = qb.abs().max();
        exact_err = exact_err.max((&qe - &qb).abs().max() / scale);
        for scheme in [MassScheme::Centroid, MassScheme::SubTriangulation] {
            let qa = monomial_moments(mesh, e, scheme, &basis)?;
            for k in 0..=mesh.dim {
                // degree <= 1 entries: the first row and column
                let rel = |a: f64, b: f64| (a - b).abs() / scale;
                low_err = low_err.max(rel(qa[(0, k)], qe[(0, k)])).max(rel(qa[(k, 0)], qe[(k, 0)]));
            }
        }
    }
    Ok((exact_err, low_err))
}

/// Quadrature test meshes: random Voronoi cells, a Q2S patch and an H2S patch.
pub fn mass_meshes() -> Vec<(String, Mesh)> {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let lo = Vec3::new(-1.0, 2.0, 0.0);
    let hi = Vec3::new(3.0, 4.5, 0.0);
    let seeds: Vec<Vec3> = (0..50)
        .map(|_| Vec3::new(rng.random_range(lo[0]..hi[0]), rng.random_range(lo[1]..hi[1]), 0.0))
        .collect();
    vec![
        ("voronoi".into(), generate_voronoi_2d(&seeds, lo, hi).expect("voronoi")),
        (
            "q2s".into(),
            generate_structured(StructuredKind::Q2s, &[3, 2], Vec3::new(1.0, 1.0, 0.0), Vec3::new(4.0, 3.0, 0.0))
                .expect("q2s"),
        ),
        (
            "h2s".into(),
            generate_structured(StructuredKind::H2s, &[2, 2, 1], Vec3::new(1.0, -1.0, 2.0), Vec3::new(3.0, 2.0, 3.5))
                .expect("h2s"),
        ),
    ]
}

pub fn verify_mass() -> Result<Report> {
    let mut report = Report {
        suite: "mass".into(),
        ..Default::default()
    };
    for (name, mesh) in mass_meshes() {
        let (exact, low) = mass_errors(&mesh)?;
        report.checks.push(Check::new(format!("{name} exact vs quadrature"), exact, 1e-12));
        report
            .checks
            .push(Check::new(format!("{name} centroid/sub-triangulation degree<=1"), low, 1e-14));
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Rigid modes

/// Eigenvalues `|lambda| < 1e-8 lambda_max` of the unconstrained static tangent at `u = 0`.
pub fn zero_eigenvalues(mesh: &Mesh, beta_stat: f64) -> Result<usize> {
    let options = ModelOptions {
        stabilization: StabilizationConfig {
            beta_stat,
            beta_dyn: 0.0,
        },
        ..Default::default()
    };
    let model = Model::new(mesh.clone(), table_material(), options, &[])?;
    let k = model
        .evaluate(&vec![0.0; model.n_dofs], true)?
        .tangent
        .ok_or_else(|| Error::Validation("no tangent".into()))?;
    let dense = k.to_dense();
    let n = dense.len();
    let m = DMatrix::from_fn(n, n, |i, j| dense[i][j]);
    let eig = SymmetricEigen::new(m).eigenvalues;
    let lmax = eig.iter().fold(0.0f64, |a, l| a.max(l.abs()));
    Ok(eig.iter().filter(|l| l.abs() < 1e-8 * lmax).count())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_integrates_unit_triangle() {
        let v = [Vec3::zeros(), Vec3::new(1.0, 0.0, 0.0), Vec3::new(0.0, 1.0, 0.0)];
        let (m0, m1, m2) = simplex_quadrature_moments(&v, 0.5);
        assert!((m0 - 0.5).abs() < 1e-15);
        assert!((m1[0] - 1.0 / 6.0).abs() < 1e-15);
        assert!((m2[(0, 0)] - 1.0 / 12.0).abs() < 1e-15);
        assert!((m2[(0, 1)] - 1.0 / 24.0).abs() < 1e-15);
    }

    #[test]
    fn quadrature_integrates_unit_tet() {
        let v = [
            Vec3::zeros(),
            Vec3::new(1.0, 0.0, 0.0),
            Vec3::new(0.0, 1.0, 0.0),
            Vec3::new(0.0, 0.0, 1.0),
        ];
        let (m0, m1, m2) = simplex_quadrature_moments(&v, 1.0 / 6.0);
        assert!((m0 - 1.0 / 6.0).abs() < 1e-15);
        assert!((m1[2] - 1.0 / 24.0).abs() < 1e-15);
        assert!((m2[(1, 1)] - 1.0 / 60.0).abs() < 1e-15);
        assert!((m2[(0, 2)] - 1.0 / 120.0).abs() < 1e-15);
    }

    #[test]
    fn families_build() {
        for f in Family::ALL {
            let m = f.mesh();
            assert_eq!(m.dim, f.dim());
            assert_eq!(Family::from_name(f.name()), Some(f));
        }
    }

    #[test]
    fn report_formatting() {
        let r = Report {
            suite: "demo".into(),
            checks: vec![Check::new("a", 1e-12, 1e-9), Check::new("b", f64::NAN, 1.0)],
        };
        assert!(!r.passed());
        let text = r.to_string();
        assert!(text.starts_with("PASS a"));
        assert!(text.contains("FAIL b"));
        assert!(text.ends_with("FAIL demo: 2 checks"));
    }
}

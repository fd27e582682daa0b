//! Structured mesh generators.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::{BoundarySet, Mesh, PolytopalElement, Vec3};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StructuredKind {
    /// 8-node quadrilateral loops (corners plus midsides).
    Q2s,
    /// 20-node hexahedra (corners plus edge midpoints), 8-node face loops.
    H2s,
    /// 4-node quadrilateral loops.
    Q1,
    /// 8-node hexahedra with 4-node faces.
    H1,
}

impl StructuredKind {
    pub fn dim(self) -> usize {
        match self {
            StructuredKind::Q2s | StructuredKind::Q1 => 2,
            StructuredKind::H2s | StructuredKind::H1 => 3,
        }
    }

    fn serendipity(self) -> bool {
        matches!(self, StructuredKind::Q2s | StructuredKind::H2s)
    }
}

/// Corner order of the hexahedron faces, each counter-clockwise seen from outside.
const HEX_FACES: [[usize; 4]; 6] = [
    [0, 3, 2, 1],
    [4, 5, 6, 7],
    [0, 1, 5, 4],
    [1, 2, 6, 5],
    [2, 3, 7, 6],
    [3, 0, 4, 7],
];
const HEX_CORNERS: [[usize; 3]; 8] = [
    [0, 0, 0],
    [1, 0, 0],
    [1, 1, 0],
    [0, 1, 0],
    [0, 0, 1],
    [1, 0, 1],
    [1, 1, 1],
    [0, 1, 1],
];

struct Lattice {
    ids: HashMap<[usize; 3], usize>,
    coords: Vec<Vec3>,
}

impl Lattice {
    fn new() -> Self {
        Self {
            ids: HashMap::new(),
            coords: Vec::new(),
        }
    }

    fn id(&self, key: [usize; 3]) -> usize {
        self.ids[&key]
    }
}

fn validate_divisions(divisions: &[usize], dim: usize, lo: &Vec3, hi: &Vec3) -> Result<()> {
    if divisions.len() != dim {
        return Err(Error::Validation(format!(
            "expected {dim} divisions, got {}",
            divisions.len()
        )));
    }
    if divisions.contains(&0) {
        return Err(Error::Validation("divisions must be at least 1 per axis".into()));
    }
    if (0..dim).any(|a| !(hi[a] > lo[a])) {
        return Err(Error::Validation("box max must exceed box min on every axis".into()));
    }
    Ok(())
}

/// Structured mesh of the box `[lo, hi]` with bounding-box boundary sets.
pub fn generate_structured(
    kind: StructuredKind,
    divisions: &[usize],
    lo: Vec3,
    hi: Vec3,
) -> Result<Mesh> {
    let dim = kind.dim();
    validate_divisions(divisions, dim, &lo, &hi)?;
    let map = move |s: Vec3| lo + (hi - lo).component_mul(&s);
    build_structured(kind, divisions, &map)
}

/// 2D serendipity-layout mesh of the unit square pushed through `map`.
///
/// Used for tapered panels such as Cook's membrane: elements are straight-sided
/// as long as `map` is bilinear.
pub fn generate_mapped_q2s(divisions: &[usize], map: &dyn Fn(Vec3) -> Vec3) -> Result<Mesh> {
    validate_divisions(divisions, 2, &Vec3::zeros(), &Vec3::new(1.0, 1.0, 1.0))?;
    build_structured(StructuredKind::Q2s, divisions, map)
}

fn build_structured(
    kind: StructuredKind,
    divisions: &[usize],
    map: &dyn Fn(Vec3) -> Vec3,
) -> Result<Mesh> {
    let dim = kind.dim();
    let step = if kind.serendipity() { 2 } else { 1 };
    let n = [
        divisions[0] * step,
        divisions[1] * step,
        if dim == 3 { divisions[2] * step } else { 0 },
    ];
    let mut lat = Lattice::new();
    for k in 0..=n[2] {
        for j in 0..=n[1] {
            for i in 0..=n[0] {
                let odd = (i % 2) + (j % 2) + (k % 2);
                if kind.serendipity() && odd > 1 {
                    continue;
                }
                let s = Vec3::new(
                    i as f64 / n[0] as f64,
                    j as f64 / n[1] as f64,
                    if dim == 3 { k as f64 / n[2] as f64 } else { 0.0 },
                );
                let mut x = map(s);
                if dim == 2 {
                    x.z = 0.0;
                }
                lat.ids.insert([i, j, k], lat.coords.len());
                lat.coords.push(x);
            }
        }
    }
    let mut elements = Vec::new();
    if dim == 2 {
        for cy in 0..divisions[1] {
            for cx in 0..divisions[0] {
                let (i, j) = (cx * step, cy * step);
                let loop_keys: Vec<[usize; 3]> = if kind.serendipity() {
                    vec![
                        [i, j, 0],
                        [i + 1, j, 0],
                        [i + 2, j, 0],
                        [i + 2, j + 1, 0],
                        [i + 2, j + 2, 0],
                        [i + 1, j + 2, 0],
                        [i, j + 2, 0],
                        [i, j + 1, 0],
                    ]
                } else {
                    vec![[i, j, 0], [i + 1, j, 0], [i + 1, j + 1, 0], [i, j + 1, 0]]
                };
                elements.push(PolytopalElement::polygon(
                    loop_keys.iter().map(|k| lat.id(*k)).collect(),
                ));
            }
        }
    } else {
        for cz in 0..divisions[2] {
            for cy in 0..divisions[1] {
                for cx in 0..divisions[0] {
                    let base = [cx * step, cy * step, cz * step];
                    let corner = |c: usize| -> [usize; 3] {
                        let o = HEX_CORNERS[c];
                        [
                            base[0] + o[0] * step,
                            base[1] + o[1] * step,
                            base[2] + o[2] * step,
                        ]
                    };
                    let faces: Vec<Vec<usize>> = HEX_FACES
                        .iter()
                        .map(|f| {
                            let mut keys = Vec::new();
                            for m in 0..4 {
                                let a = corner(f[m]);
                                keys.push(a);
                                if kind.serendipity() {
                                    let b = corner(f[(m + 1) % 4]);
                                    keys.push([(a[0] + b[0]) / 2, (a[1] + b[1]) / 2, (a[2] + b[2]) / 2]);
                                }
                            }
                            keys.iter().map(|k| lat.id(*k)).collect()
                        })
                        .collect();
                    let mut el = PolytopalElement::polyhedron(faces);
                    el.nodes.sort_unstable();
                    elements.push(el);
                }
            }
        }
    }
    finish(dim, lat.coords, elements)
}

fn finish(dim: usize, coords: Vec<Vec3>, elements: Vec<PolytopalElement>) -> Result<Mesh> {
    let mut mesh = Mesh {
        dim,
        nodes: coords
            .into_iter()
            .enumerate()
            .map(|(id, x)| super::Node { id, x })
            .collect(),
        elements,
        boundary_sets: BTreeMap::new(),
    };
    mesh.add_bbox_sets();
    mesh.validate()?;
    Ok(mesh)
}

/// Strip of non-convex "C" cells, each paired with the rectangle filling its notch.
///
/// A cell of size `w x h` holds the C loop
/// `(0,0) (w,0) (w,h/3) (w/3,h/3) (w/3,2h/3) (w,2h/3) (w,h) (0,h) (0,2h/3) (0,h/3)`
/// whose centroid lies inside the notch, i.e. outside the element.
pub fn generate_c_mesh(nx: usize, ny: usize, lo: Vec3, hi: Vec3) -> Result<Mesh> {
    validate_divisions(&[nx, ny], 2, &lo, &hi)?;
    let w = (hi.x - lo.x) / nx as f64;
    let h = (hi.y - lo.y) / ny as f64;
    // lattice columns: cell edge (even) and inner corner at w/3 (odd); rows at thirds of a cell
    let mut lat = Lattice::new();
    for r in 0..=3 * ny {
        for c in 0..=2 * nx {
            let cell_row_offset = r % 3;
            let inner = c % 2 == 1;
            if inner && (cell_row_offset == 0 || c == 2 * nx) {
                continue;
            }
            let x = lo.x + (c / 2) as f64 * w + if inner { w / 3.0 } else { 0.0 };
            let y = lo.y + (r / 3) as f64 * h + cell_row_offset as f64 * h / 3.0;
            lat.ids.insert([c, r, 0], lat.coords.len());
            lat.coords.push(Vec3::new(x, y, 0.0));
        }
    }
    let mut elements = Vec::new();
    for j in 0..ny {
        for i in 0..nx {
            let (c, r) = (2 * i, 3 * j);
            let id = |dc: usize, dr: usize| lat.id([c + dc, r + dr, 0]);
            elements.push(PolytopalElement::polygon(vec![
                id(0, 0),
                id(2, 0),
                id(2, 1),
                id(1, 1),
                id(1, 2),
                id(2, 2),
                id(2, 3),
                id(0, 3),
                id(0, 2),
                id(0, 1),
            ]));
            elements.push(PolytopalElement::polygon(vec![
                id(1, 1),
                id(2, 1),
                id(2, 2),
                id(1, 2),
            ]));
        }
    }
    finish(2, lat.coords, elements)
}

/// Extrudes a 2D mesh along z into prismatic polyhedra.
///
/// Every 2D boundary set becomes the set of side faces above its edges;
/// `z_min` and `z_max` are added for the caps.
pub fn extrude(mesh: &Mesh, layers: usize, thickness: f64) -> Result<Mesh> {
    if mesh.dim != 2 {
        return Err(Error::Validation("only 2D meshes can be extruded".into()));
    }
    if layers == 0 || !(thickness > 0.0) {
        return Err(Error::Validation("extrusion needs at least one layer and positive thickness".into()));
    }
    let nn = mesh.n_nodes();
    let id = |node: usize, layer: usize| layer * nn + node;
    let mut coords = Vec::with_capacity(nn * (layers + 1));
    for l in 0..=layers {
        let z = thickness * l as f64 / layers as f64;
        for n in &mesh.nodes {
            coords.push(Vec3::new(n.x.x, n.x.y, z));
        }
    }
    let mut elements = Vec::new();
    for l in 0..layers {
        for el in &mesh.elements {
            let m = el.nodes.len();
            let mut faces = Vec::with_capacity(m + 2);
            faces.push(el.nodes.iter().rev().map(|&n| id(n, l)).collect());
            faces.push(el.nodes.iter().map(|&n| id(n, l + 1)).collect());
            for i in 0..m {
                let (a, b) = (el.nodes[i], el.nodes[(i + 1) % m]);
                faces.push(vec![id(a, l), id(b, l), id(b, l + 1), id(a, l + 1)]);
            }
            let mut p = PolytopalElement::polyhedron(faces);
            p.tag = el.tag;
            elements.push(p);
        }
    }
    let mut out = Mesh {
        dim: 3,
        nodes: coords
            .into_iter()
            .enumerate()
            .map(|(id, x)| super::Node { id, x })
            .collect(),
        elements,
        boundary_sets: BTreeMap::new(),
    };
    for (name, set) in &mesh.boundary_sets {
        let nodes = (0..=layers)
            .flat_map(|l| set.nodes.iter().map(move |&n| id(n, l)))
            .collect();
        let facets = (0..layers)
            .flat_map(|l| {
                set.facets
                    .iter()
                    .map(move |f| vec![id(f[0], l), id(f[1], l), id(f[1], l + 1), id(f[0], l + 1)])
            })
            .collect();
        out.boundary_sets
            .insert(name.clone(), BoundarySet { nodes, facets });
    }
    let zsets: Vec<(String, BoundarySet)> = {
        let mut probe = out.clone();
        probe.boundary_sets.clear();
        probe.add_bbox_sets();
        probe
            .boundary_sets
            .into_iter()
            .filter(|(k, _)| k.starts_with("z_") || k == "all")
            .collect()
    };
    out.boundary_sets.extend(zsets);
    out.validate()?;
    Ok(out)
}

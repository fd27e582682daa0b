//! Polytopal mesh data model.
//!
//! Coordinates are always stored as 3-vectors; two-dimensional meshes keep
//! `z = 0`. A 2D element is a counter-clockwise loop of node ids. A 3D element
//! carries its vertex set plus face loops that are oriented with outward normals.

mod generate;
mod geometry;
mod io;
mod subdivide;
mod voronoi;

use std::collections::{BTreeMap, HashMap};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use generate::{extrude, generate_c_mesh, generate_mapped_q2s, generate_structured, StructuredKind};
pub use geometry::{
    check_closed_surface, face_geometry, newell_vector_area, polygon_area_centroid,
    polygon_signed_area, polyhedron_volume_centroid, triangulate_faces, SurfaceTriangle,
};
pub use io::{load_mesh, mesh_from_json, mesh_to_json, save_mesh};
pub use subdivide::{subdivide_element, Simplex};
pub use voronoi::generate_voronoi_2d;

pub type Vec3 = Vector3<f64>;

#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub id: usize,
    pub x: Vec3,
}

#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct PolytopalElement {
    /// 2D: counter-clockwise boundary loop. 3D: vertex set.
    pub nodes: Vec<usize>,
    /// 3D only: face loops with outward orientation.
    pub faces: Vec<Vec<usize>>,
    pub tag: u32,
}

impl PolytopalElement {
    pub fn polygon(nodes: Vec<usize>) -> Self {
        Self {
            nodes,
            faces: Vec::new(),
            tag: 0,
        }
    }

    /// Builds a polyhedron from its faces; the vertex set is collected in order of first appearance.
    pub fn polyhedron(faces: Vec<Vec<usize>>) -> Self {
        let mut nodes = Vec::new();
        for f in &faces {
            for &n in f {
                if !nodes.contains(&n) {
                    nodes.push(n);
                }
            }
        }
        Self {
            nodes,
            faces,
            tag: 0,
        }
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundarySet {
    #[serde(default)]
    pub nodes: Vec<usize>,
    #[serde(default)]
    pub facets: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh {
    pub dim: usize,
    pub nodes: Vec<Node>,
    pub elements: Vec<PolytopalElement>,
    pub boundary_sets: BTreeMap<String, BoundarySet>,
}

impl Mesh {
    /// Builds and validates a mesh.
    pub fn new(
        dim: usize,
        coords: Vec<Vec3>,
        elements: Vec<PolytopalElement>,
        boundary_sets: BTreeMap<String, BoundarySet>,
    ) -> Result<Self> {
        let nodes = coords
            .into_iter()
            .enumerate()
            .map(|(id, x)| Node { id, x })
            .collect();
        let mesh = Self {
            dim,
            nodes,
            elements,
            boundary_sets,
        };
        mesh.validate()?;
        Ok(mesh)
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn coords(&self, ids: &[usize]) -> Vec<Vec3> {
        ids.iter().map(|&i| self.nodes[i].x).collect()
    }

    pub fn bbox(&self) -> (Vec3, Vec3) {
        bbox_of(self.nodes.iter().map(|n| &n.x))
    }

    pub fn bbox_diagonal(&self) -> f64 {
        let (lo, hi) = self.bbox();
        (hi - lo).norm()
    }

    /// Measure (area or volume) and centroid of element `e`.
    pub fn element_measure_centroid(&self, e: usize) -> Result<(f64, Vec3)> {
        let el = &self.elements[e];
        let res = if self.dim == 2 {
            polygon_area_centroid(&self.coords(&el.nodes))
        } else {
            polyhedron_volume_centroid(el, &self.nodes)
        };
        res.map_err(|err| err.at_element(e))
    }

    /// Checks every structural and geometric invariant of the data model.
    pub fn validate(&self) -> Result<()> {
        if self.dim != 2 && self.dim != 3 {
            return Err(Error::Validation(format!(
                "dimension must be 2 or 3, got {}",
                self.dim
            )));
        }
        let n = self.nodes.len();
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id != i {
                return Err(Error::Validation(format!(
                    "node ids must be dense: position {i} holds id {}",
                    node.id
                )));
            }
            if !node.x.iter().all(|c| c.is_finite()) {
                return Err(Error::Validation(format!("node {i} has non-finite coordinates")));
            }
            if self.dim == 2 && node.x.z != 0.0 {
                return Err(Error::Validation(format!("2D node {i} has non-zero z")));
            }
        }
        self.check_duplicate_nodes()?;
        for (e, el) in self.elements.iter().enumerate() {
            for &id in el.nodes.iter().chain(el.faces.iter().flatten()) {
                if id >= n {
                    return Err(Error::Validation(format!(
                        "element {e} references node {id}, but the mesh has {n} nodes"
                    )));
                }
            }
            if self.dim == 2 {
                if el.nodes.len() < 3 {
                    return Err(Error::Validation(format!(
                        "element {e} loop has {} nodes (at least 3 required)",
                        el.nodes.len()
                    )));
                }
                let pts = self.coords(&el.nodes);
                if !geometry::polygon_is_simple(&pts) {
                    return Err(Error::Validation(format!(
                        "element {e} loop is self-intersecting"
                    )));
                }
                polygon_area_centroid(&pts).map_err(|err| err.at_element(e))?;
            } else {
                if el.faces.len() < 4 {
                    return Err(Error::Validation(format!(
                        "element {e} has {} faces (at least 4 required)",
                        el.faces.len()
                    )));
                }
                for f in &el.faces {
                    if f.len() < 3 {
                        return Err(Error::FaceTooSmall { nodes: f.len() });
                    }
                    if let Some(&bad) = f.iter().find(|id| !el.nodes.contains(id)) {
                        return Err(Error::Validation(format!(
                            "element {e} face references node {bad} outside its vertex set"
                        )));
                    }
                }
                self.element_measure_centroid(e)?;
            }
        }
        for (name, set) in &self.boundary_sets {
            for &id in set.nodes.iter().chain(set.facets.iter().flatten()) {
                if id >= n {
                    return Err(Error::Validation(format!(
                        "boundary set '{name}' references node {id}, but the mesh has {n} nodes"
                    )));
                }
            }
        }
        Ok(())
    }

    fn check_duplicate_nodes(&self) -> Result<()> {
        if self.nodes.len() < 2 {
            return Ok(());
        }
        let tol = 1e-12 * self.bbox_diagonal();
        let mut order: Vec<usize> = (0..self.nodes.len()).collect();
        order.sort_by(|&a, &b| self.nodes[a].x.x.total_cmp(&self.nodes[b].x.x));
        for (k, &a) in order.iter().enumerate() {
            for &b in &order[k + 1..] {
                if self.nodes[b].x.x - self.nodes[a].x.x > tol {
                    break;
                }
                if (self.nodes[b].x - self.nodes[a].x).norm() <= tol {
                    return Err(Error::Validation(format!(
                        "nodes {a} and {b} coincide within 1e-12 of the bounding-box diagonal"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Facets (2D edges, 3D faces) that belong to exactly one element, keyed by sorted node ids.
    pub fn boundary_facets(&self) -> HashMap<Vec<usize>, usize> {
        let mut count: HashMap<Vec<usize>, (usize, usize)> = HashMap::new();
        for (e, el) in self.elements.iter().enumerate() {
            for facet in self.element_facets(el) {
                let mut key = facet;
                key.sort_unstable();
                count.entry(key).or_insert((0, e)).0 += 1;
            }
        }
        count
            .into_iter()
            .filter(|(_, (c, _))| *c == 1)
            .map(|(k, (_, e))| (k, e))
            .collect()
    }

    fn element_facets(&self, el: &PolytopalElement) -> Vec<Vec<usize>> {
        if self.dim == 2 {
            let n = el.nodes.len();
            (0..n).map(|i| vec![el.nodes[i], el.nodes[(i + 1) % n]]).collect()
        } else {
            el.faces.clone()
        }
    }

    pub fn boundary_set(&self, name: &str) -> Result<&BoundarySet> {
        self.boundary_sets
            .get(name)
            .ok_or_else(|| Error::Validation(format!("unknown boundary set '{name}'")))
    }

    /// Adds boundary sets `x_min`, `x_max`, ... from the facets lying on the bounding-box planes,
    /// plus an `all` node set.
    pub fn add_bbox_sets(&mut self) {
        let (lo, hi) = self.bbox();
        let tol = 1e-9 * self.bbox_diagonal();
        let facets = {
            let mut f: Vec<Vec<usize>> = Vec::new();
            for el in &self.elements {
                f.extend(self.element_facets(el));
            }
            f
        };
        let bfacets = self.boundary_facets();
        let axes = ["x", "y", "z"];
        for axis in 0..self.dim {
            for (side, value) in [("min", lo[axis]), ("max", hi[axis])] {
                let on = |id: usize| (self.nodes[id].x[axis] - value).abs() <= tol;
                let nodes: Vec<usize> = (0..self.nodes.len()).filter(|&i| on(i)).collect();
                let set_facets: Vec<Vec<usize>> = facets
                    .iter()
                    .filter(|f| f.iter().all(|&i| on(i)))
                    .filter(|f| {
                        let mut k = (*f).clone();
                        k.sort_unstable();
                        bfacets.contains_key(&k)
                    })
                    .cloned()
                    .collect();
                self.boundary_sets.insert(
                    format!("{}_{}", axes[axis], side),
                    BoundarySet {
                        nodes,
                        facets: set_facets,
                    },
                );
            }
        }
        self.boundary_sets.insert(
            "all".into(),
            BoundarySet {
                nodes: (0..self.nodes.len()).collect(),
                facets: Vec::new(),
            },
        );
    }

    /// Node nearest to `p`.
    pub fn nearest_node(&self, p: &Vec3) -> usize {
        self.nodes
            .iter()
            .min_by(|a, b| (a.x - p).norm_squared().total_cmp(&(b.x - p).norm_squared()))
            .map(|n| n.id)
            .unwrap_or(0)
    }
}

pub(crate) fn bbox_of<'a>(pts: impl IntoIterator<Item = &'a Vec3>) -> (Vec3, Vec3) {
    let mut lo = Vec3::repeat(f64::INFINITY);
    let mut hi = Vec3::repeat(f64::NEG_INFINITY);
    for p in pts {
        lo = lo.inf(p);
        hi = hi.sup(p);
    }
    (lo, hi)
}

//! CSV histories, VTK legacy snapshots and the run summary.

use std::fmt::Write as _;

use crate::mesh::{triangulate_faces, Mesh};

/// Time history of one probe node.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct History {
    pub node: usize,
    pub t: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub a: Vec<Vec<f64>>,
}

impl History {
    pub fn new(node: usize) -> Self {
        Self {
            node,
            ..Default::default()
        }
    }

    /// Component `axis` of the displacement history.
    pub fn displacement(&self, axis: usize) -> Vec<f64> {
        self.u.iter().map(|u| u[axis]).collect()
    }

    pub fn to_csv(&self, dim: usize) -> String {
        let axes = ["x", "y", "z"];
        let mut s = String::from("t");
        for q in ["u", "v", "a"] {
            for ax in &axes[..dim] {
                let _ = write!(s, ",{q}_{ax}");
            }
        }
        s.push('\n');
        for k in 0..self.t.len() {
            let _ = write!(s, "{:.12e}", self.t[k]);
            for q in [&self.u[k], &self.v[k], &self.a[k]] {
                for x in q.iter().take(dim) {
                    let _ = write!(s, ",{x:.12e}");
                }
            }
            s.push('\n');
        }
        s
    }
}

/// VTK legacy unstructured grid. Polygons are cell type 7; polyhedra are written as
/// their triangulated surfaces (type 5), tagged with the owning element.
pub fn vtk_snapshot(mesh: &Mesh, u: &[f64], v: &[f64], title: &str) -> String {
    let d = mesh.dim;
    let mut s = String::new();
    let _ = writeln!(s, "# vtk DataFile Version 3.0");
    let _ = writeln!(s, "{}", title.replace('\n', " "));
    let _ = writeln!(s, "ASCII\nDATASET UNSTRUCTURED_GRID");
    let _ = writeln!(s, "POINTS {} double", mesh.n_nodes());
    for n in &mesh.nodes {
        let _ = writeln!(s, "{:.12e} {:.12e} {:.12e}", n.x[0], n.x[1], n.x[2]);
    }
    let mut cells: Vec<(Vec<usize>, u8, usize)> = Vec::new();
    for (e, el) in mesh.elements.iter().enumerate() {
        if d == 2 {
            cells.push((el.nodes.clone(), 7, e));
        } else {
            let tris = triangulate_faces(el, &mesh.nodes).unwrap_or_default();
            for t in tris.iter().filter(|t| !t.degenerate) {
                cells.push((t.nodes.to_vec(), 5, e));
            }
        }
    }
    let size: usize = cells.iter().map(|c| c.0.len() + 1).sum();
    let _ = writeln!(s, "CELLS {} {}", cells.len(), size);
    for (nodes, _, _) in &cells {
        let _ = write!(s, "{}", nodes.len());
        for n in nodes {
            let _ = write!(s, " {n}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {}", cells.len());
    for (_, ty, _) in &cells {
        let _ = writeln!(s, "{ty}");
    }
    let _ = writeln!(s, "CELL_DATA {}\nSCALARS element int 1\nLOOKUP_TABLE default", cells.len());
    for (_, _, e) in &cells {
        let _ = writeln!(s, "{e}");
    }
    let _ = writeln!(s, "POINT_DATA {}", mesh.n_nodes());
    for (name, field) in [("displacement", u), ("velocity", v)] {
        let _ = writeln!(s, "VECTORS {name} double");
        for n in 0..mesh.n_nodes() {
            let mut c = [0.0; 3];
            c[..d].copy_from_slice(&field[n * d..n * d + d]);
            let _ = writeln!(s, "{:.12e} {:.12e} {:.12e}", c[0], c[1], c[2]);
        }
    }
    s
}

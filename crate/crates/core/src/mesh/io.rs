//! JSON mesh files.
//!
//! ```text
//! { "dimension": 2,
//!   "nodes": [[x, y], ...],
//!   "elements": [[0, 1, 2, 3], ...]            (3D: [{"nodes": [...], "faces": [[...], ...]}, ...])
//!   "tags": [0, ...],                          (optional)
//!   "boundary_sets": {"name": {"nodes": [...], "facets": [[...], ...]}} }
//! ```

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use serde::Deserialize;

use super::{BoundarySet, Mesh, Node, PolytopalElement, Vec3};
use crate::error::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMesh {
    dimension: usize,
    nodes: Vec<Vec<f64>>,
    elements: Vec<RawElement>,
    #[serde(default)]
    tags: Option<Vec<u32>>,
    #[serde(default)]
    boundary_sets: BTreeMap<String, BoundarySet>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RawElement {
    Loop(Vec<usize>),
    Polyhedron {
        #[serde(default)]
        nodes: Vec<usize>,
        faces: Vec<Vec<usize>>,
    },
}

pub fn mesh_from_json(text: &str) -> Result<Mesh> {
    let raw: RawMesh = serde_json::from_str(text).map_err(|e| Error::Parse {
        location: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    let dim = raw.dimension;
    if dim != 2 && dim != 3 {
        return Err(Error::Validation(format!("field 'dimension' must be 2 or 3, got {dim}")));
    }
    let mut nodes = Vec::with_capacity(raw.nodes.len());
    for (i, c) in raw.nodes.iter().enumerate() {
        if c.len() != dim {
            return Err(Error::Parse {
                location: format!("nodes[{i}]"),
                message: format!("expected {dim} coordinates, got {}", c.len()),
            });
        }
        let x = Vec3::new(c[0], c[1], if dim == 3 { c[2] } else { 0.0 });
        nodes.push(Node { id: i, x });
    }
    let mut elements = Vec::with_capacity(raw.elements.len());
    for (e, re) in raw.elements.into_iter().enumerate() {
        let el = match (dim, re) {
            (2, RawElement::Loop(l)) => PolytopalElement::polygon(l),
            (3, RawElement::Polyhedron { nodes, faces }) => {
                let mut el = PolytopalElement::polyhedron(faces);
                if !nodes.is_empty() {
                    el.nodes = nodes;
                }
                el
            }
            (2, _) => {
                return Err(Error::Parse {
                    location: format!("elements[{e}]"),
                    message: "2D elements must be node-id loops".into(),
                })
            }
            _ => {
                return Err(Error::Parse {
                    location: format!("elements[{e}]"),
                    message: "3D elements must be objects with 'nodes' and 'faces'".into(),
                })
            }
        };
        elements.push(el);
    }
    if let Some(tags) = raw.tags {
        if tags.len() != elements.len() {
            return Err(Error::Parse {
                location: "tags".into(),
                message: format!("expected {} tags, got {}", elements.len(), tags.len()),
            });
        }
        for (el, t) in elements.iter_mut().zip(tags) {
            el.tag = t;
        }
    }
    let mesh = Mesh {
        dim,
        nodes,
        elements,
        boundary_sets: raw.boundary_sets,
    };
    mesh.validate()?;
    Ok(mesh)
}

fn id_list(ids: &[usize]) -> String {
    let parts: Vec<String> = ids.iter().map(|i| i.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

fn nested(lists: &[Vec<usize>]) -> String {
    let parts: Vec<String> = lists.iter().map(|l| id_list(l)).collect();
    format!("[{}]", parts.join(", "))
}

/// Serializes with 17 significant digits per coordinate.
pub fn mesh_to_json(mesh: &Mesh) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{{\n  \"dimension\": {},\n  \"nodes\": [", mesh.dim);
    for (i, n) in mesh.nodes.iter().enumerate() {
        let sep = if i + 1 < mesh.nodes.len() { "," } else { "" };
        if mesh.dim == 2 {
            let _ = writeln!(s, "    [{:.16e}, {:.16e}]{sep}", n.x.x, n.x.y);
        } else {
            let _ = writeln!(s, "    [{:.16e}, {:.16e}, {:.16e}]{sep}", n.x.x, n.x.y, n.x.z);
        }
    }
    s.push_str("  ],\n  \"elements\": [\n");
    for (i, el) in mesh.elements.iter().enumerate() {
        let sep = if i + 1 < mesh.elements.len() { "," } else { "" };
        if mesh.dim == 2 {
            let _ = writeln!(s, "    {}{sep}", id_list(&el.nodes));
        } else {
            let _ = writeln!(
                s,
                "    {{\"nodes\": {}, \"faces\": {}}}{sep}",
                id_list(&el.nodes),
                nested(&el.faces)
            );
        }
    }
    s.push_str("  ],\n");
    if mesh.elements.iter().any(|e| e.tag != 0) {
        let tags: Vec<String> = mesh.elements.iter().map(|e| e.tag.to_string()).collect();
        let _ = writeln!(s, "  \"tags\": [{}],", tags.join(", "));
    }
    s.push_str("  \"boundary_sets\": {");
    let n_sets = mesh.boundary_sets.len();
    for (k, (name, set)) in mesh.boundary_sets.iter().enumerate() {
        let sep = if k + 1 < n_sets { "," } else { "" };
        let _ = write!(
            s,
            "\n    {}: {{\"nodes\": {}, \"facets\": {}}}{sep}",
            serde_json::to_string(name).unwrap_or_default(),
            id_list(&set.nodes),
            nested(&set.facets)
        );
    }
    s.push_str(if n_sets > 0 { "\n  }\n}\n" } else { "}\n}\n" });
    s
}

pub fn load_mesh(path: &Path) -> Result<Mesh> {
    let text = std::fs::read_to_string(path)?;
    mesh_from_json(&text)
}

pub fn save_mesh(mesh: &Mesh, path: &Path) -> Result<()> {
    std::fs::write(path, mesh_to_json(mesh))?;
    Ok(())
}

//! Clipped 2D Voronoi tessellation of an axis-aligned box.

use std::collections::BTreeMap;

use super::{geometry::polygon_signed_area, Mesh, Node, PolytopalElement, Vec3};
use crate::error::{Error, Result};

/// Clips the convex polygon `poly` to the half-plane `{x : n·x <= c}`.
fn clip(poly: &[Vec3], n: &Vec3, c: f64) -> Vec<Vec3> {
    let mut out = Vec::with_capacity(poly.len() + 1);
    let m = poly.len();
    for i in 0..m {
        let p = poly[i];
        let q = poly[(i + 1) % m];
        let dp = n.dot(&p) - c;
        let dq = n.dot(&q) - c;
        if dp <= 0.0 {
            out.push(p);
        }
        if (dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0) {
            let s = dp / (dp - dq);
            out.push(p + s * (q - p));
        }
    }
    out
}

/// Voronoi cells of `seeds` clipped to the box `[lo, hi]` (z ignored).
///
/// Cell vertices shared by neighbouring cells are merged, and vertices lying on a
/// neighbour's edge are inserted into that edge so the mesh is conforming.
pub fn generate_voronoi_2d(seeds: &[Vec3], lo: Vec3, hi: Vec3) -> Result<Mesh> {
    if seeds.is_empty() {
        return Err(Error::Validation("at least one Voronoi seed is required".into()));
    }
    if !(hi.x > lo.x && hi.y > lo.y) {
        return Err(Error::Validation("box max must exceed box min on every axis".into()));
    }
    let diag = ((hi.x - lo.x).powi(2) + (hi.y - lo.y).powi(2)).sqrt();
    let seeds: Vec<Vec3> = seeds.iter().map(|s| Vec3::new(s.x, s.y, 0.0)).collect();
    for (i, s) in seeds.iter().enumerate() {
        if s.x < lo.x || s.x > hi.x || s.y < lo.y || s.y > hi.y || !s.x.is_finite() || !s.y.is_finite() {
            return Err(Error::Validation(format!("seed {i} lies outside the box")));
        }
    }
    let dup_tol = 1e-12 * diag;
    for i in 0..seeds.len() {
        for j in i + 1..seeds.len() {
            if (seeds[i] - seeds[j]).norm() <= dup_tol {
                return Err(Error::DuplicateSeeds { first: i, second: j });
            }
        }
    }

    let square = vec![
        Vec3::new(lo.x, lo.y, 0.0),
        Vec3::new(hi.x, lo.y, 0.0),
        Vec3::new(hi.x, hi.y, 0.0),
        Vec3::new(lo.x, hi.y, 0.0),
    ];
    let mut cells: Vec<Vec<Vec3>> = Vec::with_capacity(seeds.len());
    for (i, s) in seeds.iter().enumerate() {
        let mut poly = square.clone();
        for (j, t) in seeds.iter().enumerate() {
            if i == j {
                continue;
            }
            let n = t - s;
            let c = n.dot(&(0.5 * (s + t)));
            poly = clip(&poly, &n, c);
            if poly.is_empty() {
                break;
            }
        }
        cells.push(poly);
    }

    // global vertex merge on a quantized grid; neighbours in the 3x3 stencil are checked
    let merge_tol = 1e-9 * diag;
    let mut coords: Vec<Vec3> = Vec::new();
    let mut grid: BTreeMap<(i64, i64), Vec<usize>> = BTreeMap::new();
    let key = |p: &Vec3| {
        (
            ((p.x - lo.x) / merge_tol / 4.0).floor() as i64,
            ((p.y - lo.y) / merge_tol / 4.0).floor() as i64,
        )
    };
    let mut loops: Vec<Vec<usize>> = Vec::with_capacity(cells.len());
    for poly in &cells {
        let mut ids: Vec<usize> = Vec::with_capacity(poly.len());
        for p in poly {
            let (kx, ky) = key(p);
            let mut found = None;
            'search: for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(list) = grid.get(&(kx + dx, ky + dy)) {
                        for &id in list {
                            if (coords[id] - p).norm() <= merge_tol {
                                found = Some(id);
                                break 'search;
                            }
                        }
                    }
                }
            }
            let id = found.unwrap_or_else(|| {
                coords.push(*p);
                grid.entry((kx, ky)).or_default().push(coords.len() - 1);
                coords.len() - 1
            });
            if ids.last() != Some(&id) && ids.first() != Some(&id) {
                ids.push(id);
            }
        }
        loops.push(ids);
    }

    // conformity: insert vertices that sit on the interior of another cell's edge
    let edge_tol = 1e-9 * diag;
    for l in loops.iter_mut() {
        let mut out = Vec::with_capacity(l.len());
        let m = l.len();
        for i in 0..m {
            let (a, b) = (l[i], l[(i + 1) % m]);
            out.push(a);
            let (pa, pb) = (coords[a], coords[b]);
            let e = pb - pa;
            let len2 = e.norm_squared();
            let mut hanging: Vec<(f64, usize)> = Vec::new();
            for (id, p) in coords.iter().enumerate() {
                if id == a || id == b {
                    continue;
                }
                let s = (p - pa).dot(&e) / len2;
                if s <= 0.0 || s >= 1.0 {
                    continue;
                }
                let dist = (p - (pa + s * e)).norm();
                if dist <= edge_tol {
                    hanging.push((s, id));
                }
            }
            hanging.sort_by(|x, y| x.0.total_cmp(&y.0));
            out.extend(hanging.into_iter().map(|(_, id)| id));
        }
        *l = out;
    }

    let area_tol = 1e-14 * diag * diag;
    let mut elements = Vec::with_capacity(loops.len());
    for (i, l) in loops.into_iter().enumerate() {
        let pts: Vec<Vec3> = l.iter().map(|&id| coords[id]).collect();
        if l.len() < 3 || polygon_signed_area(&pts) <= area_tol {
            return Err(Error::Validation(format!("Voronoi cell of seed {i} is degenerate")));
        }
        elements.push(PolytopalElement::polygon(l));
    }

    let mut mesh = Mesh {
        dim: 2,
        nodes: coords
            .into_iter()
            .enumerate()
            .map(|(id, x)| Node { id, x })
            .collect(),
        elements,
        boundary_sets: BTreeMap::new(),
    };
    mesh.add_bbox_sets();
    mesh.validate()?;
    Ok(mesh)
}

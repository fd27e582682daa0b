//! Simplex submeshes built only from existing element nodes.
//!
//! 2D: fan from the first loop vertex, falling back to ear clipping when the
//! fan produces inverted triangles. 3D: tetrahedra from an apex vertex to every
//! face triangle that does not contain it, trying vertices in id order until
//! the element is star-shaped from one of them. Faces are fanned from their
//! smallest node id, so neighbouring elements share the surface triangulation
//! whenever the smallest-id apex succeeds. In both cases nodes that
//! the primary construction skips (collinear midside nodes) are inserted
//! afterwards by splitting the simplices that carry them on an edge or face,
//! so that the submesh touches every element node.

use super::{bbox_of, polygon_signed_area, Mesh, Vec3};
use crate::error::{Error, Result};

const DROP_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct Simplex {
    /// Global node ids; positively oriented.
    pub nodes: Vec<usize>,
    pub measure: f64,
}

/// Subdivides element `e` of `mesh` into positively oriented simplices.
pub fn subdivide_element(mesh: &Mesh, e: usize) -> Result<Vec<Simplex>> {
    let el = &mesh.elements[e];
    let pts = mesh.coords(&el.nodes);
    let local = if mesh.dim == 2 {
        subdivide_polygon_local(&pts)
    } else {
        let faces: Vec<Vec<usize>> = el
            .faces
            .iter()
            .map(|f| {
                f.iter()
                    .map(|g| el.nodes.iter().position(|n| n == g).unwrap())
                    .collect()
            })
            .collect();
        subdivide_polyhedron_local(&pts, &faces, &el.nodes)
    }
    .map_err(|err| err.at_element(e))?;
    Ok(local
        .into_iter()
        .map(|(s, m)| Simplex {
            nodes: s.iter().map(|&i| el.nodes[i]).collect(),
            measure: m,
        })
        .collect())
}

pub(crate) fn tri_area(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    0.5 * ((b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x))
}

pub(crate) fn tet_volume(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    (a - p).dot(&(b - p).cross(&(c - p))) / 6.0
}

/// Local-index triangles with their areas.
pub(crate) fn subdivide_polygon_local(pts: &[Vec3]) -> Result<Vec<(Vec<usize>, f64)>> {
    let n = pts.len();
    let area = polygon_signed_area(pts);
    if area <= 0.0 {
        return Err(Error::SubdivisionFailed {
            element: None,
            detail: "non-positive polygon area".into(),
        });
    }
    let mut tris: Vec<[usize; 3]> = Vec::new();
    let mut fan_ok = true;
    for k in 1..n - 1 {
        let a = tri_area(&pts[0], &pts[k], &pts[k + 1]);
        if a < -DROP_TOL * area {
            fan_ok = false;
            break;
        }
        if a > DROP_TOL * area {
            tris.push([0, k, k + 1]);
        }
    }
    if !fan_ok {
        tris = ear_clip(pts, area)?;
    }
    insert_missing_2d(pts, &mut tris, area)?;
    let out: Vec<(Vec<usize>, f64)> = tris
        .iter()
        .map(|t| (t.to_vec(), tri_area(&pts[t[0]], &pts[t[1]], &pts[t[2]])))
        .collect();
    check_sum(&out, area)?;
    Ok(out)
}

fn check_sum(out: &[(Vec<usize>, f64)], measure: f64) -> Result<()> {
    let total: f64 = out.iter().map(|(_, m)| m).sum();
    if (total - measure).abs() > 1e-10 * measure || out.iter().any(|(_, m)| *m <= DROP_TOL * measure) {
        return Err(Error::SubdivisionFailed {
            element: None,
            detail: format!("simplex measures sum to {total:e}, element measure {measure:e}"),
        });
    }
    Ok(())
}

fn point_in_closed_triangle(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3, tol: f64) -> bool {
    let d1 = tri_area(a, b, p);
    let d2 = tri_area(b, c, p);
    let d3 = tri_area(c, a, p);
    d1 >= -tol && d2 >= -tol && d3 >= -tol
}

fn ear_clip(pts: &[Vec3], area: f64) -> Result<Vec<[usize; 3]>> {
    let mut ring: Vec<usize> = (0..pts.len()).collect();
    let mut tris = Vec::new();
    let tol = DROP_TOL * area;
    while ring.len() > 3 {
        let m = ring.len();
        let is_ear = |i: usize| -> Option<f64> {
            let (p, c, q) = (ring[(i + m - 1) % m], ring[i], ring[(i + 1) % m]);
            let a = tri_area(&pts[p], &pts[c], &pts[q]);
            if a < -tol {
                return None;
            }
            let blocked = ring.iter().any(|&o| {
                o != p && o != c && o != q && point_in_closed_triangle(&pts[o], &pts[p], &pts[c], &pts[q], tol)
            });
            if blocked && a > tol {
                None
            } else {
                Some(a)
            }
        };
        let mut chosen = None;
        for i in 0..m {
            if let Some(a) = is_ear(i) {
                if a > tol {
                    chosen = Some((i, true));
                    break;
                }
            }
        }
        if chosen.is_none() {
            // only straight (collinear) vertices left to remove
            for i in 0..m {
                if let Some(a) = is_ear(i) {
                    if a.abs() <= tol {
                        let (p, c, q) = (ring[(i + m - 1) % m], ring[i], ring[(i + 1) % m]);
                        let between = (pts[c] - pts[p]).dot(&(pts[q] - pts[c])) > 0.0;
                        if between {
                            chosen = Some((i, false));
                            break;
                        }
                    }
                }
            }
        }
        let Some((i, keep)) = chosen else {
            return Err(Error::SubdivisionFailed {
                element: None,
                detail: "ear clipping found no ear".into(),
            });
        };
        let (p, c, q) = (ring[(i + m - 1) % m], ring[i], ring[(i + 1) % m]);
        if keep {
            tris.push([p, c, q]);
        }
        ring.remove(i);
    }
    let (p, c, q) = (ring[0], ring[1], ring[2]);
    if tri_area(&pts[p], &pts[c], &pts[q]) > tol {
        tris.push([p, c, q]);
    }
    Ok(tris)
}

/// Parameter of `p` on segment `a`-`b` when `p` lies strictly inside it.
fn on_segment(p: &Vec3, a: &Vec3, b: &Vec3, tol: f64) -> bool {
    let ab = b - a;
    let l2 = ab.norm_squared();
    if l2 == 0.0 {
        return false;
    }
    let s = (p - a).dot(&ab) / l2;
    if s <= 1e-9 || s >= 1.0 - 1e-9 {
        return false;
    }
    (a + s * ab - p).norm() <= tol
}

fn insert_missing_2d(pts: &[Vec3], tris: &mut Vec<[usize; 3]>, area: f64) -> Result<()> {
    let (lo, hi) = bbox_of(pts.iter());
    let tol = 1e-9 * (hi - lo).norm();
    for w in 0..pts.len() {
        if tris.iter().any(|t| t.contains(&w)) {
            continue;
        }
        let mut edge = None;
        'search: for t in tris.iter() {
            for k in 0..3 {
                let (a, b) = (t[k], t[(k + 1) % 3]);
                if on_segment(&pts[w], &pts[a], &pts[b], tol) {
                    edge = Some((a, b));
                    break 'search;
                }
            }
        }
        let Some((a, b)) = edge else {
            return Err(Error::SubdivisionFailed {
                element: None,
                detail: format!("node {w} is not covered by the submesh"),
            });
        };
        let mut next = Vec::with_capacity(tris.len() + 2);
        for t in tris.iter() {
            if t.contains(&a) && t.contains(&b) {
                next.push(t.map(|v| if v == a { w } else { v }));
                next.push(t.map(|v| if v == b { w } else { v }));
            } else {
                next.push(*t);
            }
        }
        *tris = next;
    }
    tris.retain(|t| tri_area(&pts[t[0]], &pts[t[1]], &pts[t[2]]) > DROP_TOL * area);
    Ok(())
}

pub(crate) fn subdivide_polyhedron_local(
    pts: &[Vec3],
    faces: &[Vec<usize>],
    global_ids: &[usize],
) -> Result<Vec<(Vec<usize>, f64)>> {
    let mut face_tris: Vec<[usize; 3]> = Vec::new();
    for f in faces {
        let start = (0..f.len()).min_by_key(|&i| global_ids[f[i]]).unwrap_or(0);
        let f: Vec<usize> = f[start..].iter().chain(&f[..start]).copied().collect();
        for k in 1..f.len() - 1 {
            face_tris.push([f[0], f[k], f[k + 1]]);
        }
    }
    let o = pts[0];
    let volume: f64 = face_tris
        .iter()
        .map(|t| tet_volume(&o, &pts[t[0]], &pts[t[1]], &pts[t[2]]))
        .sum();
    if volume <= 0.0 {
        return Err(Error::SubdivisionFailed {
            element: None,
            detail: "non-positive element volume".into(),
        });
    }
    let mut candidates: Vec<usize> = (0..pts.len()).collect();
    candidates.sort_by_key(|&i| global_ids[i]);
    let mut last_err = String::new();
    for apex in candidates {
        let mut tets: Vec<[usize; 4]> = Vec::new();
        let mut ok = true;
        for t in &face_tris {
            if t.contains(&apex) {
                continue;
            }
            let v = tet_volume(&pts[apex], &pts[t[0]], &pts[t[1]], &pts[t[2]]);
            if v < -DROP_TOL * volume {
                ok = false;
                last_err = format!("apex {} sees an inverted face triangle", global_ids[apex]);
                break;
            }
            if v > DROP_TOL * volume {
                tets.push([apex, t[0], t[1], t[2]]);
            }
        }
        if !ok {
            continue;
        }
        let total: f64 = tets
            .iter()
            .map(|t| tet_volume(&pts[t[0]], &pts[t[1]], &pts[t[2]], &pts[t[3]]))
            .sum();
        if (total - volume).abs() > 1e-10 * volume {
            last_err = format!("apex {} tetrahedra do not fill the element", global_ids[apex]);
            continue;
        }
        match insert_missing_3d(pts, &mut tets, volume) {
            Ok(()) => {
                let out: Vec<(Vec<usize>, f64)> = tets
                    .iter()
                    .map(|t| {
                        (
                            t.to_vec(),
                            tet_volume(&pts[t[0]], &pts[t[1]], &pts[t[2]], &pts[t[3]]),
                        )
                    })
                    .collect();
                check_sum(&out, volume)?;
                return Ok(out);
            }
            Err(e) => last_err = e.to_string(),
        }
    }
    Err(Error::SubdivisionFailed {
        element: None,
        detail: format!("element is not star-shaped from any vertex ({last_err})"),
    })
}

fn in_triangle_3d(p: &Vec3, a: &Vec3, b: &Vec3, c: &Vec3, tol: f64) -> bool {
    let n = (b - a).cross(&(c - a));
    let nn = n.norm();
    if nn == 0.0 {
        return false;
    }
    if ((p - a).dot(&n) / nn).abs() > tol {
        return false;
    }
    let s1 = (b - a).cross(&(p - a)).dot(&n);
    let s2 = (c - b).cross(&(p - b)).dot(&n);
    let s3 = (a - c).cross(&(p - c)).dot(&n);
    let eps = 1e-9 * nn * nn;
    s1 > eps && s2 > eps && s3 > eps
}

fn insert_missing_3d(pts: &[Vec3], tets: &mut Vec<[usize; 4]>, volume: f64) -> Result<()> {
    let (lo, hi) = bbox_of(pts.iter());
    let tol = 1e-9 * (hi - lo).norm();
    const EDGES: [(usize, usize); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];
    const FACES: [[usize; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
    for w in 0..pts.len() {
        if tets.iter().any(|t| t.contains(&w)) {
            continue;
        }
        let mut edge = None;
        'edges: for t in tets.iter() {
            for (i, j) in EDGES {
                if on_segment(&pts[w], &pts[t[i]], &pts[t[j]], tol) {
                    edge = Some((t[i], t[j]));
                    break 'edges;
                }
            }
        }
        let mut next = Vec::with_capacity(tets.len() + 4);
        if let Some((a, b)) = edge {
            for t in tets.iter() {
                if t.contains(&a) && t.contains(&b) {
                    next.push(t.map(|v| if v == a { w } else { v }));
                    next.push(t.map(|v| if v == b { w } else { v }));
                } else {
                    next.push(*t);
                }
            }
        } else {
            let mut face = None;
            'faces: for t in tets.iter() {
                for f in FACES {
                    let (a, b, c) = (t[f[0]], t[f[1]], t[f[2]]);
                    if in_triangle_3d(&pts[w], &pts[a], &pts[b], &pts[c], tol) {
                        face = Some([a, b, c]);
                        break 'faces;
                    }
                }
            }
            let Some(face) = face else {
                return Err(Error::SubdivisionFailed {
                    element: None,
                    detail: format!("local node {w} is not covered by the submesh"),
                });
            };
            for t in tets.iter() {
                if face.iter().all(|v| t.contains(v)) {
                    for &v in &face {
                        next.push(t.map(|x| if x == v { w } else { x }));
                    }
                } else {
                    next.push(*t);
                }
            }
        }
        *tets = next;
    }
    tets.retain(|t| tet_volume(&pts[t[0]], &pts[t[1]], &pts[t[2]], &pts[t[3]]) > DROP_TOL * volume);
    Ok(())
}

//! Geometric kernels on the initial configuration.

use std::collections::HashMap;

use super::{bbox_of, Node, PolytopalElement, Vec3};
use crate::error::{Error, Result};

/// Shoelace signed area of a loop in the xy-plane.
pub fn polygon_signed_area(pts: &[Vec3]) -> f64 {
    let n = pts.len();
    if n < 3 {
        return 0.0;
    }
    let o = pts[0];
    let mut a = 0.0;
    for i in 0..n {
        let p = pts[(i + n - 1) % n] - o;
        let q = pts[i] - o;
        a += p.x * q.y - q.x * p.y;
    }
    0.5 * a
}

pub fn polygon_area_centroid(pts: &[Vec3]) -> Result<(f64, Vec3)> {
    if pts.len() < 3 {
        return Err(Error::DegenerateElement {
            element: None,
            measure: 0.0,
        });
    }
    let (lo, hi) = bbox_of(pts.iter());
    let scale = (hi - lo).norm_squared();
    let n = pts.len();
    let o = pts[0];
    let (mut a, mut cx, mut cy) = (0.0, 0.0, 0.0);
    for i in 0..n {
        let p = pts[(i + n - 1) % n] - o;
        let q = pts[i] - o;
        let cross = p.x * q.y - q.x * p.y;
        a += cross;
        cx += cross * (p.x + q.x);
        cy += cross * (p.y + q.y);
    }
    a *= 0.5;
    if a.abs() < 1e-14 * scale {
        return Err(Error::DegenerateElement {
            element: None,
            measure: a,
        });
    }
    if a < 0.0 {
        return Err(Error::OrientationError {
            element: None,
            signed_area: a,
        });
    }
    let c = Vec3::new(o.x + cx / (6.0 * a), o.y + cy / (6.0 * a), 0.0);
    Ok((a, c))
}

fn orient(a: &Vec3, b: &Vec3, c: &Vec3) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

fn segments_touch(p1: &Vec3, p2: &Vec3, q1: &Vec3, q2: &Vec3, tol: f64) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > tol && d2 < -tol) || (d1 < -tol && d2 > tol))
        && ((d3 > tol && d4 < -tol) || (d3 < -tol && d4 > tol))
    {
        return true;
    }
    let on = |a: &Vec3, b: &Vec3, p: &Vec3, d: f64| {
        d.abs() <= tol
            && p.x >= a.x.min(b.x) - 1e-12
            && p.x <= a.x.max(b.x) + 1e-12
            && p.y >= a.y.min(b.y) - 1e-12
            && p.y <= a.y.max(b.y) + 1e-12
    };
    on(q1, q2, p1, d1) || on(q1, q2, p2, d2) || on(p1, p2, q1, d3) || on(p1, p2, q2, d4)
}

/// True when no two non-adjacent edges of the loop intersect or touch.
pub(crate) fn polygon_is_simple(pts: &[Vec3]) -> bool {
    let n = pts.len();
    if n < 4 {
        return true;
    }
    let (lo, hi) = bbox_of(pts.iter());
    let tol = 1e-13 * (hi - lo).norm_squared();
    for i in 0..n {
        let (a, b) = (&pts[i], &pts[(i + 1) % n]);
        for j in i + 1..n {
            if j == i + 1 || (i == 0 && j == n - 1) {
                continue;
            }
            let (c, d) = (&pts[j], &pts[(j + 1) % n]);
            if segments_touch(a, b, c, d, tol) {
                return false;
            }
        }
    }
    true
}

/// Newell vector area of a (possibly non-planar) loop: half the sum of edge cross products.
pub fn newell_vector_area(pts: &[Vec3]) -> Vec3 {
    let n = pts.len();
    let o = pts[0];
    let mut s = Vec3::zeros();
    for i in 0..n {
        s += (pts[i] - o).cross(&(pts[(i + 1) % n] - o));
    }
    0.5 * s
}

/// Each directed edge of the face loops must appear once, and its reverse exactly once.
pub fn check_closed_surface(faces: &[Vec<usize>]) -> Result<()> {
    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    for f in faces {
        let n = f.len();
        for i in 0..n {
            *directed.entry((f[i], f[(i + 1) % n])).or_insert(0) += 1;
        }
    }
    let mut keys: Vec<_> = directed.keys().copied().collect();
    keys.sort_unstable();
    for (a, b) in keys {
        let c = directed[&(a, b)];
        if c != 1 {
            return Err(Error::NonClosedSurface {
                element: None,
                detail: format!("edge ({a},{b}) is traversed {c} times in the same direction"),
            });
        }
        if directed.get(&(b, a)) != Some(&1) {
            return Err(Error::NonClosedSurface {
                element: None,
                detail: format!("edge ({a},{b}) has no oppositely oriented partner face"),
            });
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq)]
pub struct SurfaceTriangle {
    /// Global node ids `(v0, v_k, v_{k+1})`.
    pub nodes: [usize; 3],
    pub coords: [Vec3; 3],
    pub face: usize,
    /// Zero-area triangle, e.g. from collinear corner/midside/corner nodes.
    pub degenerate: bool,
}

impl SurfaceTriangle {
    /// Vector area: half the cross product of the edge vectors, pointing along the outward normal.
    pub fn vector_area(&self) -> Vec3 {
        let [a, b, c] = &self.coords;
        0.5 * (b - a).cross(&(c - a))
    }

    pub fn area(&self) -> f64 {
        self.vector_area().norm()
    }
}

/// Fan triangulation of every face from its first node.
/// Cyclic rotation of a face loop that starts at its smallest id.
pub(crate) fn rotate_to_min(f: &[usize]) -> Vec<usize> {
    let k = (0..f.len()).min_by_key(|&i| f[i]).unwrap_or(0);
    f[k..].iter().chain(&f[..k]).copied().collect()
}

pub fn triangulate_faces(el: &PolytopalElement, nodes: &[Node]) -> Result<Vec<SurfaceTriangle>> {
    if el.faces.is_empty() {
        return Err(Error::Validation(
            "face triangulation requires a polyhedral element".into(),
        ));
    }
    let mut tris = Vec::new();
    for (fi, f) in el.faces.iter().enumerate() {
        if f.len() < 3 {
            return Err(Error::FaceTooSmall { nodes: f.len() });
        }
        // fan from the smallest node id, so both elements sharing a face see the same triangles
        let f = rotate_to_min(f);
        let pts: Vec<Vec3> = f.iter().map(|&i| nodes[i].x).collect();
        let (lo, hi) = bbox_of(pts.iter());
        let scale = (hi - lo).norm_squared();
        for k in 1..f.len() - 1 {
            let coords = [pts[0], pts[k], pts[k + 1]];
            let area2 = (coords[1] - coords[0]).cross(&(coords[2] - coords[0])).norm();
            tris.push(SurfaceTriangle {
                nodes: [f[0], f[k], f[k + 1]],
                coords,
                face: fi,
                degenerate: area2 <= 1e-12 * scale,
            });
        }
    }
    Ok(tris)
}

/// Unit normal and area Jacobian of the linear triangle map with ansatz `{xi, eta, 1 - xi - eta}`.
///
/// The map is affine, so both results are independent of `(xi, eta)`.
pub fn face_geometry(tri: &SurfaceTriangle, _xi: f64, _eta: f64) -> Result<(Vec3, f64)> {
    let [x1, x2, x3] = &tri.coords;
    let g_xi = x1 - x3;
    let g_eta = x2 - x3;
    let g_zeta = g_xi.cross(&g_eta);
    let n_zeta = g_zeta.norm();
    let scale = g_xi.norm_squared().max(g_eta.norm_squared()).max((x1 - x2).norm_squared());
    if n_zeta <= 1e-12 * scale || n_zeta == 0.0 {
        return Err(Error::DegenerateTriangle { jacobian: n_zeta });
    }
    Ok((g_zeta / n_zeta, n_zeta))
}

/// Volume and centroid from the divergence theorem over the fan-triangulated faces.
pub fn polyhedron_volume_centroid(el: &PolytopalElement, nodes: &[Node]) -> Result<(f64, Vec3)> {
    check_closed_surface(&el.faces)?;
    let tris = triangulate_faces(el, nodes)?;
    let o = nodes[el.nodes[0]].x;
    let (lo, hi) = bbox_of(el.nodes.iter().map(|&i| &nodes[i].x));
    let scale = (hi - lo).norm().powi(3);
    let mut vol = 0.0;
    let mut first = Vec3::zeros();
    for t in &tris {
        let a = t.coords[0] - o;
        let b = t.coords[1] - o;
        let c = t.coords[2] - o;
        let v = a.dot(&b.cross(&c)) / 6.0;
        vol += v;
        first += v * (a + b + c) / 4.0;
    }
    if vol.abs() < 1e-14 * scale {
        return Err(Error::DegenerateElement {
            element: None,
            measure: vol,
        });
    }
    if vol < 0.0 {
        return Err(Error::OrientationError {
            element: None,
            signed_area: vol,
        });
    }
    Ok((vol, o + first / vol))
}

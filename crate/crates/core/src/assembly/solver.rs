//! Skyline (profile) LDL^T factorization with reverse Cuthill-McKee ordering.

use std::collections::VecDeque;

use super::sparse::CsrMatrix;
use crate::error::{Error, Result};

/// Pivots below this fraction of the original diagonal count as numerically zero.
const PIVOT_TOL: f64 = 1e-10;

/// Reverse Cuthill-McKee permutation (`perm[new] = old`) of a symmetric pattern.
pub fn reverse_cuthill_mckee(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n;
    let degree: Vec<usize> = (0..n).map(|i| a.row_ptr[i + 1] - a.row_ptr[i]).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let bfs_levels = |start: usize, seen: &mut Vec<bool>| -> Vec<usize> {
        let mut level = vec![usize::MAX; n];
        let mut q = VecDeque::new();
        let mut reached = Vec::new();
        level[start] = 0;
        q.push_back(start);
        while let Some(v) = q.pop_front() {
            reached.push(v);
            for &w in &a.cols[a.row_ptr[v]..a.row_ptr[v + 1]] {
                if level[w] == usize::MAX && !seen[w] {
                    level[w] = level[v] + 1;
                    q.push_back(w);
                }
            }
        }
        // farthest level, lowest degree
        let far = reached.iter().map(|&v| level[v]).max().unwrap_or(0);
        reached
            .into_iter()
            .filter(|&v| level[v] == far)
            .min_by_key(|&v| (degree[v], v))
            .into_iter()
            .collect()
    };
    while order.len() < n {
        let seed = (0..n)
            .filter(|&v| !visited[v])
            .min_by_key(|&v| (degree[v], v))
            .expect("unvisited vertex");
        // a few sweeps towards a pseudo-peripheral start vertex
        let mut start = seed;
        for _ in 0..3 {
            match bfs_levels(start, &mut visited).first() {
                Some(&s) if s != start => start = s,
                _ => break,
            }
        }
        let mut q = VecDeque::new();
        visited[start] = true;
        q.push_back(start);
        while let Some(v) = q.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = a.cols[a.row_ptr[v]..a.row_ptr[v + 1]]
                .iter()
                .copied()
                .filter(|&w| !visited[w])
                .collect();
            next.sort_by_key(|&w| (degree[w], w));
            for w in next {
                visited[w] = true;
                q.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

/// Profile structure of the permuted lower triangle; reusable across factorizations
/// of matrices sharing a pattern.
#[derive(Clone, Debug)]
pub struct SkylineSolver {
    n: usize,
    perm: Vec<usize>,
    iperm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
}

/// Factors `L D L^T`; `pinned` equations had zero pivots and are solved as `x_i = 0`.
#[derive(Clone, Debug)]
pub struct Factorization<'a> {
    solver: &'a SkylineSolver,
    values: Vec<f64>,
    diag: Vec<f64>,
    pinned: Vec<bool>,
}

impl SkylineSolver {
    pub fn new(a: &CsrMatrix) -> Self {
        let n = a.n;
        let perm = reverse_cuthill_mckee(a);
        let mut iperm = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            iperm[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for old in 0..n {
            let i = iperm[old];
            for &c in &a.cols[a.row_ptr[old]..a.row_ptr[old + 1]] {
                let j = iperm[c];
                if j < i {
                    first[i] = first[i].min(j);
                }
            }
        }
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for i in 0..n {
            start.push(start[i] + (i - first[i] + 1));
        }
        Self {
            n,
            perm,
            iperm,
            first,
            start,
        }
    }

    pub fn profile_size(&self) -> usize {
        self.start[self.n]
    }

    fn idx(&self, i: usize, j: usize) -> usize {
        self.start[i] + (j - self.first[i])
    }

    /// Factors `a`. With `pin_singular`, zero pivots are pinned instead of reported.
    pub fn factor(&self, a: &CsrMatrix, pin_singular: bool) -> Result<Factorization<'_>> {
        let n = self.n;
        let mut v = vec![0.0; self.profile_size()];
        let mut orig_diag = vec![0.0; n];
        for old in 0..n {
            let i = self.iperm[old];
            for (c, val) in a.row(old) {
                let j = self.iperm[c];
                if j <= i {
                    v[self.idx(i, j)] += val;
                }
                if j == i {
                    orig_diag[i] = val;
                }
            }
        }
        let scale = orig_diag.iter().fold(0.0f64, |m, d| m.max(d.abs()));
        let mut diag = vec![0.0; n];
        let mut pinned = vec![false; n];
        let mut near_null = 0usize;
        let mut first_bad = None;
        for i in 0..n {
            let fi = self.first[i];
            // g_ij = L_ij D_j for j < i
            for j in fi..i {
                let fj = self.first[j];
                let k0 = fi.max(fj);
                let mut s = v[self.idx(i, j)];
                let ri = self.idx(i, k0);
                let rj = self.idx(j, k0);
                for k in 0..(j - k0) {
                    s -= v[ri + k] * v[rj + k];
                }
                v[self.idx(i, j)] = s;
            }
            let mut d = v[self.idx(i, i)];
            for j in fi..i {
                let g = v[self.idx(i, j)];
                let l = if pinned[j] { 0.0 } else { g / diag[j] };
                d -= g * l;
                v[self.idx(i, j)] = l;
            }
            let reference = orig_diag[i].abs().max(1e-300 * scale);
            if !d.is_finite() || d.abs() <= PIVOT_TOL * reference || (scale > 0.0 && d.abs() <= 1e-14 * scale) {
                near_null += 1;
                first_bad.get_or_insert(self.perm[i]);
                pinned[i] = true;
                diag[i] = 1.0;
            } else {
                diag[i] = d;
            }
        }
        if near_null > 0 && !pin_singular {
            return Err(Error::SingularSystem {
                near_null,
                first_equation: first_bad.unwrap_or(0),
            });
        }
        Ok(Factorization {
            solver: self,
            values: v,
            diag,
            pinned,
        })
    }

    /// Direct solve with one step of iterative refinement.
    pub fn solve(&self, a: &CsrMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
        let f = self.factor(a, false)?;
        Ok(f.solve_refined(a, rhs))
    }
}

impl Factorization<'_> {
    /// Original equation indices of pinned pivots.
    pub fn pinned(&self) -> Vec<usize> {
        (0..self.solver.n)
            .filter(|&i| self.pinned[i])
            .map(|i| self.solver.perm[i])
            .collect()
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let s = self.solver;
        let n = s.n;
        let mut y: Vec<f64> = (0..n).map(|i| rhs[s.perm[i]]).collect();
        for i in 0..n {
            let fi = s.first[i];
            let base = s.idx(i, fi);
            let mut acc = y[i];
            for (k, j) in (fi..i).enumerate() {
                acc -= self.values[base + k] * y[j];
            }
            y[i] = acc;
        }
        for i in 0..n {
            y[i] = if self.pinned[i] { 0.0 } else { y[i] / self.diag[i] };
        }
        for i in (0..n).rev() {
            let fi = s.first[i];
            let base = s.idx(i, fi);
            let xi = y[i];
            for (k, j) in (fi..i).enumerate() {
                y[j] -= self.values[base + k] * xi;
            }
        }
        let mut x = vec![0.0; n];
        for i in 0..n {
            x[s.perm[i]] = y[i];
        }
        x
    }

    pub fn solve_refined(&self, a: &CsrMatrix, rhs: &[f64]) -> Vec<f64> {
        let mut x = self.solve(rhs);
        let ax = a.mul_vec(&x);
        let r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, v)| b - v).collect();
        let dx = self.solve(&r);
        for (xi, d) in x.iter_mut().zip(dx) {
            *xi += d;
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn residual(a: &CsrMatrix, x: &[f64], b: &[f64]) -> f64 {
        let ax = a.mul_vec(x);
        let r: f64 = ax.iter().zip(b).map(|(p, q)| (p - q).powi(2)).sum::<f64>().sqrt();
        r / b.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    #[test]
    fn identity_system() {
        let a = CsrMatrix::identity(5);
        let b = vec![1.0, -2.0, 3.0, 0.5, 7.0];
        let x = SkylineSolver::new(&a).solve(&a, &b).unwrap();
        assert_eq!(x, b);
    }

    #[test]
    fn two_by_two_hand_solve() {
        let a = CsrMatrix::from_dense(&[vec![4.0, 1.0], vec![1.0, 3.0]]);
        let x = SkylineSolver::new(&a).solve(&a, &[1.0, 2.0]).unwrap();
        // inverse is [3 -1; -1 4] / 11
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-15);
        assert!((x[1] - 7.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn singular_system_reports_null_count() {
        // free-free 1D chain: one rigid translation
        let n = 6;
        let mut d = vec![vec![0.0; n]; n];
        for e in 0..n - 1 {
            d[e][e] += 1.0;
            d[e + 1][e + 1] += 1.0;
            d[e][e + 1] -= 1.0;
            d[e + 1][e] -= 1.0;
        }
        let a = CsrMatrix::from_dense(&d);
        let s = SkylineSolver::new(&a);
        match s.solve(&a, &vec![0.0; n]) {
            Err(Error::SingularSystem { near_null, .. }) => assert_eq!(near_null, 1),
            other => panic!("expected singular, got {other:?}"),
        }
        // pinned solve of a consistent rhs
        let b: Vec<f64> = (0..n).map(|i| if i == 0 { 1.0 } else if i == n - 1 { -1.0 } else { 0.0 }).collect();
        let f = s.factor(&a, true).unwrap();
        assert_eq!(f.pinned().len(), 1);
        let x = f.solve_refined(&a, &b);
        assert!(residual(&a, &x, &b) < 1e-12);
    }

    #[test]
    fn rcm_is_a_permutation_and_reduces_profile() {
        // 2D grid Laplacian numbered badly (column-major with a shuffle)
        let (nx, ny) = (12, 5);
        let id = |i: usize, j: usize| ((i * 7 + j * 13) % (nx * ny), (i, j));
        let mut order: Vec<(usize, (usize, usize))> = (0..nx).flat_map(|i| (0..ny).map(move |j| id(i, j))).collect();
        order.sort();
        let mut number = std::collections::HashMap::new();
        for (k, (_, ij)) in order.iter().enumerate() {
            number.insert(*ij, k);
        }
        let mut groups = Vec::new();
        for i in 0..nx - 1 {
            for j in 0..ny {
                groups.push(vec![number[&(i, j)], number[&(i + 1, j)]]);
            }
        }
        for i in 0..nx {
            for j in 0..ny - 1 {
                groups.push(vec![number[&(i, j)], number[&(i, j + 1)]]);
            }
        }
        let a = CsrMatrix::from_groups(nx * ny, groups.iter().map(|g| g.as_slice()));
        let mut p = reverse_cuthill_mckee(&a);
        let rcm_profile = SkylineSolver::new(&a).profile_size();
        p.sort_unstable();
        assert_eq!(p, (0..nx * ny).collect::<Vec<_>>());
        let natural: usize = (0..a.n).map(|i| i - a.cols[a.row_ptr[i]].min(i) + 1).sum();
        assert!(rcm_profile <= natural);
    }

    proptest! {
        #[test]
        fn random_spd_residual(seed in 0u64..500, n in 1usize..30) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut d = vec![vec![0.0; n]; n];
            for i in 0..n {
                d[i][i] = 1.0;
                for j in 0..i {
                    if rng.random_bool(0.3) {
                        let v: f64 = rng.random_range(-1.0..1.0);
                        d[i][j] = v;
                        d[j][i] = v;
                        d[i][i] += v.abs();
                        d[j][j] += v.abs();
                    }
                }
            }
            let a = CsrMatrix::from_dense(&d);
            let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
            let x = SkylineSolver::new(&a).solve(&a, &b).unwrap();
            prop_assert!(residual(&a, &x, &b) <= 1e-10);
        }
    }
}

//! Reverse Cuthill–McKee ordering and a skyline (envelope) LDLᵀ factorization
//! for complex symmetric matrices whose real part is positive definite.

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::collections::VecDeque;

/// RCM permutation: `order[new] = old`.
pub fn reverse_cuthill_mckee(adj: &[Vec<usize>]) -> Vec<usize> {
    let n = adj.len();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let degree = |v: usize| adj[v].len();
    while order.len() < n {
        let seed = (0..n).filter(|&v| !visited[v]).min_by_key(|&v| (degree(v), v)).unwrap();
        let start = pseudo_peripheral(adj, seed);
        let mut queue = VecDeque::from([start]);
        visited[start] = true;
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<usize> = adj[v].iter().copied().filter(|&w| !visited[w]).collect();
            next.sort_by_key(|&w| (degree(w), w));
            for w in next {
                visited[w] = true;
                queue.push_back(w);
            }
        }
    }
    order.reverse();
    order
}

fn bfs_levels(adj: &[Vec<usize>], start: usize) -> Vec<usize> {
    let mut level = vec![usize::MAX; adj.len()];
    level[start] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if level[w] == usize::MAX {
                level[w] = level[v] + 1;
                queue.push_back(w);
            }
        }
    }
    level
}

fn pseudo_peripheral(adj: &[Vec<usize>], mut v: usize) -> usize {
    let mut ecc = 0;
    for _ in 0..8 {
        let level = bfs_levels(adj, v);
        let far = level.iter().copied().filter(|&l| l != usize::MAX).max().unwrap_or(0);
        if far <= ecc {
            break;
        }
        ecc = far;
        v = (0..adj.len()).filter(|&w| level[w] == far).min_by_key(|&w| (adj[w].len(), w)).unwrap();
    }
    v
}

/// Lower envelope storage: row `i` holds columns `first[i]..=i`.
#[derive(Debug, Clone)]
pub struct SkylinePattern {
    pub first: Vec<usize>,
    pub start: Vec<usize>,
    pub nnz: usize,
}

impl SkylinePattern {
    /// Builds the envelope from an adjacency list already in the target ordering.
    pub fn from_adjacency(adj: &[Vec<usize>]) -> Self {
        let n = adj.len();
        let first: Vec<usize> = (0..n).map(|i| adj[i].iter().copied().filter(|&j| j < i).min().unwrap_or(i)).collect();
        let mut start = Vec::with_capacity(n);
        let mut nnz = 0;
        for i in 0..n {
            start.push(nnz);
            nnz += i - first[i] + 1;
        }
        Self { first, start, nnz }
    }

    pub fn n(&self) -> usize {
        self.first.len()
    }

    /// Storage offset of entry `(i, j)`, `j ≤ i`.
    #[inline]
    pub fn position(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && j >= self.first[i]);
        self.start[i] + j - self.first[i]
    }
}

/// `A = L D Lᵀ` with unit lower `L`, stored in the envelope.
#[derive(Debug, Clone)]
pub struct SkylineLdlt {
    pattern: SkylinePattern,
    values: Vec<Complex64>,
}

impl SkylineLdlt {
    /// Factors the matrix whose lower envelope is `values`.
    pub fn factor(pattern: SkylinePattern, mut values: Vec<Complex64>) -> Result<Self> {
        let n = pattern.n();
        let mut u = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            let fi = pattern.first[i];
            let si = pattern.start[i];
            for j in fi..i {
                let fj = pattern.first[j];
                let sj = pattern.start[j];
                let lo = fi.max(fj);
                let mut acc = values[si + j - fi];
                for k in lo..j {
                    acc -= u[k] * values[sj + k - fj];
                }
                u[j] = acc;
            }
            let mut diag = values[si + i - fi];
            for j in fi..i {
                let dj = values[pattern.start[j] + j - pattern.first[j]];
                let l = u[j] / dj;
                diag -= u[j] * l;
                values[si + j - fi] = l;
            }
            if diag.norm() < 1e-300 || !diag.is_finite() {
                return Err(Error::Singular(format!("zero pivot at row {i}")));
            }
            values[si + i - fi] = diag;
        }
        Ok(Self { pattern, values })
    }

    pub fn solve_in_place(&self, x: &mut [Complex64]) {
        let p = &self.pattern;
        let n = p.n();
        for i in 0..n {
            let (fi, si) = (p.first[i], p.start[i]);
            let mut acc = x[i];
            for j in fi..i {
                acc -= self.values[si + j - fi] * x[j];
            }
            x[i] = acc;
        }
        for i in 0..n {
            x[i] /= self.values[p.start[i] + i - p.first[i]];
        }
        for i in (0..n).rev() {
            let (fi, si) = (p.first[i], p.start[i]);
            let xi = x[i];
            for j in fi..i {
                x[j] -= self.values[si + j - fi] * xi;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    proptest! {
        #[test]
        fn solves_banded_complex_symmetric(n in 2usize..40, bw in 1usize..6, seed in 0u64..500) {
            // diagonally dominant real part, arbitrary imaginary part
            let mut dense = vec![c(0.0, 0.0); n * n];
            let mut adj = vec![Vec::new(); n];
            for i in 0..n {
                for j in i.saturating_sub(bw)..i {
                    let v = c(((i * 7 + j * 3 + seed as usize) % 5) as f64 / 10.0 - 0.2,
                              ((i + j * 11 + seed as usize) % 7) as f64 / 7.0);
                    dense[i * n + j] = v;
                    dense[j * n + i] = v;
                    adj[i].push(j);
                    adj[j].push(i);
                }
                dense[i * n + i] = c(2.0 + bw as f64, 0.3 * (i % 3) as f64);
            }
            let pat = SkylinePattern::from_adjacency(&adj);
            let mut vals = vec![c(0.0, 0.0); pat.nnz];
            for i in 0..n {
                for j in pat.first[i]..=i {
                    vals[pat.position(i, j)] = dense[i * n + j];
                }
            }
            let f = SkylineLdlt::factor(pat, vals).unwrap();
            let xtrue: Vec<_> = (0..n).map(|i| c(i as f64, 1.0)).collect();
            let mut b: Vec<_> = (0..n).map(|i| (0..n).map(|j| dense[i * n + j] * xtrue[j]).sum()).collect();
            f.solve_in_place(&mut b);
            for (x, t) in b.iter().zip(&xtrue) {
                prop_assert!((x - t).norm() < 1e-9 * (1.0 + t.norm()));
            }
        }
    }

    #[test]
    fn rcm_reduces_bandwidth_of_scrambled_path() {
        let n = 50;
        let perm: Vec<usize> = (0..n).map(|i| (i * 17) % n).collect();
        let mut adj = vec![Vec::new(); n];
        for i in 0..n - 1 {
            adj[perm[i]].push(perm[i + 1]);
            adj[perm[i + 1]].push(perm[i]);
        }
        let order = reverse_cuthill_mckee(&adj);
        let mut pos = vec![0; n];
        for (new, &old) in order.iter().enumerate() {
            pos[old] = new;
        }
        let bw = (0..n)
            .flat_map(|v| adj[v].iter().map(move |&w| (v, w)))
            .map(|(v, w)| pos[v].abs_diff(pos[w]))
            .max()
            .unwrap();
        assert_eq!(bw, 1);
    }
}

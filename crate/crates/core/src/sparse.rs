//! Sparse symmetric storage, reverse Cuthill-McKee ordering and an
//! envelope (skyline) Cholesky factorization.
//!
//! Frame stiffness matrices after member subdivision are long chains of
//! 6x6 blocks joined at a few hundred junctions. Under RCM their envelope
//! stays narrow, so a row-oriented envelope factorization beats general
//! fill-reducing supernodal schemes at this scale and keeps the solver
//! dependency-free.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// Compressed sparse rows holding both triangles of a symmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds from `(row, col, value)` triplets, summing duplicates.
    /// Entries are taken as given; symmetry is the caller's contract.
    pub fn from_triplets(n: usize, mut triplets: Vec<(usize, usize, f64)>) -> Self {
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values: Vec<f64> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            debug_assert!(r < n && c < n);
            if last == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n {
            row_ptr[i + 1] += row_ptr[i];
        }
        Self {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_triplets(n, (0..n).map(|i| (i, i, 1.0)).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.n);
        (0..self.n).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// `self + alpha * other`
    pub fn add_scaled(&self, other: &CsrMatrix, alpha: f64) -> CsrMatrix {
        assert_eq!(self.n, other.n);
        let mut t = Vec::with_capacity(self.nnz() + other.nnz());
        for i in 0..self.n {
            t.extend(self.row(i).map(|(j, v)| (i, j, v)));
            t.extend(other.row(i).map(|(j, v)| (i, j, alpha * v)));
        }
        CsrMatrix::from_triplets(self.n, t)
    }

    /// Principal submatrix on `keep` (old indices, in new order).
    pub fn principal(&self, keep: &[usize]) -> CsrMatrix {
        let mut new_of = vec![usize::MAX; self.n];
        for (k, &old) in keep.iter().enumerate() {
            new_of[old] = k;
        }
        let mut t = Vec::new();
        for (k, &old) in keep.iter().enumerate() {
            for (j, v) in self.row(old) {
                if new_of[j] != usize::MAX {
                    t.push((k, new_of[j], v));
                }
            }
        }
        CsrMatrix::from_triplets(keep.len(), t)
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, v| a.max(v.abs()))
    }

    /// Largest relative asymmetry `|a_ij - a_ji| / max|a|`.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs() / scale);
            }
        }
        worst
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut d = nalgebra::DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                d[(i, j)] = v;
            }
        }
        d
    }
}

/// Reverse Cuthill-McKee ordering; `perm[new] = old`. Each connected
/// component starts from a pseudo-peripheral node.
pub fn rcm_ordering(a: &CsrMatrix) -> Vec<usize> {
    let n = a.n();
    let degree: Vec<usize> = (0..n).map(|i| a.row(i).filter(|&(j, _)| j != i).count()).collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut by_degree: Vec<usize> = (0..n).collect();
    by_degree.sort_by_key(|&i| (degree[i], i));

    for &seed in &by_degree {
        if visited[seed] {
            continue;
        }
        let start = pseudo_peripheral(a, seed, &degree);
        visited[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut nbrs: Vec<usize> = a.row(v).map(|(j, _)| j).filter(|&j| j != v && !visited[j]).collect();
            nbrs.sort_by_key(|&j| (degree[j], j));
            for j in nbrs {
                visited[j] = true;
                queue.push_back(j);
            }
        }
    }
    order.reverse();
    order
}

/// Breadth-first level structure: (eccentricity, last level).
fn levels(a: &CsrMatrix, root: usize) -> (usize, Vec<usize>) {
    let n = a.n();
    let mut depth = vec![usize::MAX; n];
    depth[root] = 0;
    let mut queue = VecDeque::from([root]);
    let mut max_depth = 0;
    let mut seen = vec![root];
    while let Some(v) = queue.pop_front() {
        for (j, _) in a.row(v) {
            if depth[j] == usize::MAX {
                depth[j] = depth[v] + 1;
                max_depth = max_depth.max(depth[j]);
                queue.push_back(j);
                seen.push(j);
            }
        }
    }
    let last = seen.into_iter().filter(|&v| depth[v] == max_depth).collect();
    (max_depth, last)
}

fn pseudo_peripheral(a: &CsrMatrix, seed: usize, degree: &[usize]) -> usize {
    let mut root = seed;
    let (mut ecc, mut last) = levels(a, root);
    for _ in 0..8 {
        let Some(&cand) = last.iter().min_by_key(|&&v| (degree[v], v)) else {
            break;
        };
        let (e, l) = levels(a, cand);
        if e <= ecc {
            break;
        }
        root = cand;
        ecc = e;
        last = l;
    }
    root
}

/// `L Lᵀ = P A Pᵀ` with `L` stored row-wise over its envelope.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    n: usize,
    /// `perm[new] = old`
    perm: Vec<usize>,
    /// First stored column of each row.
    first: Vec<usize>,
    /// Row `i` occupies `values[ptr[i]..ptr[i + 1]]`, columns `first[i]..=i`.
    ptr: Vec<usize>,
    values: Vec<f64>,
}

/// Relative pivot below which the matrix is treated as singular.
const PIVOT_TOL: f64 = 1e-11;

impl EnvelopeCholesky {
    /// Factors a symmetric positive definite matrix under RCM ordering.
    /// A non-positive or vanishing pivot yields
    /// `Error::InsufficientlyConstrained` naming the original row.
    pub fn factor(a: &CsrMatrix) -> Result<Self> {
        let perm = rcm_ordering(a);
        Self::factor_with(a, perm)
    }

    pub fn factor_with(a: &CsrMatrix, perm: Vec<usize>) -> Result<Self> {
        let n = a.n();
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for new in 0..n {
            for (j, _) in a.row(perm[new]) {
                let jn = inv[j];
                if jn < first[new] {
                    first[new] = jn;
                }
            }
        }
        let mut ptr = vec![0usize; n + 1];
        for i in 0..n {
            ptr[i + 1] = ptr[i] + (i - first[i] + 1);
        }
        let mut values = vec![0.0; ptr[n]];
        for new in 0..n {
            for (j, v) in a.row(perm[new]) {
                let jn = inv[j];
                if jn <= new {
                    values[ptr[new] + jn - first[new]] = v;
                }
            }
        }

        for i in 0..n {
            let fi = first[i];
            let (done, rest) = values.split_at_mut(ptr[i]);
            let row_i = &mut rest[..i - fi + 1];
            for j in fi..i {
                let fj = first[j];
                let k0 = fi.max(fj);
                let row_j = &done[ptr[j]..ptr[j + 1]];
                let dot = dot(&row_i[k0 - fi..j - fi], &row_j[k0 - fj..j - fj]);
                let ljj = row_j[j - fj];
                row_i[j - fi] = (row_i[j - fi] - dot) / ljj;
            }
            let diag = row_i[i - fi];
            let off = &row_i[..i - fi];
            let d = diag - dot(off, off);
            if !(d > PIVOT_TOL * diag.abs()) || !d.is_finite() {
                return Err(Error::InsufficientlyConstrained { pivot: perm[i] });
            }
            row_i[i - fi] = d.sqrt();
        }
        Ok(Self {
            n,
            perm,
            first,
            ptr,
            values,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored entries of the factor.
    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    /// Solves `A x = b`.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        // forward: L y = b
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.values[self.ptr[i]..self.ptr[i + 1]];
            let s = dot(&row[..i - fi], &y[fi..i]);
            y[i] = (y[i] - s) / row[i - fi];
        }
        // backward: Lᵀ x = y, column sweep over stored rows
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.values[self.ptr[i]..self.ptr[i + 1]];
            y[i] /= row[i - fi];
            let yi = y[i];
            for (k, l) in row[..i - fi].iter().enumerate() {
                y[fi + k] -= l * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    // four accumulators let the compiler vectorize without reassociation flags
    let mut acc = [0.0f64; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        for l in 0..4 {
            acc[l] += a[4 * c + l] * b[4 * c + l];
        }
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..a.len() {
        s += a[k] * b[k];
    }
    s
}

pub fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

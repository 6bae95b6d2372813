//! Compressed sparse row storage, sparse Cholesky and preconditioned CG.
//!
//! The Cholesky factorization follows the classic up-looking scheme: an
//! elimination tree gives each row's sparsity pattern, and a reverse
//! Cuthill-McKee permutation keeps the fill close to the matrix envelope.

use crate::error::{Error, Result};
use crate::scalar::{dot, norm2, Scalar};

/// Square sparse matrix in CSR layout with sorted, duplicate-free column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<T>,
}

/// Accumulates `(row, col, value)` triplets; duplicates are summed in insertion order.
#[derive(Debug, Clone)]
pub struct TripletBuilder<T> {
    n: usize,
    entries: Vec<(usize, usize, T)>,
}

impl<T: Scalar> TripletBuilder<T> {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: Vec::new(),
        }
    }

    pub fn with_capacity(n: usize, cap: usize) -> Self {
        Self {
            n,
            entries: Vec::with_capacity(cap),
        }
    }

    pub fn push(&mut self, row: usize, col: usize, value: T) {
        debug_assert!(row < self.n && col < self.n);
        self.entries.push((row, col, value));
    }

    pub fn build(mut self) -> CsrMatrix<T> {
        // stable sort keeps the summation order deterministic
        self.entries.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; self.n + 1];
        let mut col_idx = Vec::with_capacity(self.entries.len());
        let mut values: Vec<T> = Vec::with_capacity(self.entries.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in self.entries {
            if last == Some((r, c)) {
                *values.last_mut().expect("non-empty") += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..self.n {
            row_ptr[i + 1] += row_ptr[i];
        }
        CsrMatrix {
            n: self.n,
            row_ptr,
            col_idx,
            values,
        }
    }
}

impl<T: Scalar> CsrMatrix<T> {
    pub fn identity(n: usize) -> Self {
        let mut b = TripletBuilder::new(n);
        for i in 0..n {
            b.push(i, i, T::one());
        }
        b.build()
    }

    pub fn from_dense(rows: &[Vec<T>]) -> Self {
        let n = rows.len();
        let mut b = TripletBuilder::new(n);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                if v != T::zero() {
                    b.push(i, j, v);
                }
            }
        }
        b.build()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()]
            .iter()
            .copied()
            .zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => T::zero(),
        }
    }

    pub fn matvec(&self, x: &[T]) -> Vec<T> {
        let mut y = vec![T::zero(); self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn matvec_into(&self, x: &[T], y: &mut [T]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row(i).map(|(j, v)| v * x[j]).sum();
        }
    }

    /// `x^T A x`
    pub fn quadratic_form(&self, x: &[T]) -> T {
        dot(x, &self.matvec(x))
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// `max |A_ij - A_ji|`
    pub fn asymmetry(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> Vec<Vec<T>> {
        let mut out = vec![vec![T::zero(); self.n]; self.n];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        out
    }

    /// `P A P^T` where `perm[new] = old`.
    fn permuted(&self, perm: &[usize]) -> Self {
        let mut inv = vec![0; self.n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut b = TripletBuilder::with_capacity(self.n, self.nnz());
        for (new_i, &old_i) in perm.iter().enumerate() {
            for (old_j, v) in self.row(old_i) {
                b.push(new_i, inv[old_j], v);
            }
        }
        b.build()
    }
}

/// Reverse Cuthill-McKee ordering of the symmetric sparsity graph; `perm[new] = old`.
pub fn reverse_cuthill_mckee<T: Scalar>(a: &CsrMatrix<T>) -> Vec<usize> {
    let n = a.dim();
    let degree: Vec<usize> = (0..n)
        .map(|i| a.row(i).filter(|&(j, _)| j != i).count())
        .collect();
    let mut visited = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let bfs = |start: usize, visited: &mut Vec<bool>, order: &mut Vec<usize>| -> usize {
        let first = order.len();
        visited[start] = true;
        order.push(start);
        let mut head = first;
        let mut nbrs = Vec::new();
        while head < order.len() {
            let v = order[head];
            head += 1;
            nbrs.clear();
            nbrs.extend(a.row(v).map(|(j, _)| j).filter(|&j| !visited[j]));
            nbrs.sort_by_key(|&j| (degree[j], j));
            for &j in &nbrs {
                visited[j] = true;
                order.push(j);
            }
        }
        *order.last().expect("component non-empty")
    };
    for root in 0..n {
        if visited[root] {
            continue;
        }
        // pseudo-peripheral start: a few BFS sweeps from the far end
        let mut start = root;
        for _ in 0..3 {
            let mut scratch_vis = visited.clone();
            let mut scratch = Vec::new();
            let far = bfs(start, &mut scratch_vis, &mut scratch);
            if far == start {
                break;
            }
            start = far;
        }
        bfs(start, &mut visited, &mut order);
    }
    order.reverse();
    order
}

/// Sparse lower-triangular Cholesky factor `P A P^T = L L^T`.
#[derive(Debug, Clone)]
pub struct SparseCholesky<T> {
    n: usize,
    perm: Vec<usize>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    values: Vec<T>,
}

impl<T: Scalar> SparseCholesky<T> {
    pub fn factor(a: &CsrMatrix<T>) -> Result<Self> {
        let perm = reverse_cuthill_mckee(a);
        Self::factor_with_ordering(a, perm)
    }

    pub fn factor_with_ordering(a: &CsrMatrix<T>, perm: Vec<usize>) -> Result<Self> {
        let n = a.dim();
        let c = a.permuted(&perm);
        // Column k of the upper triangle = entries (i, k), i <= k, read from row k by symmetry.
        let upper = |k: usize| c.row(k).filter(move |&(i, _)| i <= k);

        let mut parent = vec![usize::MAX; n];
        let mut ancestor = vec![usize::MAX; n];
        for k in 0..n {
            for (mut i, _) in upper(k) {
                while i != usize::MAX && i < k {
                    let next = ancestor[i];
                    ancestor[i] = k;
                    if next == usize::MAX {
                        parent[i] = k;
                    }
                    i = next;
                }
            }
        }

        let mut mark = vec![usize::MAX; n];
        let mut stack = vec![0usize; n];
        let mut path = vec![0usize; n];
        // Nonzero pattern of row k of L (excluding the diagonal), written to stack[top..n].
        let mut ereach = |k: usize, mark: &mut Vec<usize>, stack: &mut Vec<usize>| -> usize {
            let mut top = n;
            mark[k] = k;
            for (i0, _) in upper(k) {
                let mut len = 0;
                let mut i = i0;
                while mark[i] != k {
                    path[len] = i;
                    len += 1;
                    mark[i] = k;
                    i = parent[i];
                }
                while len > 0 {
                    len -= 1;
                    top -= 1;
                    stack[top] = path[len];
                }
            }
            top
        };

        let mut counts = vec![1usize; n];
        for k in 0..n {
            let top = ereach(k, &mut mark, &mut stack);
            for &i in &stack[top..n] {
                counts[i] += 1;
            }
        }
        let mut col_ptr = vec![0usize; n + 1];
        for k in 0..n {
            col_ptr[k + 1] = col_ptr[k] + counts[k];
        }
        let nnz = col_ptr[n];
        let mut row_idx = vec![0usize; nnz];
        let mut values = vec![T::zero(); nnz];
        let mut fill = col_ptr[..n].to_vec();
        let mut x = vec![T::zero(); n];
        mark.iter_mut().for_each(|m| *m = usize::MAX);

        for k in 0..n {
            let top = ereach(k, &mut mark, &mut stack);
            for (i, v) in upper(k) {
                x[i] = v;
            }
            let mut d = x[k];
            x[k] = T::zero();
            for &i in &stack[top..n] {
                let lki = x[i] / values[col_ptr[i]];
                x[i] = T::zero();
                for p in col_ptr[i] + 1..fill[i] {
                    x[row_idx[p]] -= values[p] * lki;
                }
                d -= lki * lki;
                let p = fill[i];
                fill[i] += 1;
                row_idx[p] = k;
                values[p] = lki;
            }
            if !(d > T::zero()) {
                return Err(Error::NotSpd {
                    column: perm[k],
                    pivot: d.to_f64_lossy(),
                });
            }
            let p = fill[k];
            fill[k] += 1;
            row_idx[p] = k;
            values[p] = d.sqrt();
        }
        Ok(Self {
            n,
            perm,
            col_ptr,
            row_idx,
            values,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn factor_nnz(&self) -> usize {
        self.values.len()
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let mut x: Vec<T> = self.perm.iter().map(|&old| b[old]).collect();
        // L y = Pb
        for j in 0..self.n {
            let r = self.col_ptr[j]..self.col_ptr[j + 1];
            x[j] /= self.values[r.start];
            let xj = x[j];
            for p in r.start + 1..r.end {
                x[self.row_idx[p]] -= self.values[p] * xj;
            }
        }
        // L^T z = y
        for j in (0..self.n).rev() {
            let r = self.col_ptr[j]..self.col_ptr[j + 1];
            let mut s = x[j];
            for p in r.start + 1..r.end {
                s -= self.values[p] * x[self.row_idx[p]];
            }
            x[j] = s / self.values[r.start];
        }
        let mut out = vec![T::zero(); self.n];
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = x[new];
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgConfig {
    pub rel_tol: f64,
    pub max_iter: usize,
}

impl Default for CgConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            max_iter: 20_000,
        }
    }
}

/// Jacobi-preconditioned conjugate gradient. Returns the solution and iteration count.
pub fn pcg<T: Scalar>(
    a: &CsrMatrix<T>,
    b: &[T],
    x0: Option<&[T]>,
    cfg: CgConfig,
) -> Result<(Vec<T>, usize)> {
    let n = a.dim();
    let inv_diag: Vec<T> = a
        .diagonal()
        .into_iter()
        .map(|d| {
            if d > T::zero() {
                T::one() / d
            } else {
                T::one()
            }
        })
        .collect();
    let mut x = x0.map_or_else(|| vec![T::zero(); n], <[T]>::to_vec);
    let ax = a.matvec(&x);
    let mut r: Vec<T> = b.iter().zip(&ax).map(|(bi, ai)| *bi - *ai).collect();
    let bnorm = norm2(b);
    if bnorm == T::zero() {
        return Ok((vec![T::zero(); n], 0));
    }
    let tol = T::lit(cfg.rel_tol) * bnorm;
    let mut z: Vec<T> = r.iter().zip(&inv_diag).map(|(ri, di)| *ri * *di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![T::zero(); n];
    for it in 0..cfg.max_iter {
        if norm2(&r) <= tol {
            return Ok((x, it));
        }
        a.matvec_into(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(Error::NotSpd {
                column: it,
                pivot: pap.to_f64_lossy(),
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let res = norm2(&r);
    if res <= tol {
        Ok((x, cfg.max_iter))
    } else {
        Err(Error::CgDiverged {
            iterations: cfg.max_iter,
            residual: (res / bnorm).to_f64_lossy(),
        })
    }
}

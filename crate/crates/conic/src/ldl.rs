//! Sparse LDLᵀ factorization for symmetric quasi-definite matrices.
//!
//! The matrix is supplied as the upper triangle of a symmetric matrix in
//! compressed-column form. A fill-reducing minimum-degree permutation is
//! computed once; the symbolic analysis (elimination tree and column counts)
//! is reused across numeric refactorizations, which only change values.

use std::collections::BTreeSet;

const NONE: usize = usize::MAX;

/// Upper-triangular CSC matrix.
#[derive(Debug, Clone)]
pub struct CscUpper {
    pub n: usize,
    pub colptr: Vec<usize>,
    pub rowval: Vec<usize>,
    pub nzval: Vec<f64>,
}

impl CscUpper {
    /// Builds a CSC upper triangle from (row, col) coordinates. Duplicate
    /// coordinates are merged. Returns the matrix and, for every input
    /// triplet, the position of its value in `nzval`.
    pub fn from_pattern(n: usize, entries: &[(usize, usize)]) -> (Self, Vec<usize>) {
        let mut cols: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (k, &(r, c)) in entries.iter().enumerate() {
            let (r, c) = if r <= c { (r, c) } else { (c, r) };
            cols[c].push((r, k));
        }
        let mut colptr = Vec::with_capacity(n + 1);
        let mut rowval = Vec::new();
        let mut map = vec![0usize; entries.len()];
        colptr.push(0);
        for col in cols.iter_mut() {
            col.sort_unstable();
            let mut last = NONE;
            for &(r, k) in col.iter() {
                if r != last {
                    rowval.push(r);
                    last = r;
                }
                map[k] = rowval.len() - 1;
            }
            colptr.push(rowval.len());
        }
        let nnz = rowval.len();
        (
            CscUpper {
                n,
                colptr,
                rowval,
                nzval: vec![0.0; nnz],
            },
            map,
        )
    }

    /// y = K x using the full symmetric matrix.
    pub fn sym_mul(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for j in 0..self.n {
            for p in self.colptr[j]..self.colptr[j + 1] {
                let i = self.rowval[p];
                let v = self.nzval[p];
                y[i] += v * x[j];
                if i != j {
                    y[j] += v * x[i];
                }
            }
        }
    }
}

/// Approximate minimum-degree ordering on the symmetric sparsity graph.
///
/// Explicit elimination graph with degree buckets kept in an ordered set, so
/// ties break on the lowest index and the ordering is deterministic.
pub fn minimum_degree(mat: &CscUpper) -> Vec<usize> {
    let n = mat.n;
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for j in 0..n {
        for p in mat.colptr[j]..mat.colptr[j + 1] {
            let i = mat.rowval[p];
            if i != j {
                adj[i].insert(j);
                adj[j].insert(i);
            }
        }
    }
    let mut queue: BTreeSet<(usize, usize)> = (0..n).map(|i| (adj[i].len(), i)).collect();
    let mut eliminated = vec![false; n];
    let mut order = Vec::with_capacity(n);
    while let Some(&(deg, v)) = queue.iter().next() {
        queue.remove(&(deg, v));
        eliminated[v] = true;
        order.push(v);
        let nbrs: Vec<usize> = std::mem::take(&mut adj[v]).into_iter().collect();
        for &u in &nbrs {
            queue.remove(&(adj[u].len(), u));
            adj[u].remove(&v);
        }
        for (a, &u) in nbrs.iter().enumerate() {
            for &w in &nbrs[a + 1..] {
                if adj[u].insert(w) {
                    adj[w].insert(u);
                }
            }
        }
        for &u in &nbrs {
            if !eliminated[u] {
                queue.insert((adj[u].len(), u));
            }
        }
    }
    order
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FactorError {
    ZeroPivot(usize),
}

/// Permuted LDLᵀ factorization with dynamic regularization.
#[derive(Debug, Clone)]
pub struct LdlFactor {
    n: usize,
    /// perm[k] = original index placed at position k.
    perm: Vec<usize>,
    /// Permuted upper-triangular matrix; `pmap` sends original nz slots here.
    pmat: CscUpper,
    pmap: Vec<usize>,
    etree: Vec<usize>,
    lp: Vec<usize>,
    li: Vec<usize>,
    lx: Vec<f64>,
    d: Vec<f64>,
    dinv: Vec<f64>,
    /// Expected pivot sign per permuted position (+1 or -1).
    signs: Vec<f64>,
    work: Vec<f64>,
    pub dyn_reg_eps: f64,
    pub dyn_reg_delta: f64,
    pub dyn_reg_count: usize,
}

impl LdlFactor {
    /// Symbolic analysis. `signs` are the expected pivot signs in the
    /// original ordering.
    pub fn analyze(mat: &CscUpper, signs: &[f64]) -> Self {
        let n = mat.n;
        let perm = minimum_degree(mat);
        let mut iperm = vec![0; n];
        for (k, &p) in perm.iter().enumerate() {
            iperm[p] = k;
        }
        let mut entries = Vec::with_capacity(mat.rowval.len());
        for j in 0..n {
            for p in mat.colptr[j]..mat.colptr[j + 1] {
                entries.push((iperm[mat.rowval[p]], iperm[j]));
            }
        }
        let (pmat, pmap) = CscUpper::from_pattern(n, &entries);

        // elimination tree and column counts
        let mut etree = vec![NONE; n];
        let mut lnz = vec![0usize; n];
        let mut flag = vec![NONE; n];
        for j in 0..n {
            flag[j] = j;
            for p in pmat.colptr[j]..pmat.colptr[j + 1] {
                let mut i = pmat.rowval[p];
                while i < j && flag[i] != j {
                    if etree[i] == NONE {
                        etree[i] = j;
                    }
                    lnz[i] += 1;
                    flag[i] = j;
                    i = etree[i];
                    if i == NONE {
                        break;
                    }
                }
            }
        }
        let mut lp = vec![0usize; n + 1];
        for i in 0..n {
            lp[i + 1] = lp[i] + lnz[i];
        }
        let total = lp[n];
        let psigns = perm.iter().map(|&p| signs[p]).collect();
        LdlFactor {
            n,
            perm,
            pmat,
            pmap,
            etree,
            lp,
            li: vec![0; total],
            lx: vec![0.0; total],
            d: vec![0.0; n],
            dinv: vec![0.0; n],
            signs: psigns,
            work: vec![0.0; n],
            dyn_reg_eps: 1e-13,
            dyn_reg_delta: 1e-7,
            dyn_reg_count: 0,
        }
    }

    pub fn nnz_l(&self) -> usize {
        self.lp[self.n]
    }

    /// Numeric factorization of a matrix with the analyzed pattern.
    pub fn factor(&mut self, mat: &CscUpper) -> Result<(), FactorError> {
        let n = self.n;
        self.pmat.nzval.iter_mut().for_each(|v| *v = 0.0);
        for (slot, &v) in mat.nzval.iter().enumerate() {
            self.pmat.nzval[self.pmap[slot]] += v;
        }
        self.dyn_reg_count = 0;
        let a = &self.pmat;
        let mut y_vals = vec![0.0; n];
        let mut y_marked = vec![false; n];
        let mut y_idx = vec![0usize; n];
        let mut elim = vec![0usize; n];
        let mut next_space: Vec<usize> = self.lp[..n].to_vec();

        for k in 0..n {
            let mut nnz_y = 0;
            let mut dk = 0.0;
            for p in a.colptr[k]..a.colptr[k + 1] {
                let b = a.rowval[p];
                if b == k {
                    dk += a.nzval[p];
                    continue;
                }
                y_vals[b] += a.nzval[p];
                if !y_marked[b] {
                    y_marked[b] = true;
                    elim[0] = b;
                    let mut ne = 1;
                    let mut next = self.etree[b];
                    while next != NONE && next < k {
                        if y_marked[next] {
                            break;
                        }
                        y_marked[next] = true;
                        elim[ne] = next;
                        ne += 1;
                        next = self.etree[next];
                    }
                    while ne > 0 {
                        ne -= 1;
                        y_idx[nnz_y] = elim[ne];
                        nnz_y += 1;
                    }
                }
            }
            for i in (0..nnz_y).rev() {
                let c = y_idx[i];
                let tmp = next_space[c];
                let yc = y_vals[c];
                for j in self.lp[c]..tmp {
                    y_vals[self.li[j]] -= self.lx[j] * yc;
                }
                self.li[tmp] = k;
                let l = yc * self.dinv[c];
                self.lx[tmp] = l;
                dk -= yc * l;
                next_space[c] += 1;
                y_vals[c] = 0.0;
                y_marked[c] = false;
            }
            let sign = self.signs[k];
            if !(dk * sign > self.dyn_reg_eps) {
                if !dk.is_finite() {
                    return Err(FactorError::ZeroPivot(self.perm[k]));
                }
                dk = sign * self.dyn_reg_delta;
                self.dyn_reg_count += 1;
            }
            self.d[k] = dk;
            self.dinv[k] = 1.0 / dk;
        }
        Ok(())
    }

    /// Solves K x = b in place (original ordering).
    pub fn solve(&mut self, b: &mut [f64]) {
        let n = self.n;
        let x = &mut self.work;
        for k in 0..n {
            x[k] = b[self.perm[k]];
        }
        for i in 0..n {
            let xi = x[i];
            if xi != 0.0 {
                for j in self.lp[i]..self.lp[i + 1] {
                    x[self.li[j]] -= self.lx[j] * xi;
                }
            }
        }
        for i in 0..n {
            x[i] *= self.dinv[i];
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for j in self.lp[i]..self.lp[i + 1] {
                acc -= self.lx[j] * x[self.li[j]];
            }
            x[i] = acc;
        }
        for k in 0..n {
            b[self.perm[k]] = x[k];
        }
    }
}

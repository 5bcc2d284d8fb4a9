//! Sparse LDLᵀ factorization for quasi-definite matrices.
//!
//! The matrix is supplied as the upper triangle (diagonal included) in
//! compressed-column form. No pivoting is performed: quasi-definite matrices
//! admit a factorization under any symmetric ordering, so the caller picks an
//! ordering with little fill. Pivots whose sign disagrees with the expected
//! inertia are replaced by a small value of the correct sign; callers recover
//! accuracy with iterative refinement.

const NONE: usize = usize::MAX;

/// Upper triangle of a symmetric matrix in compressed-column form.
#[derive(Debug, Clone)]
pub struct UpperCsc {
    n: usize,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    pub values: Vec<f64>,
    diag_pos: Vec<usize>,
}

impl UpperCsc {
    /// Builds the pattern from `(row, col, value)` triplets with `row <= col`.
    /// Every diagonal entry is stored, duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (j, col) in cols.iter_mut().enumerate() {
            col.push((j, 0.0));
        }
        for &(i, j, v) in triplets {
            let (i, j) = if i <= j { (i, j) } else { (j, i) };
            cols[j].push((i, v));
        }
        let mut col_ptr = Vec::with_capacity(n + 1);
        let mut row_idx = Vec::new();
        let mut values = Vec::new();
        let mut diag_pos = vec![0; n];
        col_ptr.push(0);
        for (j, mut col) in cols.into_iter().enumerate() {
            col.sort_by_key(|&(i, _)| i);
            let mut last = NONE;
            for (i, v) in col {
                if i == last {
                    *values.last_mut().unwrap() += v;
                } else {
                    if i == j {
                        diag_pos[j] = row_idx.len();
                    }
                    row_idx.push(i);
                    values.push(v);
                    last = i;
                }
            }
            col_ptr.push(row_idx.len());
        }
        Self {
            n,
            col_ptr,
            row_idx,
            values,
            diag_pos,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn set_diag(&mut self, j: usize, v: f64) {
        self.values[self.diag_pos[j]] = v;
    }

    pub fn diag(&self, j: usize) -> f64 {
        self.values[self.diag_pos[j]]
    }

    /// `y = K x` using the full symmetric matrix.
    pub fn sym_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for j in 0..self.n {
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                let i = self.row_idx[p];
                let v = self.values[p];
                y[i] += v * x[j];
                if i != j {
                    y[j] += v * x[i];
                }
            }
        }
        y
    }
}

#[derive(Debug, Clone)]
struct Symbolic {
    etree: Vec<usize>,
    l_ptr: Vec<usize>,
}

fn symbolic(k: &UpperCsc) -> Symbolic {
    let n = k.n;
    let mut etree = vec![NONE; n];
    let mut lnz = vec![0usize; n];
    let mut work = vec![NONE; n];
    for j in 0..n {
        work[j] = j;
        for p in k.col_ptr[j]..k.col_ptr[j + 1] {
            let mut i = k.row_idx[p];
            while work[i] != j {
                if etree[i] == NONE {
                    etree[i] = j;
                }
                lnz[i] += 1;
                work[i] = j;
                i = etree[i];
            }
        }
    }
    let mut l_ptr = Vec::with_capacity(n + 1);
    l_ptr.push(0);
    for c in &lnz {
        l_ptr.push(l_ptr.last().unwrap() + c);
    }
    Symbolic { etree, l_ptr }
}

/// Numeric LDLᵀ factors.
#[derive(Debug, Clone)]
pub struct LdlFactor {
    sym: Symbolic,
    l_idx: Vec<usize>,
    l_val: Vec<f64>,
    d: Vec<f64>,
    /// Number of pivots that had to be replaced to keep the expected inertia.
    pub perturbed_pivots: usize,
}

/// Reusable factorization workspace for a fixed sparsity pattern.
#[derive(Debug, Clone)]
pub struct LdlSolver {
    sym: Symbolic,
    signs: Vec<f64>,
    pivot_floor: f64,
}

impl LdlSolver {
    /// `signs[k]` is `+1` for pivots expected positive and `-1` for negative ones.
    pub fn new(k: &UpperCsc, signs: Vec<f64>, pivot_floor: f64) -> Self {
        assert_eq!(signs.len(), k.n);
        Self {
            sym: symbolic(k),
            signs,
            pivot_floor,
        }
    }

    pub fn factor(&self, k: &UpperCsc) -> LdlFactor {
        let n = k.n;
        let sym = self.sym.clone();
        let total = *sym.l_ptr.last().unwrap();
        let mut l_idx = vec![0usize; total];
        let mut l_val = vec![0.0; total];
        let mut d = vec![0.0; n];
        let mut dinv = vec![0.0; n];
        let mut next_space: Vec<usize> = sym.l_ptr[..n].to_vec();
        let mut y_val = vec![0.0; n];
        let mut y_mark = vec![false; n];
        let mut y_idx = vec![0usize; n];
        let mut elim = vec![0usize; n];
        let mut perturbed = 0;

        for col in 0..n {
            let mut nnz_y = 0;
            d[col] = 0.0;
            for p in k.col_ptr[col]..k.col_ptr[col + 1] {
                let b = k.row_idx[p];
                if b == col {
                    d[col] = k.values[p];
                    continue;
                }
                y_val[b] = k.values[p];
                if !y_mark[b] {
                    y_mark[b] = true;
                    elim[0] = b;
                    let mut n_elim = 1;
                    let mut next = sym.etree[b];
                    while next != NONE && next < col {
                        if y_mark[next] {
                            break;
                        }
                        y_mark[next] = true;
                        elim[n_elim] = next;
                        n_elim += 1;
                        next = sym.etree[next];
                    }
                    while n_elim > 0 {
                        n_elim -= 1;
                        y_idx[nnz_y] = elim[n_elim];
                        nnz_y += 1;
                    }
                }
            }
            for i in (0..nnz_y).rev() {
                let c = y_idx[i];
                let end = next_space[c];
                let yc = y_val[c];
                for q in sym.l_ptr[c]..end {
                    y_val[l_idx[q]] -= l_val[q] * yc;
                }
                l_idx[end] = col;
                let lv = yc * dinv[c];
                l_val[end] = lv;
                d[col] -= yc * lv;
                next_space[c] += 1;
                y_val[c] = 0.0;
                y_mark[c] = false;
            }
            let s = self.signs[col];
            if !(s * d[col] > self.pivot_floor) {
                d[col] = s * self.pivot_floor;
                perturbed += 1;
            }
            dinv[col] = 1.0 / d[col];
        }
        LdlFactor {
            sym,
            l_idx,
            l_val,
            d,
            perturbed_pivots: perturbed,
        }
    }
}

impl LdlFactor {
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.d.len();
        let lp = &self.sym.l_ptr;
        for i in 0..n {
            let xi = x[i];
            if xi != 0.0 {
                for q in lp[i]..lp[i + 1] {
                    x[self.l_idx[q]] -= self.l_val[q] * xi;
                }
            }
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n).rev() {
            let mut acc = x[i];
            for q in lp[i]..lp[i + 1] {
                acc -= self.l_val[q] * x[self.l_idx[q]];
            }
            x[i] = acc;
        }
    }

    pub fn fill(&self) -> usize {
        self.l_val.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_quasidefinite(
        n1: usize,
        n2: usize,
        seed: u64,
    ) -> (Vec<(usize, usize, f64)>, DMatrix<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = n1 + n2;
        let mut dense = DMatrix::zeros(n, n);
        let mut trip = Vec::new();
        for i in 0..n1 {
            let v = rng.random_range(0.5..3.0);
            dense[(i, i)] = v;
            trip.push((i, i, v));
        }
        for i in n1..n {
            let v = -rng.random_range(0.5..3.0);
            dense[(i, i)] = v;
            trip.push((i, i, v));
        }
        for i in 0..n2 {
            for j in 0..n1 {
                if rng.random_bool(0.3) {
                    let v = rng.random_range(-2.0..2.0);
                    dense[(n1 + i, j)] = v;
                    dense[(j, n1 + i)] = v;
                    trip.push((j, n1 + i, v));
                }
            }
        }
        (trip, dense)
    }

    #[test]
    fn solves_match_dense_lu() {
        for seed in 0..10 {
            let (trip, dense) = random_quasidefinite(12, 7, seed);
            let k = UpperCsc::from_triplets(19, &trip);
            let signs: Vec<f64> = (0..19).map(|i| if i < 12 { 1.0 } else { -1.0 }).collect();
            let f = LdlSolver::new(&k, signs, 1e-14).factor(&k);
            assert_eq!(f.perturbed_pivots, 0);
            let b: Vec<f64> = (0..19).map(|i| (i as f64).sin()).collect();
            let mut x = b.clone();
            f.solve_in_place(&mut x);
            let expect = dense.clone().lu().solve(&DVector::from_vec(b)).unwrap();
            for i in 0..19 {
                assert!((x[i] - expect[i]).abs() < 1e-10, "seed {seed} i {i}");
            }
        }
    }

    #[test]
    fn interleaved_ordering_also_factors() {
        // Same matrix with rows and columns shuffled: quasi-definiteness keeps
        // the factorization valid for any symmetric permutation.
        let (trip, dense) = random_quasidefinite(6, 4, 42);
        let perm: Vec<usize> = vec![6, 0, 1, 7, 2, 8, 3, 4, 9, 5];
        let mut inv = vec![0; 10];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let ptrip: Vec<_> = trip.iter().map(|&(i, j, v)| (inv[i], inv[j], v)).collect();
        let k = UpperCsc::from_triplets(10, &ptrip);
        let signs: Vec<f64> = perm
            .iter()
            .map(|&o| if o < 6 { 1.0 } else { -1.0 })
            .collect();
        let f = LdlSolver::new(&k, signs, 1e-14).factor(&k);
        let b: Vec<f64> = (0..10).map(|i| 1.0 + i as f64).collect();
        let mut x = b.clone();
        f.solve_in_place(&mut x);
        let y = k.sym_mul_vec(&x);
        for i in 0..10 {
            assert!((y[i] - b[i]).abs() < 1e-10);
        }
        let _ = dense;
    }
}

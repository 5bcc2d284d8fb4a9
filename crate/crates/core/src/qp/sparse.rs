/// Row-compressed sparse matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    ncols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    pub fn new(ncols: usize) -> Self {
        Self {
            ncols,
            row_ptr: vec![0],
            col_idx: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Builds a matrix from per-row `(column, value)` lists. Duplicate columns
    /// in a row are summed, explicit zeros are kept out of the pattern.
    pub fn from_rows(ncols: usize, rows: &[Vec<(usize, f64)>]) -> Self {
        let mut m = Self::new(ncols);
        for row in rows {
            m.push_row(row);
        }
        m
    }

    pub fn push_row(&mut self, entries: &[(usize, f64)]) {
        let mut sorted: Vec<(usize, f64)> = entries.to_vec();
        sorted.sort_by_key(|&(c, _)| c);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(sorted.len());
        for (c, v) in sorted {
            assert!(c < self.ncols, "column {c} out of range {}", self.ncols);
            match merged.last_mut() {
                Some(last) if last.0 == c => last.1 += v,
                _ => merged.push((c, v)),
            }
        }
        for (c, v) in merged {
            if v != 0.0 {
                self.col_idx.push(c);
                self.values.push(v);
            }
        }
        self.row_ptr.push(self.col_idx.len());
    }

    pub fn nrows(&self) -> usize {
        self.row_ptr.len() - 1
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    /// Coefficient at `(i, j)`, zero when structurally absent.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    /// `y = A x`
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.ncols);
        (0..self.nrows())
            .map(|i| self.row(i).map(|(j, v)| v * x[j]).sum())
            .collect()
    }

    /// `y += Aᵀ w`
    pub fn add_tr_mul_vec(&self, w: &[f64], y: &mut [f64]) {
        debug_assert_eq!(w.len(), self.nrows());
        for (i, wi) in w.iter().enumerate() {
            if *wi == 0.0 {
                continue;
            }
            for (j, v) in self.row(i) {
                y[j] += v * wi;
            }
        }
    }

    pub fn tr_mul_vec(&self, w: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.ncols];
        self.add_tr_mul_vec(w, &mut y);
        y
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = vec![vec![0.0; self.ncols]; self.nrows()];
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in self.row(i) {
                row[j] = v;
            }
        }
        d
    }

    pub fn bit_eq(&self, other: &Self) -> bool {
        self.ncols == other.ncols
            && self.row_ptr == other.row_ptr
            && self.col_idx == other.col_idx
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products_match_dense() {
        let a = SparseMatrix::from_rows(
            3,
            &[vec![(0, 1.0), (2, -2.0)], vec![], vec![(1, 3.0), (1, 1.0)]],
        );
        assert_eq!(a.nrows(), 3);
        assert_eq!(a.get(2, 1), 4.0);
        assert_eq!(a.mul_vec(&[1.0, 2.0, 3.0]), vec![-5.0, 0.0, 8.0]);
        assert_eq!(a.tr_mul_vec(&[1.0, 5.0, 2.0]), vec![1.0, 8.0, -2.0]);
    }

    #[test]
    fn cancelling_duplicates_leave_no_entry() {
        let a = SparseMatrix::from_rows(2, &[vec![(1, 1.0), (1, -1.0)]]);
        assert_eq!(a.nnz(), 0);
    }
}

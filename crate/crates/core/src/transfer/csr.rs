use rayon::prelude::*;

/// Rows above this count are multiplied in parallel.
const PAR_ROWS: usize = 2048;

/// Compressed sparse rows. Entries within a row are kept in column order,
/// so a row's sum is formed in a fixed order whatever the thread count.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Csr {
    n_cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl Csr {
    pub(crate) fn from_rows(rows: Vec<Vec<(usize, f64)>>, n_cols: usize) -> Self {
        let mut indptr = Vec::with_capacity(rows.len() + 1);
        let mut indices = Vec::new();
        let mut values = Vec::new();
        indptr.push(0);
        for mut row in rows {
            row.sort_by_key(|e| e.0);
            for (j, v) in row {
                if v != 0.0 {
                    debug_assert!(j < n_cols);
                    match indices.last() {
                        Some(&last) if last == j && indices.len() > *indptr.last().unwrap() => {
                            *values.last_mut().unwrap() += v;
                        }
                        _ => {
                            indices.push(j);
                            values.push(v);
                        }
                    }
                }
            }
            indptr.push(indices.len());
        }
        Csr {
            n_cols,
            indptr,
            indices,
            values,
        }
    }

    pub(crate) fn n_rows(&self) -> usize {
        self.indptr.len() - 1
    }

    #[cfg(test)]
    pub(crate) fn nnz(&self) -> usize {
        self.values.len()
    }

    pub(crate) fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for k in self.indptr[i]..self.indptr[i + 1] {
            s += self.values[k] * x[self.indices[k]];
        }
        s
    }

    pub(crate) fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n_cols);
        let n = self.n_rows();
        if n >= PAR_ROWS {
            (0..n).into_par_iter().map(|i| self.row_dot(i, x)).collect()
        } else {
            (0..n).map(|i| self.row_dot(i, x)).collect()
        }
    }

    pub(crate) fn transpose(&self) -> Csr {
        let mut rows = vec![Vec::new(); self.n_cols];
        for i in 0..self.n_rows() {
            for (j, v) in self.row(i) {
                rows[j].push((i, v));
            }
        }
        Csr::from_rows(rows, self.n_rows())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_and_transpose() {
        let a = Csr::from_rows(vec![vec![(1, 2.0), (0, 1.0)], vec![], vec![(2, 3.0)]], 3);
        assert_eq!(a.nnz(), 3);
        assert_eq!(a.matvec(&[1.0, 1.0, 1.0]), vec![3.0, 0.0, 3.0]);
        let t = a.transpose();
        assert_eq!(t.matvec(&[1.0, 0.0, 1.0]), vec![1.0, 2.0, 3.0]);
        assert_eq!(t.transpose(), a);
    }

    #[test]
    fn duplicate_columns_merge() {
        let a = Csr::from_rows(vec![vec![(0, 1.0), (0, 0.5)]], 1);
        assert_eq!(a.nnz(), 1);
        assert_eq!(a.matvec(&[2.0]), vec![3.0]);
    }

    #[test]
    fn parallel_matches_serial() {
        let n = 5000;
        let rows: Vec<Vec<(usize, f64)>> = (0..n)
            .map(|i| vec![(i, 0.5), ((i * 7 + 3) % n, 1.0 / (i + 1) as f64)])
            .collect();
        let a = Csr::from_rows(rows, n);
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let par = a.matvec(&x);
        let ser: Vec<f64> = (0..n).map(|i| a.row_dot(i, &x)).collect();
        assert_eq!(par, ser);
    }
}

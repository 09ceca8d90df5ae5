//! Minimal compressed-row matrices and a wrapper around faer's sparse LU.

use faer::prelude::*;
use faer::sparse::{SparseColMat, Triplet};

use crate::error::{Error, Result};

/// Square matrix in compressed-row form with sorted, unique column indices.
#[derive(Clone, Debug)]
pub struct Csr {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<f64>,
}

impl Csr {
    /// Sums duplicate entries.
    pub fn from_triplets(n: usize, entries: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(r, _, _) in entries {
            counts[r + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut cols = vec![0usize; entries.len()];
        let mut vals = vec![0.0; entries.len()];
        for &(r, c, v) in entries {
            cols[fill[r]] = c;
            vals[fill[r]] = v;
            fill[r] += 1;
        }
        let mut row_ptr = vec![0usize; n + 1];
        let mut col = Vec::with_capacity(entries.len());
        let mut val = Vec::with_capacity(entries.len());
        let mut scratch: Vec<(usize, f64)> = Vec::new();
        for i in 0..n {
            scratch.clear();
            scratch.extend((counts[i]..counts[i + 1]).map(|k| (cols[k], vals[k])));
            scratch.sort_unstable_by_key(|e| e.0);
            for &(c, v) in &scratch {
                if col.len() > row_ptr[i] && *col.last().unwrap() == c {
                    *val.last_mut().unwrap() += v;
                } else {
                    col.push(c);
                    val.push(v);
                }
            }
            row_ptr[i + 1] = col.len();
        }
        Self { n, row_ptr, col, val }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                (self.row_ptr[i]..self.row_ptr[i + 1])
                    .map(|k| self.val[k] * x[self.col[k]])
                    .sum()
            })
            .collect()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let row = &self.col[self.row_ptr[i]..self.row_ptr[i + 1]];
        match row.binary_search(&j) {
            Ok(k) => self.val[self.row_ptr[i] + k],
            Err(_) => 0.0,
        }
    }

    /// `a·self + b·other`, assuming both are square of the same size.
    pub fn combine(&self, a: f64, other: &Csr, b: f64) -> Csr {
        let mut t = Vec::with_capacity(self.val.len() + other.val.len());
        for (m, s) in [(self, a), (other, b)] {
            for i in 0..m.n {
                for k in m.row_ptr[i]..m.row_ptr[i + 1] {
                    t.push((i, m.col[k], s * m.val[k]));
                }
            }
        }
        Csr::from_triplets(self.n, &t)
    }

    /// Largest `|A_ij − A_ji|`.
    pub fn asymmetry(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                m = m.max((self.val[k] - self.get(self.col[k], i)).abs());
            }
        }
        m
    }

    /// Row sums.
    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.val[self.row_ptr[i]..self.row_ptr[i + 1]].iter().sum())
            .collect()
    }

    /// Keeps only rows and columns flagged `true`, renumbered in order.
    pub fn restrict(&self, keep: &[bool]) -> (Csr, Vec<usize>) {
        let mut map = vec![usize::MAX; self.n];
        let mut idx = Vec::new();
        for (i, &k) in keep.iter().enumerate() {
            if k {
                map[i] = idx.len();
                idx.push(i);
            }
        }
        let mut t = Vec::new();
        for &i in &idx {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let j = self.col[k];
                if map[j] != usize::MAX {
                    t.push((map[i], map[j], self.val[k]));
                }
            }
        }
        (Csr::from_triplets(idx.len(), &t), idx)
    }
}

/// A factorized sparse matrix.
pub struct SparseLu {
    lu: faer::sparse::linalg::solvers::Lu<usize, f64>,
    n: usize,
}

impl SparseLu {
    pub fn new(a: &Csr) -> Result<Self> {
        // CSR of A is CSC of Aᵀ; build triplets explicitly to stay general.
        let mut t = Vec::with_capacity(a.val.len());
        for i in 0..a.n {
            for k in a.row_ptr[i]..a.row_ptr[i + 1] {
                t.push(Triplet::new(i, a.col[k], a.val[k]));
            }
        }
        let m = SparseColMat::<usize, f64>::try_new_from_triplets(a.n, a.n, &t)
            .map_err(|e| Error::Singular(format!("sparse assembly failed: {e:?}")))?;
        let lu = m
            .sp_lu()
            .map_err(|e| Error::Singular(format!("sparse LU failed: {e:?}")))?;
        Ok(Self { lu, n: a.n })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let rhs = Mat::<f64>::from_fn(self.n, 1, |i, _| b[i]);
        let x = self.lu.solve(&rhs);
        let out: Vec<f64> = (0..self.n).map(|i| x[(i, 0)]).collect();
        if out.iter().all(|v| v.is_finite()) {
            Ok(out)
        } else {
            Err(Error::Singular("sparse solve produced non-finite values".into()))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assembles_and_solves() {
        let n = 6;
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 1.0));
            t.push((i, i, 1.5));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        let a = Csr::from_triplets(n, &t);
        assert_eq!(a.get(2, 2), 2.5);
        assert_eq!(a.asymmetry(), 0.0);
        let x: Vec<f64> = (0..n).map(|i| i as f64 * 0.3 - 1.0).collect();
        let b = a.matvec(&x);
        let y = SparseLu::new(&a).unwrap().solve(&b).unwrap();
        for (p, q) in x.iter().zip(&y) {
            assert!((p - q).abs() < 1e-13);
        }
        let keep: Vec<bool> = (0..n).map(|i| i % 2 == 0).collect();
        let (r, idx) = a.restrict(&keep);
        assert_eq!(idx, vec![0, 2, 4]);
        assert_eq!(r.get(1, 1), 2.5);
        assert_eq!(r.get(0, 1), 0.0);
    }
}

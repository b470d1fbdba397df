use num_complex::Complex64 as C64;

use super::linalg::CMat;

/// Compressed sparse row matrix with complex entries.
#[derive(Clone, Debug)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    values: Vec<C64>,
}

impl SparseMatrix {
    /// Builds from (row, col, value) triplets; duplicates are summed, exact zeros dropped.
    pub fn from_triplets(rows: usize, cols: usize, mut trip: Vec<(usize, usize, C64)>) -> Self {
        trip.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; rows + 1];
        let mut indices = Vec::with_capacity(trip.len());
        let mut values: Vec<C64> = Vec::with_capacity(trip.len());
        let mut last: Option<(usize, usize)> = None;
        let mut row_counts = vec![0usize; rows];
        for (r, c, v) in trip {
            if last == Some((r, c)) {
                *values.last_mut().expect("entry exists") += v;
            } else {
                indices.push(c);
                values.push(v);
                row_counts[r] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..rows {
            indptr[r + 1] = indptr[r] + row_counts[r];
        }
        let mut m = SparseMatrix { rows, cols, indptr, indices, values };
        m.prune();
        m
    }

    fn prune(&mut self) {
        let mut indptr = vec![0usize; self.rows + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.rows {
            for k in self.indptr[r]..self.indptr[r + 1] {
                if self.values[k] != C64::new(0.0, 0.0) {
                    indices.push(self.indices[k]);
                    values.push(self.values[k]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.values = values;
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self::from_triplets(rows, cols, Vec::new())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.rows).flat_map(move |r| {
            (self.indptr[r]..self.indptr[r + 1]).map(move |k| (r, self.indices[k], self.values[k]))
        })
    }

    pub fn apply_into(&self, x: &[C64], out: &mut [C64]) {
        for r in 0..self.rows {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[k] * x[self.indices[k]];
            }
            out[r] = acc;
        }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut out = vec![C64::new(0.0, 0.0); self.rows];
        self.apply_into(x, &mut out);
        out
    }

    pub fn adjoint(&self) -> Self {
        let trip = self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(self.cols, self.rows, trip)
    }

    /// Sum of scaled matrices of equal shape.
    pub fn combine(terms: &[(&SparseMatrix, C64)]) -> Self {
        let (rows, cols) = terms.first().map(|(m, _)| (m.rows, m.cols)).unwrap_or((0, 0));
        let trip = terms
            .iter()
            .flat_map(|(m, s)| m.triplets().map(move |(r, c, v)| (r, c, v * s)))
            .collect();
        Self::from_triplets(rows, cols, trip)
    }

    pub fn to_dense(&self) -> CMat {
        let mut d = CMat::zeros(self.rows, self.cols);
        for (r, c, v) in self.triplets() {
            d[(r, c)] += v;
        }
        d
    }

    /// Largest |A_ij - conj(A_ji)|.
    pub fn hermitian_defect(&self) -> f64 {
        let adj = self.adjoint();
        let diff = SparseMatrix::combine(&[(self, C64::new(1.0, 0.0)), (&adj, C64::new(-1.0, 0.0))]);
        diff.values.iter().fold(0.0, |m, z| m.max(z.norm()))
    }
}

use num_complex::Complex64 as C64;

use super::matrix::ComplexMatrix;

/// Compressed-row complex matrix used to apply mostly-empty operators quickly.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    rows: usize,
    cols: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<C64>,
}

impl SparseMatrix {
    /// Keeps entries with magnitude above `drop_below`.
    pub fn from_dense(m: &ComplexMatrix, drop_below: f64) -> Self {
        let mut row_ptr = Vec::with_capacity(m.rows() + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for i in 0..m.rows() {
            for (j, &z) in m.row(i).iter().enumerate() {
                if z.norm() > drop_below {
                    col_idx.push(j);
                    values.push(z);
                }
            }
            row_ptr.push(col_idx.len());
        }
        Self { rows: m.rows(), cols: m.cols(), row_ptr, col_idx, values }
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

    /// `(row, col, value)` triples in row order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, C64)> + '_ {
        (0..self.rows).flat_map(move |i| {
            (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (i, self.col_idx[k], self.values[k]))
        })
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(self.rows, self.cols);
        for (i, j, z) in self.entries() {
            m[(i, j)] = z;
        }
        m
    }

    pub fn mul_vec(&self, v: &[C64], out: &mut [C64]) {
        for (i, o) in out.iter_mut().enumerate().take(self.rows) {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * v[self.col_idx[k]];
            }
            *o = acc;
        }
    }

    /// `out += scale · self · dense`, both row-major with `cols` columns.
    pub fn mul_dense_acc(&self, scale: C64, dense: &[C64], cols: usize, out: &mut [C64]) {
        for i in 0..self.rows {
            let orow = &mut out[i * cols..(i + 1) * cols];
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let a = self.values[k] * scale;
                let j = self.col_idx[k];
                for (o, b) in orow.iter_mut().zip(&dense[j * cols..(j + 1) * cols]) {
                    *o += a * b;
                }
            }
        }
    }

    /// `out += scale · self · v`
    pub fn mul_vec_acc(&self, scale: C64, v: &[C64], out: &mut [C64]) {
        for (i, o) in out.iter_mut().enumerate().take(self.rows) {
            let mut acc = C64::new(0.0, 0.0);
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * v[self.col_idx[k]];
            }
            *o += acc * scale;
        }
    }

    /// `out = self · dense`, both row-major with `cols` columns.
    pub fn mul_dense(&self, dense: &[C64], cols: usize, out: &mut [C64]) {
        for i in 0..self.rows {
            let orow = &mut out[i * cols..(i + 1) * cols];
            orow.iter_mut().for_each(|z| *z = C64::new(0.0, 0.0));
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let a = self.values[k];
                let j = self.col_idx[k];
                for (o, b) in orow.iter_mut().zip(&dense[j * cols..(j + 1) * cols]) {
                    *o += a * b;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::matrix::destroy;

    #[test]
    fn dense_roundtrip_and_products() {
        let a = destroy(4).unwrap();
        let s = SparseMatrix::from_dense(&a, 0.0);
        assert_eq!(s.nnz(), 3);
        assert_eq!(s.to_dense(), a);
        let b = ComplexMatrix::from_fn(4, 4, |i, j| C64::new(i as f64, j as f64 - 1.0));
        let mut out = vec![C64::new(0.0, 0.0); 16];
        s.mul_dense(b.as_slice(), 4, &mut out);
        assert_eq!(out, (&a * &b).into_vec());
        let v: Vec<C64> = (0..4).map(|i| C64::new(1.0, i as f64)).collect();
        let mut w = vec![C64::new(0.0, 0.0); 4];
        s.mul_vec(&v, &mut w);
        assert_eq!(w, a.apply(&v));
    }
}

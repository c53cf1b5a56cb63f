use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{shape, Result};

/// Row-major dense `f64` matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(shape(
                "Matrix::from_vec",
                format!("{rows}x{cols} needs {} values, got {}", rows * cols, data.len()),
            ));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    #[inline]
    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Copies the given rows, in order, into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> Self {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &Matrix) -> Result<Self> {
        if self.cols != other.cols {
            return Err(shape(
                "Matrix::vstack",
                format!("top has {} cols, bottom has {} cols", self.cols, other.cols),
            ));
        }
        let mut data = Vec::with_capacity(self.data.len() + other.data.len());
        data.extend_from_slice(&self.data);
        data.extend_from_slice(&other.data);
        Ok(Self {
            rows: self.rows + other.rows,
            cols: self.cols,
            data,
        })
    }

    /// `self · other`.
    pub fn matmul(&self, other: &Matrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(shape(
                "matmul",
                format!(
                    "left is {}x{}, right is {}x{} (left.cols {} != right.rows {})",
                    self.rows, self.cols, other.rows, other.cols, self.cols, other.rows
                ),
            ));
        }
        let n = other.cols;
        let mut out = Self::zeros(self.rows, n);
        for i in 0..self.rows {
            let a_row = self.row(i);
            let o_row = &mut out.data[i * n..(i + 1) * n];
            for (k, &a) in a_row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let b_row = &other.data[k * n..(k + 1) * n];
                for (o, &b) in o_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `selfᵀ · other`, without materializing the transpose.
    pub fn matmul_tn(&self, other: &Matrix) -> Result<Self> {
        if self.rows != other.rows {
            return Err(shape(
                "matmul_tn",
                format!(
                    "left is {}x{}, right is {}x{} (row counts {} != {})",
                    self.rows, self.cols, other.rows, other.cols, self.rows, other.rows
                ),
            ));
        }
        let n = other.cols;
        let mut out = Self::zeros(self.cols, n);
        for r in 0..self.rows {
            let a_row = self.row(r);
            let b_row = other.row(r);
            for (i, &a) in a_row.iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                let o_row = &mut out.data[i * n..(i + 1) * n];
                for (o, &b) in o_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self · otherᵀ`, without materializing the transpose.
    pub fn matmul_nt(&self, other: &Matrix) -> Result<Self> {
        if self.cols != other.cols {
            return Err(shape(
                "matmul_nt",
                format!(
                    "left is {}x{}, right is {}x{} (col counts {} != {})",
                    self.rows, self.cols, other.rows, other.cols, self.cols, other.cols
                ),
            ));
        }
        let mut out = Self::zeros(self.rows, other.rows);
        for i in 0..self.rows {
            let a_row = self.row(i);
            for j in 0..other.rows {
                let b_row = other.row(j);
                let mut acc = 0.0;
                for (&a, &b) in a_row.iter().zip(b_row) {
                    acc += a * b;
                }
                out.data[i * other.rows + j] = acc;
            }
        }
        Ok(out)
    }

    /// Adds `bias` to every row. This is the only broadcast the kernel allows.
    pub fn add_row_bias(&mut self, bias: &[f64]) -> Result<()> {
        if bias.len() != self.cols {
            return Err(shape(
                "add_row_bias",
                format!("matrix has {} cols, bias has {} entries", self.cols, bias.len()),
            ));
        }
        for row in self.data.chunks_exact_mut(self.cols) {
            for (v, &b) in row.iter_mut().zip(bias) {
                *v += b;
            }
        }
        Ok(())
    }

    pub fn column_sums(&self) -> Vec<f64> {
        let mut sums = vec![0.0; self.cols];
        for row in self.data.chunks_exact(self.cols.max(1)) {
            for (s, &v) in sums.iter_mut().zip(row) {
                *s += v;
            }
        }
        sums
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    #[test]
    fn matmul_small() {
        let a = Matrix::from_vec(2, 3, vec![1., 2., 3., 4., 5., 6.]).unwrap();
        let b = Matrix::from_vec(3, 2, vec![7., 8., 9., 10., 11., 12.]).unwrap();
        let c = a.matmul(&b).unwrap();
        assert_eq!(c.data(), &[58., 64., 139., 154.]);
    }

    #[test]
    fn transposed_products_agree_with_plain_matmul() {
        let a = Matrix::from_fn(4, 3, |i, j| (i * 3 + j) as f64 * 0.5 - 2.0);
        let b = Matrix::from_fn(4, 2, |i, j| (i + 2 * j) as f64 - 1.5);
        let at = Matrix::from_fn(3, 4, |i, j| a.get(j, i));
        assert_eq!(a.matmul_tn(&b).unwrap(), at.matmul(&b).unwrap());

        let c = Matrix::from_fn(5, 3, |i, j| (i * j) as f64 - 1.0);
        let ct = Matrix::from_fn(3, 5, |i, j| c.get(j, i));
        assert_eq!(a.matmul_nt(&c).unwrap(), a.matmul(&ct).unwrap());
    }

    #[test]
    fn shape_errors_name_both_dimensions() {
        let a = Matrix::zeros(2, 3);
        let b = Matrix::zeros(4, 2);
        let err = a.matmul(&b).unwrap_err().to_string();
        assert!(err.contains("2x3") && err.contains("4x2"), "{err}");
        assert!(Matrix::from_vec(2, 2, vec![1.0]).is_err());
        let mut m = Matrix::zeros(2, 2);
        assert!(m.add_row_bias(&[1.0]).is_err());
    }

    #[test]
    fn bias_broadcasts_per_row() {
        let mut m = Matrix::zeros(2, 2);
        m.add_row_bias(&[1.0, -1.0]).unwrap();
        assert_eq!(m.data(), &[1.0, -1.0, 1.0, -1.0]);
        assert_eq!(m.column_sums(), vec![2.0, -2.0]);
    }
}

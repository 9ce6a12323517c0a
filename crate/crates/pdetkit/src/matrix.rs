//! Row-major dense matrix of 64-bit reals, the carrier type for the whole
//! crate, plus the signed-log determinant value type.
//!
//! `DenseMatrix` is immutable in spirit: kernels take inputs by reference and
//! return fresh matrices. The uncounted helpers here (products, norms,
//! transposes) serve the oracle and identity modules; the instrumented
//! kernels live in [`crate::dense`].

use crate::error::{Error, Result};

/// Rectangular dense matrix, row-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    /// Build from explicit row-major data, validating length and finiteness.
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::ShapeMismatch(format!(
                "data length {} != {} x {}",
                data.len(),
                rows,
                cols
            )));
        }
        for (k, v) in data.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    row: if cols > 0 { k / cols } else { 0 },
                    col: if cols > 0 { k % cols } else { 0 },
                });
            }
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    /// Internal constructor for trusted data (generator and kernel outputs).
    pub(crate) fn from_parts(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        DenseMatrix { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        DenseMatrix { rows, cols, data }
    }

    /// Build from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(Error::ShapeMismatch("ragged rows".into()));
            }
            data.extend_from_slice(row);
        }
        Self::new(r, c, data)
    }

    /// Column vector from a slice.
    pub fn column_vector(v: &[f64]) -> Self {
        DenseMatrix {
            rows: v.len(),
            cols: 1,
            data: v.to_vec(),
        }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub(crate) fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn col_to_vec(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.at(i, j)).collect()
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.data[j * self.rows + i] = self.data[i * self.cols + j];
            }
        }
        t
    }

    /// Plain (uncounted) matrix product.
    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(
            self.cols, other.rows,
            "matmul shape mismatch: {}x{} * {}x{}",
            self.rows, self.cols, other.rows, other.cols
        );
        let (m, k, n) = (self.rows, self.cols, other.cols);
        let mut out = DenseMatrix::zeros(m, n);
        for i in 0..m {
            for l in 0..k {
                let a = self.data[i * k + l];
                if a == 0.0 {
                    continue;
                }
                let brow = &other.data[l * n..(l + 1) * n];
                let orow = &mut out.data[i * n..(i + 1) * n];
                for j in 0..n {
                    orow[j] += a * brow[j];
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
            })
            .collect()
    }

    /// `self^T v`.
    pub fn transpose_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(self.rows, v.len());
        let mut out = vec![0.0; self.cols];
        for i in 0..self.rows {
            let row = self.row(i);
            let vi = v[i];
            for j in 0..self.cols {
                out[j] += row[j] * vi;
            }
        }
        out
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        DenseMatrix::from_parts(self.rows, self.cols, data)
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        DenseMatrix::from_parts(self.rows, self.cols, data)
    }

    pub fn scaled(&self, s: f64) -> DenseMatrix {
        DenseMatrix::from_parts(self.rows, self.cols, self.data.iter().map(|a| a * s).collect())
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Relative Frobenius asymmetry `||A - A^T||_F / ||A||_F` (0 for the zero
    /// matrix).
    pub fn asymmetry(&self) -> f64 {
        assert!(self.is_square());
        let mut num = 0.0;
        for i in 0..self.rows {
            for j in (i + 1)..self.cols {
                let d = self.at(i, j) - self.at(j, i);
                num += 2.0 * d * d;
            }
        }
        let den = self.frobenius_norm();
        if den == 0.0 {
            0.0
        } else {
            num.sqrt() / den
        }
    }

    pub fn is_symmetric_within(&self, tol: f64) -> bool {
        self.is_square() && self.asymmetry() <= tol
    }

    /// `(A + A^T) / 2`.
    pub fn symmetrized(&self) -> DenseMatrix {
        assert!(self.is_square());
        DenseMatrix::from_fn(self.rows, self.cols, |i, j| {
            0.5 * (self.at(i, j) + self.at(j, i))
        })
    }

    /// Horizontal concatenation `[self, other]`.
    pub fn hcat(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.rows, other.rows);
        DenseMatrix::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.at(i, j)
            } else {
                other.at(i, j - self.cols)
            }
        })
    }

    /// First `k` columns.
    pub fn leading_columns(&self, k: usize) -> DenseMatrix {
        assert!(k <= self.cols);
        DenseMatrix::from_fn(self.rows, k, |i, j| self.at(i, j))
    }

    /// Rows gathered by index: output row `i` is input row `perm[i]`.
    pub fn permuted_rows(&self, perm: &[usize]) -> DenseMatrix {
        assert_eq!(perm.len(), self.rows);
        let mut data = Vec::with_capacity(self.data.len());
        for &p in perm {
            data.extend_from_slice(self.row(p));
        }
        DenseMatrix::from_parts(self.rows, self.cols, data)
    }

}

/// Determinant as a sign and the log of the absolute value.
///
/// `sign == 0` pairs with `logabs == f64::NEG_INFINITY`; that sentinel is the
/// only representation of a zero determinant.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SignedLogDet {
    pub sign: i8,
    pub logabs: f64,
}

impl SignedLogDet {
    pub fn new(sign: i8, logabs: f64) -> Self {
        debug_assert!(sign == 0 || sign == 1 || sign == -1);
        if sign == 0 {
            Self::zero()
        } else {
            SignedLogDet { sign, logabs }
        }
    }

    /// Determinant 1.
    pub fn one() -> Self {
        SignedLogDet {
            sign: 1,
            logabs: 0.0,
        }
    }

    /// Determinant 0.
    pub fn zero() -> Self {
        SignedLogDet {
            sign: 0,
            logabs: f64::NEG_INFINITY,
        }
    }

    pub fn from_value(v: f64) -> Self {
        if v == 0.0 {
            Self::zero()
        } else {
            SignedLogDet {
                sign: if v > 0.0 { 1 } else { -1 },
                logabs: v.abs().ln(),
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    pub fn mul(self, other: Self) -> Self {
        if self.sign == 0 || other.sign == 0 {
            Self::zero()
        } else {
            SignedLogDet {
                sign: self.sign * other.sign,
                logabs: self.logabs + other.logabs,
            }
        }
    }

    pub fn div(self, other: Self) -> Self {
        assert!(other.sign != 0, "division by zero determinant");
        if self.sign == 0 {
            Self::zero()
        } else {
            SignedLogDet {
                sign: self.sign * other.sign,
                logabs: self.logabs - other.logabs,
            }
        }
    }

    pub fn recip(self) -> Self {
        assert!(self.sign != 0, "reciprocal of zero determinant");
        SignedLogDet {
            sign: self.sign,
            logabs: -self.logabs,
        }
    }

    /// Back to a plain value; underflows/overflows like `exp`.
    pub fn value(&self) -> f64 {
        self.sign as f64 * self.logabs.exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn new_rejects_bad_length_and_nan() {
        assert!(DenseMatrix::new(2, 2, vec![1.0, 2.0, 3.0]).is_err());
        assert!(DenseMatrix::new(2, 2, vec![1.0, 2.0, f64::NAN, 4.0]).is_err());
        assert!(DenseMatrix::new(2, 2, vec![1.0, 2.0, f64::INFINITY, 4.0]).is_err());
        assert!(DenseMatrix::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).is_ok());
    }

    #[test]
    fn matmul_against_hand_product() {
        let a = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[vec![5.0, 6.0], vec![7.0, 8.0]]).unwrap();
        let c = a.matmul(&b);
        assert_eq!(c.row(0), &[19.0, 22.0]);
        assert_eq!(c.row(1), &[43.0, 50.0]);
    }

    #[test]
    fn transpose_roundtrip() {
        let a = DenseMatrix::from_fn(3, 5, |i, j| (i * 7 + j) as f64);
        assert_eq!(a.transpose().transpose(), a);
    }

    #[test]
    fn permuted_rows_gathers() {
        let a = DenseMatrix::from_rows(&[vec![0.0], vec![1.0], vec![2.0]]).unwrap();
        let p = a.permuted_rows(&[2, 0, 1]);
        assert_eq!(p.data(), &[2.0, 0.0, 1.0]);
    }

    #[test]
    fn signed_log_det_arithmetic() {
        let a = SignedLogDet::from_value(-2.0);
        let b = SignedLogDet::from_value(3.0);
        let c = a.mul(b);
        assert_eq!(c.sign, -1);
        assert!((c.logabs - 6.0_f64.ln()).abs() < 1e-15);
        assert!(a.mul(SignedLogDet::zero()).is_zero());
        assert_eq!(SignedLogDet::zero().logabs, f64::NEG_INFINITY);
        let r = b.recip();
        assert!((r.value() - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn asymmetry_is_zero_for_symmetric() {
        let a = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![1.0, 3.0]]).unwrap();
        assert_eq!(a.asymmetry(), 0.0);
        let b = DenseMatrix::from_rows(&[vec![2.0, 1.0], vec![0.0, 3.0]]).unwrap();
        assert!(b.asymmetry() > 0.1);
    }
}

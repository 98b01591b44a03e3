use std::ops::{Index, IndexMut};

use super::complex::Complex;
use super::hiprec::HiPrec;

/// Dense row-major matrix. Dimensions are fixed at construction.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

pub type DenseMatrix = Matrix<HiPrec>;
pub type ComplexMatrix = Matrix<Complex>;

impl<T: Clone> Matrix<T> {
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    /// Builds from row-major data.
    ///
    /// # Panics
    /// If `data.len() != rows * cols`.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Self {
        assert_eq!(data.len(), rows * cols, "matrix data length");
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn col(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Matrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    /// The `rows x cols` block starting at `(r0, c0)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Matrix::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)].clone())
    }

    pub fn swap(&mut self, a: (usize, usize), b: (usize, usize)) {
        let ia = a.0 * self.cols + a.1;
        let ib = b.0 * self.cols + b.1;
        self.data.swap(ia, ib);
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize, prec: u32) -> Self {
        Matrix::from_fn(rows, cols, |_, _| HiPrec::zero(prec))
    }

    pub fn identity(n: usize, prec: u32) -> Self {
        Matrix::from_fn(n, n, |i, j| {
            if i == j {
                HiPrec::one(prec)
            } else {
                HiPrec::zero(prec)
            }
        })
    }

    pub fn from_f64(rows: usize, cols: usize, values: &[f64], prec: u32) -> Self {
        assert_eq!(values.len(), rows * cols, "matrix data length");
        Matrix::from_fn(rows, cols, |i, j| HiPrec::from_f64(values[i * cols + j], prec))
    }

    pub fn diag(values: &[HiPrec]) -> Self {
        let prec = values.first().map_or(64, HiPrec::prec);
        let n = values.len();
        Matrix::from_fn(n, n, |i, j| {
            if i == j {
                values[i].clone()
            } else {
                HiPrec::zero(prec)
            }
        })
    }

    pub fn prec(&self) -> u32 {
        self.data.iter().map(HiPrec::prec).max().unwrap_or(64)
    }

    /// # Panics
    /// On incompatible dimensions.
    pub fn matmul(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let prec = self.prec().max(rhs.prec());
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols, prec);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)].add_mul(a, &rhs[(k, j)]);
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[HiPrec]) -> Vec<HiPrec> {
        assert_eq!(self.cols, v.len(), "mul_vec dimension mismatch");
        let prec = self.prec();
        (0..self.rows)
            .map(|i| {
                let mut acc = HiPrec::zero(prec);
                for (a, x) in self.row(i).iter().zip(v) {
                    acc.add_mul(a, x);
                }
                acc
            })
            .collect()
    }

    pub fn sub(&self, rhs: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        Matrix::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] - &rhs[(i, j)])
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> HiPrec {
        let mut m = HiPrec::zero(self.prec());
        for v in &self.data {
            if v.cmp_abs(&m).is_gt() {
                m = v.abs();
            }
        }
        m
    }

    pub fn to_complex(&self) -> ComplexMatrix {
        Matrix::from_fn(self.rows, self.cols, |i, j| Complex::from_real(self[(i, j)].clone()))
    }

    pub fn to_f64(&self) -> Vec<f64> {
        self.data.iter().map(HiPrec::to_f64).collect()
    }
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize, prec: u32) -> Self {
        Matrix::from_fn(rows, cols, |_, _| Complex::zero(prec))
    }

    pub fn identity(n: usize, prec: u32) -> Self {
        Matrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex::one(prec)
            } else {
                Complex::zero(prec)
            }
        })
    }

    pub fn prec(&self) -> u32 {
        self.data.iter().map(Complex::prec).max().unwrap_or(64)
    }

    pub fn matmul(&self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "matmul dimension mismatch");
        let prec = self.prec().max(rhs.prec());
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols, prec);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)].add_mul(a, &rhs[(k, j)]);
                }
            }
        }
        out
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> HiPrec {
        let mut m = HiPrec::zero(self.prec());
        for v in &self.data {
            let a = v.abs();
            if a > m {
                m = a;
            }
        }
        m
    }
}

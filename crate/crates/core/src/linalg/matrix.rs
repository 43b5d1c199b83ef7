use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::{One, Zero};

use super::{cabs, LinalgError, Real};

/// Dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<R> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<R>>,
}

pub type ComplexMatrix = CMatrix<f64>;

impl<R: Real> CMatrix<R> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex::one();
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<R>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Checked constructor: shape must match and all entries must be finite.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex<R>>) -> Result<Self, LinalgError> {
        if rows * cols != data.len() {
            return Err(LinalgError::BadShape {
                rows,
                cols,
                got: data.len(),
            });
        }
        if let Some(k) = data.iter().position(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(LinalgError::NonFinite(k / cols.max(1), k % cols.max(1)));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<Complex<R>>]) -> Result<Self, LinalgError> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            if row.len() != c {
                return Err(LinalgError::BadShape {
                    rows: r,
                    cols: c,
                    got: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_vec(r, c, data)
    }

    pub fn diagonal(d: &[Complex<R>]) -> Self {
        let n = d.len();
        let mut m = Self::zeros(n, n);
        for (i, z) in d.iter().enumerate() {
            m.data[i * n + i] = *z;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[Complex<R>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex<R>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<Complex<R>> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    pub fn map(&self, f: impl Fn(Complex<R>) -> Complex<R>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| f(*z)).collect(),
        }
    }

    pub fn cast<S: Real>(&self) -> CMatrix<S> {
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|z| Complex::new(S::from_f64(z.re.to_f64()), S::from_f64(z.im.to_f64())))
                .collect(),
        }
    }

    pub fn to_f64(&self) -> CMatrix<f64> {
        self.cast()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn scale(&self, s: Complex<R>) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: R) -> Self {
        self.map(|z| Complex::new(z.re * s, z.im * s))
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self, LinalgError> {
        if self.cols != rhs.rows {
            return Err(LinalgError::DimensionMismatch {
                op: "mul",
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a.re == R::zero() && a.im == R::zero() {
                    continue;
                }
                let src = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                let dst = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (d, b) in dst.iter_mut().zip(src) {
                    *d = *d + a * *b;
                }
            }
        }
        Ok(out)
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self, LinalgError> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn try_sub(&self, rhs: &Self) -> Result<Self, LinalgError> {
        self.zip_with(rhs, "sub", |a, b| a - b)
    }

    fn zip_with(
        &self,
        rhs: &Self,
        op: &'static str,
        f: impl Fn(Complex<R>, Complex<R>) -> Complex<R>,
    ) -> Result<Self, LinalgError> {
        if self.shape() != rhs.shape() {
            return Err(LinalgError::DimensionMismatch {
                op,
                left: self.shape(),
                right: rhs.shape(),
            });
        }
        Ok(Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| f(*a, *b)).collect(),
        })
    }

    pub fn try_trace(&self) -> Result<Complex<R>, LinalgError> {
        if !self.is_square() {
            return Err(LinalgError::NonSquare {
                op: "trace",
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok((0..self.rows).fold(Complex::zero(), |acc, i| acc + self.data[i * self.cols + i]))
    }

    /// Trace of a square matrix; panics otherwise.
    pub fn tr(&self) -> Complex<R> {
        self.try_trace().expect("trace of non-square matrix")
    }

    /// `Tr(self * rhs)` without forming the product.
    pub fn trace_of_product(&self, rhs: &Self) -> Complex<R> {
        assert!(
            self.cols == rhs.rows && self.rows == rhs.cols,
            "trace_of_product shape mismatch"
        );
        let mut acc = Complex::zero();
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc = acc + self.data[i * self.cols + k] * rhs.data[k * rhs.cols + i];
            }
        }
        acc
    }

    pub fn frobenius_norm(&self) -> R {
        self.data.iter().fold(R::zero(), |acc, z| acc + z.norm_sqr()).sqrt()
    }

    pub fn max_abs_entry(&self) -> R {
        self.data.iter().fold(R::zero(), |acc, z| acc.max(cabs(*z)))
    }

    /// Largest singular value.
    pub fn spectral_norm(&self) -> Result<R, LinalgError> {
        Ok(R::singular_values(self)?.first().copied().unwrap_or_else(R::zero))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Copy of the leading `k x k` block.
    pub fn leading_block(&self, k: usize) -> Self {
        Self::from_fn(k, k, |i, j| self[(i, j)])
    }

    pub fn permute_columns(&self, perm: &[usize]) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(i, perm[j])])
    }

    pub fn permute_rows(&self, perm: &[usize]) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| self[(perm[i], j)])
    }
}

impl CMatrix<f64> {
    pub fn to_nalgebra(&self) -> DMatrix<Complex<f64>> {
        DMatrix::from_row_slice(self.rows, self.cols, &self.data)
    }

    pub fn from_nalgebra(m: &DMatrix<Complex<f64>>) -> Self {
        Self::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
    }
}

impl<R> Index<(usize, usize)> for CMatrix<R> {
    type Output = Complex<R>;
    fn index(&self, (i, j): (usize, usize)) -> &Complex<R> {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &self.data[i * self.cols + j]
    }
}

impl<R> IndexMut<(usize, usize)> for CMatrix<R> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<R> {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        &mut self.data[i * self.cols + j]
    }
}

// The operator forms panic on shape mismatch; use the try_ methods for
// fallible code paths.

impl<R: Real> Mul for &CMatrix<R> {
    type Output = CMatrix<R>;
    fn mul(self, rhs: Self) -> CMatrix<R> {
        self.try_mul(rhs).expect("matrix product shape mismatch")
    }
}

impl<R: Real> Add for &CMatrix<R> {
    type Output = CMatrix<R>;
    fn add(self, rhs: Self) -> CMatrix<R> {
        self.try_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl<R: Real> Sub for &CMatrix<R> {
    type Output = CMatrix<R>;
    fn sub(self, rhs: Self) -> CMatrix<R> {
        self.try_sub(rhs).expect("matrix difference shape mismatch")
    }
}

impl<R: Real> Neg for &CMatrix<R> {
    type Output = CMatrix<R>;
    fn neg(self) -> CMatrix<R> {
        self.map(|z| -z)
    }
}

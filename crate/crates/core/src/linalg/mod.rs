//! Dense complex linear algebra.
//!
//! Everything that needs only small matrices is generic over [`Real`], so the
//! same code runs in `f64` and in [`DoubleDouble`]. The large real Jacobians of
//! the tangent computations go through nalgebra (see [`dense`]).

mod dd;
pub mod dense;
mod jacobi;
mod lu;
mod matrix;

use std::fmt;
use std::ops::{AddAssign, DivAssign, MulAssign, Neg, SubAssign};

use nalgebra::DMatrix;
use num_complex::Complex;
use num_traits::Num;
use thiserror::Error;

pub use dd::DoubleDouble;
pub use lu::{determinant, inverse};
pub use matrix::{CMatrix, ComplexMatrix};

pub type Complex64 = Complex<f64>;

/// Convergence threshold passed to nalgebra's SVD (its own default); a
/// tighter value can stall with inaccurate singular vectors.
pub const SVD_EPS: f64 = 5.0 * f64::EPSILON;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("dimension mismatch: {op} of {left:?} and {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("{op} needs a square matrix, got {rows}x{cols}")]
    NonSquare { op: &'static str, rows: usize, cols: usize },
    #[error("tolerance must be positive and finite, got {0}")]
    InvalidTolerance(f64),
    #[error("zero vector")]
    ZeroVector,
    #[error("non-finite entry at ({0}, {1})")]
    NonFinite(usize, usize),
    #[error("entry count {got} does not match {rows}x{cols}")]
    BadShape { rows: usize, cols: usize, got: usize },
    #[error("singular value decomposition failed: {0}")]
    DecompositionFailed(String),
    #[error("matrix is singular")]
    Singular,
}

/// Scalar field used by the generic routines.
pub trait Real:
    Num
    + Copy
    + PartialOrd
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + fmt::Debug
    + fmt::Display
    + Send
    + Sync
    + 'static
{
    /// True for the software extended-precision type.
    const EXTENDED: bool = false;

    fn from_f64(x: f64) -> Self;
    fn to_f64(self) -> f64;
    fn sqrt(self) -> Self;
    fn abs(self) -> Self;
    fn sin_cos(self) -> (Self, Self);
    fn pi() -> Self;
    fn epsilon() -> Self;
    fn is_finite(self) -> bool;

    /// Singular values in descending order.
    fn singular_values(a: &CMatrix<Self>) -> Result<Vec<Self>, LinalgError> {
        jacobi::singular_values(a)
    }

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Real for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn sqrt(self) -> Self {
        f64::sqrt(self)
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn sin_cos(self) -> (Self, Self) {
        f64::sin_cos(self)
    }
    fn pi() -> Self {
        std::f64::consts::PI
    }
    fn epsilon() -> Self {
        f64::EPSILON
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }

    fn singular_values(a: &CMatrix<f64>) -> Result<Vec<f64>, LinalgError> {
        if a.rows() == 0 || a.cols() == 0 {
            return Ok(Vec::new());
        }
        let m = a.to_nalgebra();
        match m.clone().try_svd(false, false, SVD_EPS, 0) {
            Some(svd) => {
                let mut s: Vec<f64> = svd.singular_values.iter().copied().collect();
                s.sort_by(|x, y| y.total_cmp(x));
                Ok(s)
            }
            // nalgebra gives up on some pathological inputs; Jacobi always converges
            None => jacobi::singular_values(a),
        }
    }
}

impl Real for DoubleDouble {
    const EXTENDED: bool = true;

    fn from_f64(x: f64) -> Self {
        DoubleDouble::from_f64(x)
    }
    fn to_f64(self) -> f64 {
        DoubleDouble::to_f64(self)
    }
    fn sqrt(self) -> Self {
        DoubleDouble::sqrt(self)
    }
    fn abs(self) -> Self {
        DoubleDouble::abs(self)
    }
    fn sin_cos(self) -> (Self, Self) {
        DoubleDouble::sin_cos(self)
    }
    fn pi() -> Self {
        DoubleDouble::PI
    }
    fn epsilon() -> Self {
        DoubleDouble::EPSILON
    }
    fn is_finite(self) -> bool {
        DoubleDouble::is_finite(self)
    }
}

/// `|z|` for a generic complex scalar.
pub fn cabs<R: Real>(z: Complex<R>) -> R {
    z.norm_sqr().sqrt()
}

/// `exp(i·theta)`.
pub fn cis<R: Real>(theta: R) -> Complex<R> {
    let (s, c) = theta.sin_cos();
    Complex::new(c, s)
}

pub fn complex_from_f64<R: Real>(z: Complex64) -> Complex<R> {
    Complex::new(R::from_f64(z.re), R::from_f64(z.im))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RankReport<R = f64> {
    pub singular_values: Vec<R>,
    pub rank: usize,
    /// Absolute threshold: `tol * sigma_max`.
    pub tolerance_used: R,
    /// `sigma_rank / sigma_(rank+1)`; infinite when no singular value lies
    /// below the threshold (or the matrix is zero).
    pub gap_ratio: f64,
}

impl<R: Real> RankReport<R> {
    pub fn from_singular_values(mut singular_values: Vec<R>, tol: f64) -> Result<Self, LinalgError> {
        check_tol(tol)?;
        singular_values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
        let smax = singular_values.first().copied().unwrap_or_else(R::zero);
        let tolerance_used = R::from_f64(tol) * smax;
        let rank = singular_values.iter().filter(|s| **s > tolerance_used).count();
        let gap_ratio = gap_at(&singular_values, rank);
        Ok(Self {
            singular_values,
            rank,
            tolerance_used,
            gap_ratio,
        })
    }
}

pub(crate) fn gap_at<R: Real>(desc: &[R], rank: usize) -> f64 {
    if rank == 0 || rank >= desc.len() {
        return f64::INFINITY;
    }
    let below = desc[rank].to_f64();
    if below == 0.0 {
        f64::INFINITY
    } else {
        desc[rank - 1].to_f64() / below
    }
}

pub(crate) fn check_tol(tol: f64) -> Result<(), LinalgError> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(LinalgError::InvalidTolerance(tol))
    }
}

pub fn mul<R: Real>(a: &CMatrix<R>, b: &CMatrix<R>) -> Result<CMatrix<R>, LinalgError> {
    a.try_mul(b)
}

pub fn trace<R: Real>(a: &CMatrix<R>) -> Result<Complex<R>, LinalgError> {
    a.try_trace()
}

pub fn adjoint<R: Real>(a: &CMatrix<R>) -> CMatrix<R> {
    a.adjoint()
}

/// Rank relative to the largest singular value: counts `sigma > tol * sigma_max`.
pub fn numerical_rank<R: Real>(a: &CMatrix<R>, tol: f64) -> Result<RankReport<R>, LinalgError> {
    check_tol(tol)?;
    RankReport::from_singular_values(R::singular_values(a)?, tol)
}

/// Orthonormal basis of the numerical kernel of `a`.
pub fn nullspace(a: &ComplexMatrix, tol: f64) -> Result<Vec<Vec<Complex64>>, LinalgError> {
    check_tol(tol)?;
    let (r, c) = (a.rows(), a.cols());
    if c == 0 {
        return Ok(Vec::new());
    }
    // pad wide matrices so the SVD returns all c right singular vectors
    let m = if r < c {
        let mut padded = DMatrix::<Complex64>::zeros(c, c);
        padded.view_mut((0, 0), (r, c)).copy_from(&a.to_nalgebra());
        padded
    } else {
        a.to_nalgebra()
    };
    let svd = m
        .try_svd(false, true, SVD_EPS, 0)
        .ok_or_else(|| LinalgError::DecompositionFailed("complex svd did not converge".into()))?;
    let v_t = svd
        .v_t
        .ok_or_else(|| LinalgError::DecompositionFailed("missing right singular vectors".into()))?;
    let s = &svd.singular_values;
    let smax = s.iter().copied().fold(0.0, f64::max);
    let threshold = tol * smax;
    let mut out = Vec::new();
    for (k, &sv) in s.iter().enumerate() {
        if sv <= threshold {
            // rows of v_t are conjugated right singular vectors
            out.push(v_t.row(k).iter().map(|z| z.conj()).collect());
        }
    }
    Ok(out)
}

/// `v v^H / (v^H v)`.
pub fn rank1_projector<R: Real>(v: &[Complex<R>]) -> Result<CMatrix<R>, LinalgError> {
    let norm2 = v.iter().fold(R::zero(), |acc, z| acc + z.norm_sqr());
    if norm2 == R::zero() {
        return Err(LinalgError::ZeroVector);
    }
    if !norm2.is_finite() {
        return Err(LinalgError::NonFinite(0, 0));
    }
    let n = v.len();
    Ok(CMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj() / norm2))
}

/// Rank-1 projector `u w^T / (w^T u)` (not necessarily Hermitian).
pub fn oblique_projector<R: Real>(u: &[Complex<R>], w: &[Complex<R>]) -> Result<CMatrix<R>, LinalgError> {
    if u.len() != w.len() {
        return Err(LinalgError::DimensionMismatch {
            op: "oblique_projector",
            left: (u.len(), 1),
            right: (w.len(), 1),
        });
    }
    let pairing = u
        .iter()
        .zip(w)
        .fold(Complex::new(R::zero(), R::zero()), |acc, (a, b)| acc + *a * *b);
    if pairing.norm_sqr() == R::zero() {
        return Err(LinalgError::ZeroVector);
    }
    let n = u.len();
    Ok(CMatrix::from_fn(n, n, |i, j| u[i] * w[j] / pairing))
}

//! One-sided (Hestenes) Jacobi SVD for complex matrices.
//!
//! Slow but precision-agnostic: it is the singular value routine for
//! [`DoubleDouble`](super::DoubleDouble) and the fallback for `f64`.

use num_complex::Complex;

use super::{CMatrix, LinalgError, Real};

const MAX_SWEEPS: usize = 80;

pub(crate) fn singular_values<R: Real>(a: &CMatrix<R>) -> Result<Vec<R>, LinalgError> {
    if a.rows() == 0 || a.cols() == 0 {
        return Ok(Vec::new());
    }
    let work = if a.rows() < a.cols() { a.adjoint() } else { a.clone() };
    let (m, n) = work.shape();
    // column-major copy so rotations touch contiguous memory
    let mut cols: Vec<Vec<Complex<R>>> = (0..n).map(|j| work.column(j)).collect();
    let eps = R::epsilon();
    let two = R::from_f64(2.0);

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for i in 0..n {
            for j in (i + 1)..n {
                let alpha = norm2(&cols[i]);
                let beta = norm2(&cols[j]);
                let gamma = cols[i]
                    .iter()
                    .zip(&cols[j])
                    .fold(Complex::new(R::zero(), R::zero()), |acc, (x, y)| acc + x.conj() * *y);
                let g = gamma.norm_sqr().sqrt();
                if g == R::zero() || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                // rotate col j by the phase of gamma so the coupling is real
                let phase = Complex::new(gamma.re / g, -gamma.im / g);
                let zeta = (beta - alpha) / (two * g);
                let t = {
                    let denom = zeta.abs() + (R::one() + zeta * zeta).sqrt();
                    if zeta < R::zero() {
                        -R::one() / denom
                    } else {
                        R::one() / denom
                    }
                };
                let c = R::one() / (R::one() + t * t).sqrt();
                let s = c * t;
                let (left, right) = cols.split_at_mut(j);
                for (a, b) in left[i].iter_mut().zip(right[0].iter_mut()).take(m) {
                    let x = *a;
                    let y = *b * phase;
                    *a = Complex::new(c * x.re - s * y.re, c * x.im - s * y.im);
                    *b = Complex::new(s * x.re + c * y.re, s * x.im + c * y.im);
                }
            }
        }
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(LinalgError::DecompositionFailed(format!(
            "jacobi svd did not converge in {MAX_SWEEPS} sweeps"
        )));
    }
    let mut s: Vec<R> = cols.iter().map(|c| norm2(c).sqrt()).collect();
    if s.iter().any(|x| !x.is_finite()) {
        return Err(LinalgError::DecompositionFailed("non-finite singular value".into()));
    }
    s.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(s)
}

fn norm2<R: Real>(v: &[Complex<R>]) -> R {
    v.iter().fold(R::zero(), |acc, z| acc + z.norm_sqr())
}

use num_complex::Complex;
use num_traits::{One, Zero};

use super::{CMatrix, LinalgError, Real};

struct Lu<R> {
    lu: CMatrix<R>,
    perm: Vec<usize>,
    sign_flips: usize,
}

fn factor<R: Real>(a: &CMatrix<R>, op: &'static str) -> Result<Lu<R>, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NonSquare {
            op,
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    let mut lu = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut sign_flips = 0;
    for k in 0..n {
        let pivot = (k..n)
            .max_by(|&x, &y| {
                lu[(x, k)]
                    .norm_sqr()
                    .partial_cmp(&lu[(y, k)].norm_sqr())
                    .unwrap_or(std::cmp::Ordering::Equal)
            })
            .unwrap_or(k);
        if lu[(pivot, k)].norm_sqr() == R::zero() {
            continue;
        }
        if pivot != k {
            for j in 0..n {
                let t = lu[(k, j)];
                lu[(k, j)] = lu[(pivot, j)];
                lu[(pivot, j)] = t;
            }
            perm.swap(k, pivot);
            sign_flips += 1;
        }
        let d = lu[(k, k)];
        for i in (k + 1)..n {
            let f = lu[(i, k)] / d;
            lu[(i, k)] = f;
            for j in (k + 1)..n {
                let t = lu[(k, j)];
                lu[(i, j)] = lu[(i, j)] - f * t;
            }
        }
    }
    Ok(Lu { lu, perm, sign_flips })
}

pub fn determinant<R: Real>(a: &CMatrix<R>) -> Result<Complex<R>, LinalgError> {
    let f = factor(a, "determinant")?;
    let mut d = Complex::one();
    for k in 0..a.rows() {
        d = d * f.lu[(k, k)];
    }
    if f.sign_flips % 2 == 1 {
        d = -d;
    }
    Ok(d)
}

pub fn inverse<R: Real>(a: &CMatrix<R>) -> Result<CMatrix<R>, LinalgError> {
    let f = factor(a, "inverse")?;
    let n = a.rows();
    if (0..n).any(|k| f.lu[(k, k)].norm_sqr() == R::zero()) {
        return Err(LinalgError::Singular);
    }
    let mut inv = CMatrix::zeros(n, n);
    for col in 0..n {
        // solve L U x = P e_col
        let mut x: Vec<Complex<R>> = (0..n)
            .map(|i| {
                if f.perm[i] == col {
                    Complex::one()
                } else {
                    Complex::zero()
                }
            })
            .collect();
        for i in 0..n {
            for k in 0..i {
                let t = f.lu[(i, k)] * x[k];
                x[i] = x[i] - t;
            }
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let t = f.lu[(i, k)] * x[k];
                x[i] = x[i] - t;
            }
            x[i] = x[i] / f.lu[(i, i)];
        }
        for i in 0..n {
            inv[(i, col)] = x[i];
        }
    }
    Ok(inv)
}

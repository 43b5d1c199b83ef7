//! Helpers on nalgebra matrices for the large real Jacobians and the small
//! least-squares solves of the Newton iterations.

use nalgebra::{DMatrix, DVector};

use super::{Complex64, ComplexMatrix, LinalgError, SVD_EPS};

/// Real form of a complex-linear map: `[[Re J, -Im J], [Im J, Re J]]`.
///
/// Columns are ordered as (real parts of all variables, imaginary parts);
/// rows as (real parts of all equations, imaginary parts).
pub fn realify(j: &ComplexMatrix) -> DMatrix<f64> {
    let (r, c) = j.shape();
    let mut out = DMatrix::zeros(2 * r, 2 * c);
    for a in 0..r {
        for b in 0..c {
            let z = j[(a, b)];
            out[(a, b)] = z.re;
            out[(a, b + c)] = -z.im;
            out[(a + r, b)] = z.im;
            out[(a + r, b + c)] = z.re;
        }
    }
    out
}

/// Singular values (descending) and optionally the matching right singular
/// vectors as columns of a square `cols x cols` matrix.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub singular_values: Vec<f64>,
    pub v: Option<DMatrix<f64>>,
}

impl Spectrum {
    /// Columns of `v` whose singular value is at most `threshold`, plus the
    /// structural kernel directions when there are fewer rows than columns.
    pub fn kernel(&self, threshold: f64) -> Option<DMatrix<f64>> {
        let v = self.v.as_ref()?;
        let keep: Vec<usize> = (0..v.ncols())
            .filter(|&k| self.singular_values.get(k).map_or(true, |s| *s <= threshold))
            .collect();
        Some(DMatrix::from_fn(v.nrows(), keep.len(), |i, k| v[(i, keep[k])]))
    }
}

/// SVD of a tall real matrix. Exactly-zero rows are dropped and, when the
/// matrix is still tall, the SVD is taken of the R factor of a QR
/// decomposition, which has the same singular values and right vectors.
pub fn spectrum(a: &DMatrix<f64>, want_v: bool) -> Result<Spectrum, LinalgError> {
    let n = a.ncols();
    if n == 0 {
        return Ok(Spectrum {
            singular_values: Vec::new(),
            v: want_v.then(|| DMatrix::zeros(0, 0)),
        });
    }
    if a.iter().any(|x| !x.is_finite()) {
        return Err(LinalgError::DecompositionFailed("non-finite matrix entry".into()));
    }
    let live: Vec<usize> = (0..a.nrows()).filter(|&i| a.row(i).iter().any(|x| *x != 0.0)).collect();
    let pruned = a.select_rows(live.iter());
    let square = if pruned.nrows() > n {
        pruned.qr().r()
    } else {
        let mut padded = DMatrix::zeros(n, n);
        padded.view_mut((0, 0), (pruned.nrows(), n)).copy_from(&pruned);
        padded
    };
    let svd = square
        .try_svd(false, want_v, SVD_EPS, 0)
        .ok_or_else(|| LinalgError::DecompositionFailed("real svd did not converge".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let singular_values: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let v = if want_v {
        let v_t = svd
            .v_t
            .ok_or_else(|| LinalgError::DecompositionFailed("missing right singular vectors".into()))?;
        Some(DMatrix::from_fn(n, order.len(), |i, k| v_t[(order[k], i)]))
    } else {
        None
    };
    Ok(Spectrum { singular_values, v })
}

/// Spectrum of `realify(j)` for a tall complex `j`.
///
/// The complex QR factor is taken first: `realify(Q)` is orthogonal, so
/// `realify(j)` and `realify(R)` share singular values and right vectors.
pub fn realified_spectrum(j: &ComplexMatrix, want_v: bool) -> Result<Spectrum, LinalgError> {
    let c = j.cols();
    let live: Vec<usize> = (0..j.rows())
        .filter(|&i| j.row(i).iter().any(|z| z.re != 0.0 || z.im != 0.0))
        .collect();
    if live.len() <= c {
        return spectrum(&realify(j), want_v);
    }
    let pruned = DMatrix::from_fn(live.len(), c, |i, k| j[(live[i], k)]);
    let r = pruned.qr().r();
    spectrum(&realify(&ComplexMatrix::from_nalgebra(&r)), want_v)
}

/// Least-squares step `pinv(a) * b`, dropping singular values below
/// `rcond * sigma_max`.
pub fn pinv_solve(a: &DMatrix<f64>, b: &DVector<f64>, rcond: f64) -> Result<DVector<f64>, LinalgError> {
    let svd = a
        .clone()
        .try_svd(true, true, SVD_EPS, 0)
        .ok_or_else(|| LinalgError::DecompositionFailed("svd in pseudo-inverse".into()))?;
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    svd.solve(b, rcond * smax)
        .map_err(|e| LinalgError::DecompositionFailed(e.to_string()))
}

/// Like [`pinv_solve`], but also drops the trailing singular values below
/// `floor * sigma_max` that sit under a ratio gap of at least `min_gap`.
///
/// Near a smooth solution set the kernel singular values grow with the
/// distance to it and can cross `rcond * sigma_max`; inverting them turns a
/// normal correction into a long tangential slide.
pub fn pinv_solve_gapped(
    a: &DMatrix<f64>,
    b: &DVector<f64>,
    rcond: f64,
    floor: f64,
    min_gap: f64,
) -> Result<DVector<f64>, LinalgError> {
    let svd = a
        .clone()
        .try_svd(true, true, SVD_EPS, 0)
        .ok_or_else(|| LinalgError::DecompositionFailed("svd in pseudo-inverse".into()))?;
    let (u, v_t) = svd
        .u
        .as_ref()
        .zip(svd.v_t.as_ref())
        .ok_or_else(|| LinalgError::DecompositionFailed("missing singular vectors".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&x, &y| svd.singular_values[y].total_cmp(&svd.singular_values[x]));
    let s: Vec<f64> = order.iter().map(|&k| svd.singular_values[k]).collect();
    let smax = s.first().copied().unwrap_or(0.0);
    let mut keep = s.iter().take_while(|x| **x > rcond * smax).count();
    if let Some(cut) = (1..keep)
        .filter(|&k| s[k] < floor * smax && s[k - 1] >= min_gap * s[k])
        .min()
    {
        keep = cut;
    }
    let mut x = DVector::zeros(a.ncols());
    for &k in &order[..keep] {
        let coeff = u.column(k).dot(b) / svd.singular_values[k];
        x += v_t.row(k).transpose() * coeff;
    }
    Ok(x)
}

pub fn pinv_solve_complex(
    a: &DMatrix<Complex64>,
    b: &DVector<Complex64>,
    rcond: f64,
) -> Result<DVector<Complex64>, LinalgError> {
    let svd = a
        .clone()
        .try_svd(true, true, SVD_EPS, 0)
        .ok_or_else(|| LinalgError::DecompositionFailed("svd in pseudo-inverse".into()))?;
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    svd.solve(b, rcond * smax)
        .map_err(|e| LinalgError::DecompositionFailed(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex;

    #[test]
    fn realify_doubles_singular_values() {
        let j = ComplexMatrix::from_fn(4, 3, |i, k| Complex::new((i + k) as f64, i as f64 - 2.0 * k as f64));
        let sc = crate::linalg::numerical_rank(&j, 1e-12).unwrap();
        let sr = spectrum(&realify(&j), false).unwrap();
        assert_eq!(sr.singular_values.len(), 6);
        for k in 0..3 {
            assert!((sr.singular_values[2 * k] - sc.singular_values[k]).abs() < 1e-12);
            assert!((sr.singular_values[2 * k + 1] - sc.singular_values[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn realified_spectrum_matches_direct() {
        let j = ComplexMatrix::from_fn(40, 5, |i, k| {
            let t = (i * 5 + k) as f64;
            let z = Complex::new((0.7 * t).sin(), (1.3 * t).cos());
            if k == 4 {
                Complex::new(0.0, 0.0)
            } else {
                z
            }
        });
        let a = spectrum(&realify(&j), false).unwrap();
        let b = realified_spectrum(&j, true).unwrap();
        for (x, y) in a.singular_values.iter().zip(&b.singular_values) {
            assert!((x - y).abs() < 1e-12);
        }
        let k = b.kernel(1e-10 * b.singular_values[0]).unwrap();
        assert_eq!(k.ncols(), 2);
        assert!((realify(&j) * k).norm() < 1e-10);
    }

    #[test]
    fn tall_matrix_kernel_via_qr() {
        // 200 x 4 with kernel spanned by (1, -1, 0, 0)
        let a = DMatrix::from_fn(200, 4, |i, k| {
            let t = i as f64 * 0.1;
            match k {
                0 | 1 => t.sin(),
                2 => t.cos(),
                _ => {
                    if i % 7 == 0 {
                        0.0
                    } else {
                        t * t
                    }
                }
            }
        });
        let s = spectrum(&a, true).unwrap();
        let smax = s.singular_values[0];
        let k = s.kernel(1e-10 * smax).unwrap();
        assert_eq!(k.ncols(), 1);
        assert!((k[(0, 0)] + k[(1, 0)]).abs() < 1e-12);
        assert!((a * k).norm() < 1e-10 * smax);
    }

    #[test]
    fn wide_matrix_has_structural_kernel() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 0.0, 0.0]);
        let s = spectrum(&a, true).unwrap();
        assert_eq!(s.kernel(1e-12).unwrap().ncols(), 2);
    }

    #[test]
    fn pseudo_inverse_drops_null_directions() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1e-14]);
        let x = pinv_solve(&a, &DVector::from_vec(vec![2.0, 1.0]), 1e-10).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-15 && x[1] == 0.0);
    }

    #[test]
    fn gapped_pseudo_inverse_drops_small_cluster() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![1.0, 0.1, 1e-9, 1e-12]));
        let b = DVector::from_vec(vec![1.0, 1.0, 1.0, 1.0]);
        let plain = pinv_solve(&a, &b, 1e-10).unwrap();
        assert!((plain[2] - 1e9).abs() < 1.0);
        let x = pinv_solve_gapped(&a, &b, 1e-10, 1e-4, 1e3).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 10.0).abs() < 1e-13);
        assert!(x[2] == 0.0 && x[3] == 0.0);
        // no qualifying gap: same as the plain cut
        let y = pinv_solve_gapped(&a, &b, 1e-10, 1e-10, 1e3).unwrap();
        assert!((y - plain).norm() < 1e-6);
    }
}

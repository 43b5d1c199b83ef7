//! Shared helpers: exact oracle arithmetic and seeded random points.
#![allow(dead_code)]

mod exact;

#[allow(unused_imports)]
pub use exact::*;

use std::sync::OnceLock;

use nalgebra::DVector;
use num_complex::Complex64;
use orthopair_core::config::{standard_pair, to_hadamard, HadamardPoint};
use orthopair_core::continuation::{sample_family, tangent_frame, ContinuationOptions};
use orthopair_core::linalg::ComplexMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// The point obtained from the standard pair with columns 3 and 4 exchanged.
pub fn x0() -> HadamardPoint {
    to_hadamard(&standard_pair::<f64>(6, true).unwrap(), 1e-10).unwrap()
}

/// 100 family points reached by a seeded random walk from `x0`, spread out
/// with a step scale of 5e-2.
pub fn family_points() -> &'static [HadamardPoint] {
    static POINTS: OnceLock<Vec<HadamardPoint>> = OnceLock::new();
    POINTS.get_or_init(|| {
        sample_family(&x0(), 100, 2024, 5e-2, &ContinuationOptions::default())
            .unwrap()
            .points
    })
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_matrix(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Haar-like unitary from the QR factor of a Gaussian matrix.
pub fn random_unitary(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
    let q = gaussian_matrix(rng, n).to_nalgebra().qr().q();
    ComplexMatrix::from_nalgebra(&q)
}

/// `U diag(s) V` with singular values spread log-uniformly over `[1, cond]`.
pub fn random_invertible(rng: &mut ChaCha8Rng, n: usize, cond: f64) -> ComplexMatrix {
    let u = random_unitary(rng, n);
    let v = random_unitary(rng, n);
    let s: Vec<Complex64> = (0..n)
        .map(|k| {
            let t = if k == 0 {
                0.0
            } else if k == n - 1 {
                1.0
            } else {
                rng.random::<f64>()
            };
            Complex64::new(cond.powf(t), 0.0)
        })
        .collect();
    &(&u * &ComplexMatrix::diagonal(&s)) * &v
}

pub fn random_permutation(rng: &mut ChaCha8Rng, n: usize) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut p: Vec<usize> = (0..n).collect();
    p.shuffle(rng);
    p
}

/// Unit vector in the tangent space of the family at `h`, in phase coordinates.
pub fn random_tangent(rng: &mut ChaCha8Rng, h: &HadamardPoint) -> DVector<f64> {
    let frame = tangent_frame(h, 1e-9, None).unwrap();
    let c = DVector::from_fn(frame.ncols(), |_, _| rng.sample::<f64, _>(StandardNormal));
    (frame * c).normalize()
}

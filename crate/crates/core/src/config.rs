//! Projector configurations, the standard (Fourier) pair, and conversion to
//! and from dephased complex Hadamard coordinates.
//!
//! Hadamard matrices use the unitary normalization: entries have modulus
//! `1/sqrt(n)`. Multiply by `sqrt(n)` to get the unimodular convention.

use std::f64::consts::PI;

use num_complex::Complex;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::linalg::{cabs, cis, inverse, CMatrix, Complex64, ComplexMatrix, LinalgError, Real};

/// Default tolerance for configuration validity checks.
pub const DEFAULT_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("dimension must be at least {min}, got {got}")]
    InvalidDimension { min: usize, got: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("reconstructed matrix is not unitary (residual {residual:e})")]
    NonUnitary { residual: f64 },
    #[error("projectors are not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },
    #[error("transition matrix is not unbiased (residual {residual:e})")]
    NotUnbiased { residual: f64 },
    #[error("invalid projector system: {name} residual {residual:e}")]
    InvalidSystem { name: String, residual: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// `n` rank-1 projectors in dimension `n`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectorSystem<R = f64> {
    pub n: usize,
    pub projectors: Vec<CMatrix<R>>,
}

impl<R: Real> ProjectorSystem<R> {
    /// Shape check only; see [`ProjectorSystem::validate`] for the relations.
    pub fn new(projectors: Vec<CMatrix<R>>) -> Result<Self, ConfigError> {
        let n = projectors.len();
        if n == 0 {
            return Err(ConfigError::InvalidDimension { min: 1, got: 0 });
        }
        for (k, p) in projectors.iter().enumerate() {
            if p.shape() != (n, n) {
                return Err(ConfigError::Shape(format!(
                    "projector {} is {}x{}, expected {n}x{n}",
                    k + 1,
                    p.rows(),
                    p.cols()
                )));
            }
        }
        Ok(Self { n, projectors })
    }

    /// Coordinate projectors `E_ii`.
    pub fn coordinate(n: usize) -> Self {
        let projectors = (0..n)
            .map(|i| {
                let mut e = CMatrix::zeros(n, n);
                e[(i, i)] = Complex::one();
                e
            })
            .collect();
        Self { n, projectors }
    }

    /// Worst of idempotency, mutual orthogonality and `sum - I`, with the
    /// name of the offending relation.
    pub fn residual(&self, label: &str) -> Result<(R, String), ConfigError> {
        let mut worst = (R::zero(), String::from("none"));
        let mut record = |value: R, name: String| {
            if value > worst.0 || worst.1 == "none" && value >= worst.0 {
                worst = (value, name);
            }
        };
        for (i, p) in self.projectors.iter().enumerate() {
            record(
                (&(p * p) - p).spectral_norm()?,
                format!("{label}{}^2 - {label}{}", i + 1, i + 1),
            );
        }
        for (i, a) in self.projectors.iter().enumerate() {
            for (j, b) in self.projectors.iter().enumerate() {
                if i != j {
                    record((a * b).spectral_norm()?, format!("{label}{} {label}{}", i + 1, j + 1));
                }
            }
        }
        record(
            (&self.sum() - &CMatrix::identity(self.n)).spectral_norm()?,
            format!("sum {label} - 1"),
        );
        Ok(worst)
    }

    pub fn validate(&self, tol: f64) -> Result<(), ConfigError> {
        let (r, name) = self.residual("x")?;
        if r.to_f64() <= tol {
            Ok(())
        } else {
            Err(ConfigError::InvalidSystem {
                name,
                residual: r.to_f64(),
            })
        }
    }

    pub fn sum(&self) -> CMatrix<R> {
        self.partial_sum(&(0..self.n).collect::<Vec<_>>())
    }

    /// `sum_{i in subset} x_i` (0-based indices).
    pub fn partial_sum(&self, subset: &[usize]) -> CMatrix<R> {
        subset
            .iter()
            .fold(CMatrix::zeros(self.n, self.n), |acc, &i| &acc + &self.projectors[i])
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            n: self.n,
            projectors: perm.iter().map(|&k| self.projectors[k].clone()).collect(),
        }
    }

    pub fn cast<S: Real>(&self) -> ProjectorSystem<S> {
        ProjectorSystem {
            n: self.n,
            projectors: self.projectors.iter().map(CMatrix::cast).collect(),
        }
    }
}

/// Two projector systems; a point of the representation variety of the
/// quotient by the two sum relations.
#[derive(Clone, Debug, PartialEq)]
pub struct PairConfiguration<R = f64> {
    pub n: usize,
    pub p_system: ProjectorSystem<R>,
    pub q_system: ProjectorSystem<R>,
    /// Worst violation over all defining relations, cached at construction.
    pub residual: R,
}

/// Per-category residuals of a configuration (spectral norms, except the
/// unbiasedness entry which is `max |Tr p_i q_j - 1/n|`).
#[derive(Clone, Debug, PartialEq)]
pub struct ResidualBreakdown<R = f64> {
    pub p_system: R,
    pub p_worst: String,
    pub q_system: R,
    pub q_worst: String,
    pub unbiasedness: R,
    pub unbiasedness_worst: String,
}

impl<R: Real> ResidualBreakdown<R> {
    pub fn max(&self) -> R {
        self.p_system.max(self.q_system).max(self.unbiasedness)
    }

    /// Name of the relation with the largest violation.
    pub fn worst(&self) -> &str {
        let m = self.max();
        if self.unbiasedness == m {
            &self.unbiasedness_worst
        } else if self.p_system == m {
            &self.p_worst
        } else {
            &self.q_worst
        }
    }
}

impl<R: Real> PairConfiguration<R> {
    pub fn new(p_system: ProjectorSystem<R>, q_system: ProjectorSystem<R>) -> Result<Self, ConfigError> {
        if p_system.n != q_system.n {
            return Err(ConfigError::Shape(format!(
                "p-system has dimension {}, q-system {}",
                p_system.n, q_system.n
            )));
        }
        let n = p_system.n;
        let mut c = Self {
            n,
            p_system,
            q_system,
            residual: R::zero(),
        };
        c.residual = unbiasedness_residual(&c)?;
        Ok(c)
    }

    pub fn from_matrices(p: Vec<CMatrix<R>>, q: Vec<CMatrix<R>>) -> Result<Self, ConfigError> {
        Self::new(ProjectorSystem::new(p)?, ProjectorSystem::new(q)?)
    }

    pub fn p(&self, i: usize) -> &CMatrix<R> {
        &self.p_system.projectors[i]
    }

    pub fn q(&self, j: usize) -> &CMatrix<R> {
        &self.q_system.projectors[j]
    }

    /// `p_1, ..., p_n, q_1, ..., q_n`.
    pub fn matrices(&self) -> Vec<CMatrix<R>> {
        self.p_system
            .projectors
            .iter()
            .chain(&self.q_system.projectors)
            .cloned()
            .collect()
    }

    /// `Tr(p_i q_j)` for all pairs, row index `i`.
    pub fn overlap_traces(&self) -> Vec<Vec<Complex<R>>> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.p(i).trace_of_product(self.q(j))).collect())
            .collect()
    }

    pub fn residual_breakdown(&self) -> Result<ResidualBreakdown<R>, ConfigError> {
        let (p_res, p_worst) = self.p_system.residual("p")?;
        let (q_res, q_worst) = self.q_system.residual("q")?;
        let target = R::one() / R::from_f64(self.n as f64);
        let mut unb = (R::zero(), String::from("none"));
        for (i, row) in self.overlap_traces().iter().enumerate() {
            for (j, t) in row.iter().enumerate() {
                let d = cabs(*t - Complex::new(target, R::zero()));
                if d > unb.0 || unb.1 == "none" {
                    unb = (d, format!("Tr p{} q{} - 1/n", i + 1, j + 1));
                }
            }
        }
        Ok(ResidualBreakdown {
            p_system: p_res,
            p_worst,
            q_system: q_res,
            q_worst,
            unbiasedness: unb.0,
            unbiasedness_worst: unb.1,
        })
    }

    /// Independent relabelings of the two systems: new `p_k` is old `p_{p_perm[k]}`.
    pub fn permuted(&self, p_perm: &[usize], q_perm: &[usize]) -> Self {
        Self {
            n: self.n,
            p_system: self.p_system.permuted(p_perm),
            q_system: self.q_system.permuted(q_perm),
            residual: self.residual,
        }
    }

    /// Simultaneous conjugation `x -> h x h^{-1}` of every projector.
    pub fn conjugated(&self, h: &CMatrix<R>) -> Result<Self, ConfigError> {
        let hinv = inverse(h)?;
        let conj = |s: &ProjectorSystem<R>| ProjectorSystem {
            n: s.n,
            projectors: s.projectors.iter().map(|x| &(h * x) * &hinv).collect(),
        };
        Self::new(conj(&self.p_system), conj(&self.q_system))
    }

    pub fn cast<S: Real>(&self) -> Result<PairConfiguration<S>, ConfigError> {
        PairConfiguration::new(self.p_system.cast(), self.q_system.cast())
    }

    /// Largest `|x - x^H|` entry over all projectors.
    pub fn hermiticity_residual(&self) -> R {
        self.p_system
            .projectors
            .iter()
            .chain(&self.q_system.projectors)
            .map(|x| (x - &x.adjoint()).max_abs_entry())
            .fold(R::zero(), R::max)
    }
}

/// Worst violation among idempotency, orthogonality and sum relations of both
/// systems and `|Tr p_i q_j - 1/n|`.
pub fn unbiasedness_residual<R: Real>(c: &PairConfiguration<R>) -> Result<R, ConfigError> {
    if c.p_system.n != c.q_system.n || c.p_system.n != c.n {
        return Err(ConfigError::Shape(format!(
            "systems of dimension {} and {} in a pair of dimension {}",
            c.p_system.n, c.q_system.n, c.n
        )));
    }
    Ok(c.residual_breakdown()?.max())
}

/// `exp(2 pi i k / n)` with the exponent reduced mod `n` before evaluation.
///
/// `k` and `n - k` give exact conjugates, so projectors built from these
/// values are exactly Hermitian.
pub fn root_of_unity<R: Real>(k: i64, n: usize) -> Complex<R> {
    let n_i = n as i64;
    let k = k.rem_euclid(n_i);
    if k == 0 {
        return Complex::one();
    }
    if 2 * k == n_i {
        return -Complex::<R>::one();
    }
    if 2 * k > n_i {
        return root_of_unity::<R>(n_i - k, n).conj();
    }
    cis(R::from_f64(2.0) * R::pi() * R::from_f64(k as f64) / R::from_f64(n as f64))
}

/// Coordinate projectors against the Fourier basis `eps^{(i-1)(j-1)}/sqrt(n)`,
/// `eps = exp(2 pi i/n)`, optionally with columns 3 and 4 exchanged.
pub fn standard_pair<R: Real>(n: usize, swap34: bool) -> Result<PairConfiguration<R>, ConfigError> {
    if n < 2 {
        return Err(ConfigError::InvalidDimension { min: 2, got: n });
    }
    if swap34 && n < 4 {
        return Err(ConfigError::InvalidDimension { min: 4, got: n });
    }
    let mut columns: Vec<usize> = (0..n).collect();
    if swap34 {
        columns.swap(2, 3);
    }
    let inv_n = R::one() / R::from_f64(n as f64);
    let q = columns
        .iter()
        .map(|&j| {
            // q_j[a][b] = eps^{(a-b) j} / n, exactly Hermitian
            CMatrix::from_fn(n, n, |a, b| {
                root_of_unity::<R>((a as i64 - b as i64) * j as i64, n) * inv_n
            })
        })
        .collect();
    PairConfiguration::new(ProjectorSystem::coordinate(n), ProjectorSystem::new(q)?)
}

/// Dual-basis projectors `p_i = E[:, i] (E^{-1})[i, :]` for the columns of `e`.
pub fn projectors_from_basis<R: Real>(e: &CMatrix<R>) -> Result<ProjectorSystem<R>, ConfigError> {
    let einv = inverse(e)?;
    let n = e.rows();
    ProjectorSystem::new(
        (0..n)
            .map(|i| CMatrix::from_fn(n, n, |a, b| e[(a, i)] * einv[(i, b)]))
            .collect(),
    )
}

pub fn from_bases<R: Real>(e: &CMatrix<R>, f: &CMatrix<R>) -> Result<PairConfiguration<R>, ConfigError> {
    if e.shape() != f.shape() || !e.is_square() {
        return Err(ConfigError::Shape(format!(
            "bases of shape {:?} and {:?}",
            e.shape(),
            f.shape()
        )));
    }
    PairConfiguration::new(projectors_from_basis(e)?, projectors_from_basis(f)?)
}

/// Dephased free phases of an `n x n` complex Hadamard matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct HadamardPoint {
    pub n: usize,
    /// `phases[i][j]` is the phase of entry `(i+1, j+1)`, in `(-pi, pi]`.
    pub phases: Vec<Vec<f64>>,
}

/// Representative of `x` modulo `2 pi` in `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    let mut y = x - 2.0 * PI * (x / (2.0 * PI)).round();
    if y <= -PI {
        y += 2.0 * PI;
    }
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

impl HadamardPoint {
    pub fn new(n: usize, phases: Vec<Vec<f64>>) -> Result<Self, ConfigError> {
        if n < 2 {
            return Err(ConfigError::InvalidDimension { min: 2, got: n });
        }
        if phases.len() != n - 1 || phases.iter().any(|r| r.len() != n - 1) {
            return Err(ConfigError::Shape(format!(
                "expected {0}x{0} phase matrix for n = {n}",
                n - 1
            )));
        }
        if phases.iter().flatten().any(|x| !x.is_finite()) {
            return Err(ConfigError::Shape("non-finite phase".into()));
        }
        Ok(Self {
            n,
            phases: phases
                .into_iter()
                .map(|r| r.into_iter().map(wrap_phase).collect())
                .collect(),
        })
    }

    /// Dephased Fourier matrix `F_n`.
    pub fn fourier(n: usize) -> Result<Self, ConfigError> {
        Self::new(
            n,
            (1..n)
                .map(|i| (1..n).map(|j| 2.0 * PI * ((i * j) % n) as f64 / n as f64).collect())
                .collect(),
        )
    }

    /// Phases in row-major order (length `(n-1)^2`).
    pub fn flat(&self) -> Vec<f64> {
        self.phases.iter().flatten().copied().collect()
    }

    pub fn from_flat(n: usize, flat: &[f64]) -> Result<Self, ConfigError> {
        let m = n.saturating_sub(1);
        if flat.len() != m * m {
            return Err(ConfigError::Shape(format!(
                "expected {} phases for n = {n}, got {}",
                m * m,
                flat.len()
            )));
        }
        Self::new(n, flat.chunks(m.max(1)).map(<[f64]>::to_vec).collect())
    }

    /// Reconstructed matrix with entries `exp(i phi)/sqrt(n)`.
    pub fn matrix<R: Real>(&self) -> CMatrix<R> {
        let n = self.n;
        let s = R::one() / R::from_f64(n as f64).sqrt();
        CMatrix::from_fn(n, n, |i, j| {
            if i == 0 || j == 0 {
                Complex::new(s, R::zero())
            } else {
                cis(R::from_f64(self.phases[i - 1][j - 1])) * s
            }
        })
    }

    /// `|| U^H U - I ||_2`.
    pub fn unitarity_residual(&self) -> f64 {
        let u: ComplexMatrix = self.matrix();
        (&(&u.adjoint() * &u) - &ComplexMatrix::identity(self.n))
            .spectral_norm()
            .unwrap_or(f64::INFINITY)
    }

    /// Dephase an arbitrary matrix with nonzero first row and column: rows
    /// and columns are rescaled so they become real positive.
    pub fn dephase(u: &ComplexMatrix) -> Result<Self, ConfigError> {
        if !u.is_square() || u.rows() < 2 {
            return Err(ConfigError::Shape(format!("cannot dephase a {:?} matrix", u.shape())));
        }
        let n = u.rows();
        let arg = |z: Complex64| z.im.atan2(z.re);
        let mut phases = vec![vec![0.0; n - 1]; n - 1];
        for i in 1..n {
            for j in 1..n {
                // phase of u_ij * conj(u_i1) * conj(u_1j) * u_11
                phases[i - 1][j - 1] = arg(u[(i, j)] * u[(i, 0)].conj() * u[(0, j)].conj() * u[(0, 0)]);
            }
        }
        Self::new(n, phases)
    }
}

/// Coordinate projectors against the columns of the reconstructed matrix.
/// Fails if the reconstruction is not unitary to `1e-8`.
pub fn from_hadamard<R: Real>(h: &HadamardPoint) -> Result<PairConfiguration<R>, ConfigError> {
    let residual = h.unitarity_residual();
    if residual > 1e-8 || !residual.is_finite() {
        return Err(ConfigError::NonUnitary { residual });
    }
    Ok(from_hadamard_unchecked(h))
}

/// As [`from_hadamard`] without the unitarity check (used on near-manifold
/// iterates).
pub fn from_hadamard_unchecked<R: Real>(h: &HadamardPoint) -> PairConfiguration<R> {
    let n = h.n;
    let full = |i: usize, j: usize| -> f64 {
        if i == 0 || j == 0 {
            0.0
        } else {
            h.phases[i - 1][j - 1]
        }
    };
    let inv_n = R::one() / R::from_f64(n as f64);
    let q = (0..n)
        .map(|j| {
            CMatrix::from_fn(n, n, |a, b| {
                if a == b {
                    Complex::new(inv_n, R::zero())
                } else {
                    cis(R::from_f64(full(a, j)) - R::from_f64(full(b, j))) * inv_n
                }
            })
        })
        .collect();
    let p_system = ProjectorSystem::coordinate(n);
    let q_system = ProjectorSystem { n, projectors: q };
    let mut c = PairConfiguration {
        n,
        p_system,
        q_system,
        residual: R::zero(),
    };
    c.residual = unbiasedness_residual(&c).unwrap_or_else(|_| R::from_f64(f64::INFINITY));
    c
}

/// Eigenvector of a rank-1 projector: its column of largest norm.
fn projector_vector(p: &ComplexMatrix) -> Vec<Complex64> {
    let n = p.cols();
    let best = (0..n)
        .max_by(|&a, &b| {
            let na: f64 = p.column(a).iter().map(|z| z.norm_sqr()).sum();
            let nb: f64 = p.column(b).iter().map(|z| z.norm_sqr()).sum();
            na.total_cmp(&nb)
        })
        .unwrap_or(0);
    let v = p.column(best);
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Gauge-fix a Hermitian configuration to dephased Hadamard coordinates.
///
/// Rows follow the order of the p-system and columns the order of the
/// q-system, so sub-triples keep their meaning across the round trip.
pub fn to_hadamard(c: &PairConfiguration<f64>, tol: f64) -> Result<HadamardPoint, ConfigError> {
    let herm = c.hermiticity_residual();
    if herm > tol {
        return Err(ConfigError::NotHermitian { residual: herm });
    }
    let n = c.n;
    let e: Vec<Vec<Complex64>> = c.p_system.projectors.iter().map(projector_vector).collect();
    let f: Vec<Vec<Complex64>> = c.q_system.projectors.iter().map(projector_vector).collect();
    let a = ComplexMatrix::from_fn(n, n, |i, j| {
        e[i].iter()
            .zip(&f[j])
            .fold(Complex64::zero(), |acc, (x, y)| acc + x.conj() * y)
    });
    let target = 1.0 / n as f64;
    let unb = a
        .data()
        .iter()
        .map(|z| (z.norm_sqr() - target).abs())
        .fold(0.0, f64::max);
    if unb > tol {
        return Err(ConfigError::NotUnbiased { residual: unb });
    }
    let h = HadamardPoint::dephase(&a)?;
    let residual = h.unitarity_residual();
    if residual > tol.max(1e-8) {
        return Err(ConfigError::NonUnitary { residual });
    }
    Ok(h)
}

/// Result of [`is_complex_hadamard`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HadamardCheck {
    pub is_hadamard: bool,
    pub unitarity_residual: f64,
    pub modulus_residual: f64,
}

/// Unitary with all entry moduli `1/sqrt(n)`, both to within `tol`.
pub fn is_complex_hadamard<R: Real>(u: &CMatrix<R>, tol: f64) -> HadamardCheck {
    if !u.is_square() || u.rows() == 0 {
        return HadamardCheck {
            is_hadamard: false,
            unitarity_residual: f64::INFINITY,
            modulus_residual: f64::INFINITY,
        };
    }
    let n = u.rows();
    let unitarity_residual = (&(&u.adjoint() * u) - &CMatrix::identity(n))
        .spectral_norm()
        .map(Real::to_f64)
        .unwrap_or(f64::INFINITY);
    let target = R::one() / R::from_f64(n as f64).sqrt();
    let modulus_residual = u
        .data()
        .iter()
        .map(|z| (cabs(*z) - target).abs().to_f64())
        .fold(0.0, f64::max);
    HadamardCheck {
        is_hadamard: unitarity_residual <= tol && modulus_residual <= tol,
        unitarity_residual,
        modulus_residual,
    }
}

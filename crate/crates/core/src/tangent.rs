//! Zariski tangent dimensions: relation Jacobians, orbit and moduli
//! dimensions, the dephased Hadamard defect and the fiber-rank check of the
//! invariant map.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use num_traits::Zero;
use thiserror::Error;

use crate::config::{ConfigError, HadamardPoint, PairConfiguration};
use crate::invariants::{u3_factors, u_differential, InvariantsError};
use crate::linalg::dense::{realified_spectrum, Spectrum};
use crate::linalg::{gap_at, numerical_rank, CMatrix, Complex64, ComplexMatrix, LinalgError, RankReport, Real};
use crate::relations::{commutant_dimension, word_product, AlgebraRepPoint, AlgebraTag, RelationsError};

/// Relative rank tolerance for tangent computations.
pub const DEFAULT_RANK_TOL: f64 = 1e-9;
/// Smallest singular-value ratio at the cut that counts as a clear decision.
pub const MIN_GAP_RATIO: f64 = 1e3;
/// Largest relation residual at which a Jacobian is assembled.
pub const MAX_BASE_RESIDUAL: f64 = 1e-8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TangentError {
    #[error("base point is not a solution (residual {residual:e} in {relation})")]
    ResidualTooLarge { residual: f64, relation: String },
    #[error("reducible point: commutant dimension {0}")]
    Reducible(usize),
    #[error("odd real nullity {0}: complex-analytic structure violated")]
    Parity(usize),
    #[error("wrong algebra: {0}")]
    WrongAlgebra(String),
    #[error("orbit dimension {orbit} exceeds kernel dimension {nullity}")]
    Inconsistent { orbit: usize, nullity: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Relations(#[from] RelationsError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Invariants(#[from] InvariantsError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TangentStatus {
    Determinate,
    /// The singular-value gap at the cut is below [`MIN_GAP_RATIO`].
    Indeterminate,
}

/// Linearized relation system at a point.
#[derive(Clone, Debug)]
pub struct JacobianSystem {
    /// Real coordinates: real and imaginary parts of every generator entry.
    pub variable_count: usize,
    /// Real equations: real and imaginary parts of every relation entry.
    pub equation_count: usize,
    /// Complex-analytic Jacobian; row `(rel, s, t)`, column `(gen, a, b)`.
    pub complex_jacobian: ComplexMatrix,
    pub base_point: AlgebraRepPoint,
    pub base_residual: f64,
}

impl JacobianSystem {
    /// Real form `[[Re J, -Im J], [Im J, Re J]]`.
    pub fn jacobian(&self) -> DMatrix<f64> {
        crate::linalg::dense::realify(&self.complex_jacobian)
    }

    /// `J · v` for a complex tangent vector laid out like the columns.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        let j = &self.complex_jacobian;
        (0..j.rows())
            .map(|r| {
                j.row(r)
                    .iter()
                    .zip(v)
                    .fold(Complex64::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }
}

/// Analytic Jacobian of every relation of the point's algebra with respect
/// to every generator entry.
pub fn rep_jacobian(point: &AlgebraRepPoint) -> Result<JacobianSystem, TangentError> {
    let (residual, relation) = point.residual()?;
    if residual > MAX_BASE_RESIDUAL || !residual.is_finite() {
        return Err(TangentError::ResidualTooLarge { residual, relation });
    }
    let complex_jacobian = analytic_jacobian(point);
    Ok(JacobianSystem {
        variable_count: 2 * complex_jacobian.cols(),
        equation_count: 2 * complex_jacobian.rows(),
        complex_jacobian,
        base_point: point.clone(),
        base_residual: residual,
    })
}

pub fn pair_jacobian(c: &PairConfiguration) -> Result<JacobianSystem, TangentError> {
    rep_jacobian(&c.to_rep_point())
}

fn analytic_jacobian(point: &AlgebraRepPoint) -> ComplexMatrix {
    let x = point.matrices();
    let d = point.dimension();
    let dd = d * d;
    let rels = point.relations();
    let mut j = ComplexMatrix::zeros(rels.len() * dd, x.len() * dd);
    for (ri, rel) in rels.iter().enumerate() {
        for (coeff, word) in &rel.terms {
            for pos in 0..word.len() {
                let left = word_product(&x, &word[..pos], d);
                let right = word_product(&x, &word[pos + 1..], d);
                let g = word[pos];
                // d(L E_ab R)[s,t] = L[s,a] R[b,t]
                for s in 0..d {
                    for a in 0..d {
                        let l = left[(s, a)] * *coeff;
                        if l.is_zero() {
                            continue;
                        }
                        for b in 0..d {
                            let col = g * dd + a * d + b;
                            for t in 0..d {
                                let row = ri * dd + s * d + t;
                                j[(row, col)] += l * right[(b, t)];
                            }
                        }
                    }
                }
            }
        }
    }
    j
}

/// Central-difference Jacobian of the stacked relations, for cross-checks.
pub fn finite_difference_jacobian(point: &AlgebraRepPoint, h: f64) -> ComplexMatrix {
    let x = point.matrices();
    let d = point.dimension();
    let dd = d * d;
    let rels = point.relations();
    let eval =
        |xs: &[ComplexMatrix]| -> Vec<Complex64> { rels.iter().flat_map(|r| r.evaluate(xs).data().to_vec()).collect() };
    let mut j = ComplexMatrix::zeros(rels.len() * dd, x.len() * dd);
    for g in 0..x.len() {
        for e in 0..dd {
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[g][(e / d, e % d)] += Complex64::new(h, 0.0);
            xm[g][(e / d, e % d)] -= Complex64::new(h, 0.0);
            let (fp, fm) = (eval(&xp), eval(&xm));
            for r in 0..fp.len() {
                j[(r, g * dd + e)] = (fp[r] - fm[r]) / (2.0 * h);
            }
        }
    }
    j
}

/// The `d^2` orbit tangent vectors `([E_ab, x_1], ..., [E_ab, x_k])`, laid
/// out like Jacobian columns.
pub fn orbit_vectors(mats: &[ComplexMatrix]) -> Vec<Vec<Complex64>> {
    let d = mats[0].rows();
    let mut out = Vec::with_capacity(d * d);
    for a in 0..d {
        for b in 0..d {
            let mut v = Vec::with_capacity(mats.len() * d * d);
            for x in mats {
                // (E_ab x - x E_ab)[s,t] = δ_sa x[b,t] - x[s,a] δ_bt
                for s in 0..d {
                    for t in 0..d {
                        let mut z = Complex64::zero();
                        if s == a {
                            z += x[(b, t)];
                        }
                        if t == b {
                            z -= x[(s, a)];
                        }
                        v.push(z);
                    }
                }
            }
            out.push(v);
        }
    }
    out
}

/// Rank report of the span of [`orbit_vectors`].
pub fn orbit_rank(mats: &[ComplexMatrix], tol: f64) -> Result<RankReport, TangentError> {
    let vs = orbit_vectors(mats);
    let m = ComplexMatrix::from_fn(vs[0].len(), vs.len(), |i, k| vs[k][i]);
    Ok(numerical_rank(&m, tol)?)
}

/// Dimension of the tangent to the conjugation orbit.
pub fn orbit_tangent_dim(c: &PairConfiguration, tol: f64) -> Result<usize, TangentError> {
    Ok(orbit_rank(&c.matrices(), tol)?.rank)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TangentReport {
    /// Complex dimension of the Jacobian kernel.
    pub nullity: usize,
    pub real_nullity: usize,
    pub orbit_dim: usize,
    pub moduli_dim: usize,
    /// Ratio of the singular values on either side of the cut (infinite if
    /// nothing lies below the threshold).
    pub gap_ratio: f64,
    pub orbit_gap_ratio: f64,
    /// Singular values of the real Jacobian, descending.
    pub singular_values: Vec<f64>,
    pub status: TangentStatus,
    pub variable_count: usize,
    pub equation_count: usize,
}

/// Real nullity of a realified spectrum with `cols` real columns, halved
/// after the parity check.
fn complex_nullity(spec: &Spectrum, cols: usize, tol: f64) -> Result<(usize, usize, f64), TangentError> {
    let s = &spec.singular_values;
    let smax = s.first().copied().unwrap_or(0.0);
    let threshold = tol * smax;
    let rank = s.iter().filter(|x| **x > threshold).count();
    let real_nullity = cols - rank;
    if real_nullity % 2 != 0 {
        return Err(TangentError::Parity(real_nullity));
    }
    Ok((real_nullity / 2, real_nullity, gap_at(s, rank)))
}

/// Kernel dimension minus orbit dimension at any representation point.
pub fn moduli_tangent(point: &AlgebraRepPoint, tol: f64) -> Result<TangentReport, TangentError> {
    crate::linalg::check_tol(tol)?;
    let sys = rep_jacobian(point)?;
    let spec = realified_spectrum(&sys.complex_jacobian, false)?;
    let (nullity, real_nullity, gap_ratio) = complex_nullity(&spec, sys.variable_count, tol)?;
    let orbit = orbit_rank(&point.matrices(), tol)?;
    if orbit.rank > nullity {
        return Err(TangentError::Inconsistent {
            orbit: orbit.rank,
            nullity,
        });
    }
    let status = if gap_ratio >= MIN_GAP_RATIO && orbit.gap_ratio >= MIN_GAP_RATIO {
        TangentStatus::Determinate
    } else {
        TangentStatus::Indeterminate
    };
    Ok(TangentReport {
        nullity,
        real_nullity,
        orbit_dim: orbit.rank,
        moduli_dim: nullity - orbit.rank,
        gap_ratio,
        orbit_gap_ratio: orbit.gap_ratio,
        singular_values: spec.singular_values,
        status,
        variable_count: sys.variable_count,
        equation_count: sys.equation_count,
    })
}

/// Moduli tangent dimension of a configuration as a B_{n,n}-point.
pub fn moduli_tangent_dim(c: &PairConfiguration, tol: f64) -> Result<TangentReport, TangentError> {
    moduli_tangent(&c.to_rep_point(), tol)
}

fn require_irreducible(point: &AlgebraRepPoint, tol: f64) -> Result<(), TangentError> {
    let comm = commutant_dimension(&point.matrices(), tol)?;
    if comm == 1 {
        Ok(())
    } else {
        Err(TangentError::Reducible(comm))
    }
}

/// Moduli tangent dimension of an A(n)-point (`P` plus the `q`'s).
pub fn a6_moduli_tangent_dim(point: &AlgebraRepPoint, tol: f64) -> Result<TangentReport, TangentError> {
    if point.tag != AlgebraTag::An {
        return Err(TangentError::WrongAlgebra(format!(
            "expected A(n), got {:?}",
            point.tag
        )));
    }
    require_irreducible(point, tol)?;
    moduli_tangent(point, tol)
}

/// Moduli tangent dimension of a Γ_{3,3}-point (no sum relations).
pub fn x33_moduli_tangent_dim(point: &AlgebraRepPoint, tol: f64) -> Result<TangentReport, TangentError> {
    check_x33(point)?;
    moduli_tangent(point, tol)
}

fn check_x33(point: &AlgebraRepPoint) -> Result<(), TangentError> {
    let ok = point.tag == AlgebraTag::Bkn
        && point.generators.len() == 6
        && point
            .graph
            .as_ref()
            .is_some_and(|g| *g == crate::relations::LooplessGraph::complete_bipartite(3, 3));
    if ok {
        Ok(())
    } else {
        Err(TangentError::WrongAlgebra(
            "expected a Γ(3,3) point with six generators".into(),
        ))
    }
}

/// `2 (n - k - 1)(k - 1)`, the dimension of the A(n) moduli for `rank P = k`.
pub fn an_dimension_formula(n: i64, k: i64) -> i64 {
    2 * (n - k - 1) * (k - 1)
}

/// Off-diagonal Gram entries of the reconstructed matrix, `(Re, Im)` for
/// each `j < k`.
pub fn unitarity_equations<R: Real>(h: &HadamardPoint) -> Vec<R> {
    let u: CMatrix<R> = h.matrix();
    let n = h.n;
    let mut f = Vec::with_capacity(n * (n - 1));
    for j in 0..n {
        for k in (j + 1)..n {
            let g = (0..n).fold(Complex::zero(), |acc: Complex<R>, a| acc + u[(a, j)].conj() * u[(a, k)]);
            f.push(g.re);
            f.push(g.im);
        }
    }
    f
}

/// Jacobian of [`unitarity_equations`] with respect to the `(n-1)^2` free
/// phases, row-major over `(row, col)` of the phase matrix.
pub fn unitarity_jacobian<R: Real>(h: &HadamardPoint) -> Vec<Vec<R>> {
    let n = h.n;
    let m = n - 1;
    let u: CMatrix<R> = h.matrix();
    let mut jac = vec![vec![R::zero(); m * m]; n * (n - 1)];
    let mut row = 0;
    let i = Complex::new(R::zero(), R::one());
    for j in 0..n {
        for k in (j + 1)..n {
            for a in 1..n {
                let prod = u[(a, j)].conj() * u[(a, k)];
                // dU[a,b]/dφ[a,b] = i U[a,b]
                if j >= 1 {
                    let v = -(i * prod);
                    jac[row][(a - 1) * m + (j - 1)] += v.re;
                    jac[row + 1][(a - 1) * m + (j - 1)] += v.im;
                }
                if k >= 1 {
                    let v = i * prod;
                    jac[row][(a - 1) * m + (k - 1)] += v.re;
                    jac[row + 1][(a - 1) * m + (k - 1)] += v.im;
                }
            }
            row += 2;
        }
    }
    jac
}

pub fn unitarity_jacobian_f64(h: &HadamardPoint) -> DMatrix<f64> {
    let rows = unitarity_jacobian::<f64>(h);
    let cols = rows.first().map_or(0, Vec::len);
    DMatrix::from_fn(rows.len(), cols, |i, k| rows[i][k])
}

pub fn unitarity_equations_f64(h: &HadamardPoint) -> DVector<f64> {
    DVector::from_vec(unitarity_equations::<f64>(h))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DefectReport<R = f64> {
    pub defect: usize,
    pub gap_ratio: f64,
    pub singular_values: Vec<R>,
    pub status: TangentStatus,
}

/// Real nullity of the unitarity Jacobian in dephased phase coordinates.
pub fn dephased_defect<R: Real>(h: &HadamardPoint, tol: f64) -> Result<DefectReport<R>, TangentError> {
    crate::linalg::check_tol(tol)?;
    let residual = h.unitarity_residual();
    if residual > MAX_BASE_RESIDUAL || !residual.is_finite() {
        return Err(TangentError::ResidualTooLarge {
            residual,
            relation: "U^H U - I".into(),
        });
    }
    let rows = unitarity_jacobian::<R>(h);
    let cols = (h.n - 1) * (h.n - 1);
    let jm = CMatrix::from_fn(rows.len(), cols, |i, k| Complex::new(rows[i][k], R::zero()));
    let rep = numerical_rank(&jm, tol)?;
    let defect = cols - rep.rank;
    let status = if rep.gap_ratio >= MIN_GAP_RATIO {
        TangentStatus::Determinate
    } else {
        TangentStatus::Indeterminate
    };
    Ok(DefectReport {
        defect,
        gap_ratio: rep.gap_ratio,
        singular_values: rep.singular_values,
        status,
    })
}

/// Relative tolerance for the rank of the invariant differential.
pub const FIBER_RANK_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq)]
pub struct FiberReport {
    /// Complex rank of `d(u1, u2, u3)` on the moduli tangent.
    pub rank: usize,
    pub moduli_dim: usize,
    /// Singular values of the real differential, normalized by the largest.
    pub normalized_singular_values: Vec<f64>,
    pub gap_ratio: f64,
    /// Degeneracy notes: rank drops, ambiguous gaps, vanishing factors of u3.
    pub flags: Vec<String>,
}

/// Rank of the differential of `(u1, u2, u3)` on the tangent space of a
/// Γ_{3,3}-point in dimension 6.
pub fn fiber_rank_check(point: &AlgebraRepPoint, tol: f64) -> Result<FiberReport, TangentError> {
    check_x33(point)?;
    let sys = rep_jacobian(point)?;
    let spec = realified_spectrum(&sys.complex_jacobian, true)?;
    let (nullity, _, tangent_gap) = complex_nullity(&spec, sys.variable_count, tol)?;
    let orbit = orbit_rank(&point.matrices(), tol)?;
    let smax = spec.singular_values.first().copied().unwrap_or(0.0);
    let kernel = spec
        .kernel(tol * smax)
        .ok_or_else(|| LinalgError::DecompositionFailed("missing kernel".into()))?;

    let x = point.matrices();
    let d = point.dimension();
    let dd = d * d;
    let ncols = x.len() * dd;
    let p = &(&x[0] + &x[1]) + &x[2];
    let q = [&x[3], &x[4], &x[5]];
    let mut diff = DMatrix::<f64>::zeros(6, kernel.ncols());
    for k in 0..kernel.ncols() {
        let dx: Vec<ComplexMatrix> = (0..x.len())
            .map(|g| {
                ComplexMatrix::from_fn(d, d, |a, b| {
                    let idx = g * dd + a * d + b;
                    Complex64::new(kernel[(idx, k)], kernel[(idx + ncols, k)])
                })
            })
            .collect();
        let dp = &(&dx[0] + &dx[1]) + &dx[2];
        let du = u_differential(&p, q, &dp, [&dx[3], &dx[4], &dx[5]])?;
        for (c, z) in du.iter().enumerate() {
            diff[(c, k)] = z.re;
            diff[(c + 3, k)] = z.im;
        }
    }
    let dspec = crate::linalg::dense::spectrum(&diff.transpose(), false)?;
    let s = &dspec.singular_values;
    let top = s.first().copied().unwrap_or(0.0);
    let real_rank = s.iter().filter(|v| **v > FIBER_RANK_TOL * top).count();
    let mut flags = Vec::new();
    if real_rank % 2 != 0 {
        flags.push(format!("odd real rank {real_rank}"));
    }
    let rank = real_rank / 2;
    let gap_ratio = gap_at(s, real_rank);
    if rank < 3 {
        flags.push(format!("rank drop to {rank}"));
    }
    if gap_ratio < MIN_GAP_RATIO {
        flags.push(format!("ambiguous gap {gap_ratio:.3e}"));
    }
    if tangent_gap < MIN_GAP_RATIO {
        flags.push(format!("ambiguous tangent gap {tangent_gap:.3e}"));
    }
    let factors = u3_factors(&p, q)?;
    let small = factors.iter().filter(|f| f.norm() < 1e-6).count();
    if small >= 2 {
        flags.push(format!("{small} factors of u3 vanish"));
    }
    Ok(FiberReport {
        rank,
        moduli_dim: nullity.saturating_sub(orbit.rank),
        normalized_singular_values: s.iter().map(|v| if top > 0.0 { v / top } else { 0.0 }).collect(),
        gap_ratio,
        flags,
    })
}

//! Invariants `u1, u2, u3` and `z1, z2`, the involutions σ, τ, θ, the trace
//! identity between the two triples, the complement solver and the
//! real-locus membership test.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::config::{ConfigError, PairConfiguration, ProjectorSystem};
use crate::linalg::dense::pinv_solve_complex;
use crate::linalg::{
    cabs, determinant, nullspace, numerical_rank, CMatrix, Complex64, ComplexMatrix, LinalgError, Real, SVD_EPS,
};
use crate::relations::{an_residual, commutant_dimension, RelationsError};

/// `u1 = ALPHA * 36 Tr(PQPQ) + BETA` on the A₃ relation locus, with
/// `Q = q1 + q2 + q3`. The offset comes from the diagonal terms
/// `Tr(P q_i P q_i) = 1/4`.
pub const U1_AFFINE: (f64, f64) = (0.5, -13.5);

/// `u2 = a Tr(PQPQPQ) + b Tr(PQPQ) + c` on the A₃ relation locus.
pub const U2_AFFINE: (f64, f64, f64) = (72.0, -108.0, 54.0);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InvariantsError {
    #[error("dimension: {0}")]
    Dimension(String),
    #[error("precondition violated: {what} (residual {residual:e})")]
    Precondition { what: String, residual: f64 },
    #[error("complement solver did not converge after {restarts} restarts (best residual {best_residual:e})")]
    NonConvergence { best_residual: f64, restarts: usize },
    #[error("reducible configuration: commutant dimension {0}")]
    Reducible(usize),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Relations(#[from] RelationsError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Real parts of `(u1, u2, u3)` and the largest imaginary part dropped.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InvariantVector<R = f64> {
    pub u1: R,
    pub u2: R,
    pub u3: R,
    pub imag_residue: R,
}

impl<R: Real> InvariantVector<R> {
    pub fn as_array(&self) -> [R; 3] {
        [self.u1, self.u2, self.u3]
    }

    pub fn to_f64(&self) -> InvariantVector<f64> {
        InvariantVector {
            u1: self.u1.to_f64(),
            u2: self.u2.to_f64(),
            u3: self.u3.to_f64(),
            imag_residue: self.imag_residue.to_f64(),
        }
    }
}

fn require_dim6<R: Real>(mats: &[&CMatrix<R>]) -> Result<(), InvariantsError> {
    for m in mats {
        if m.shape() != (6, 6) {
            return Err(InvariantsError::Dimension(format!(
                "expected 6x6 matrices, got {:?}",
                m.shape()
            )));
        }
    }
    Ok(())
}

fn tr_pqpq<R: Real>(pq: &[CMatrix<R>], a: usize, b: usize) -> Complex<R> {
    pq[a].trace_of_product(&pq[b])
}

/// Complex values of `(u1, u2, u3)`.
pub fn u_invariants_complex<R: Real>(p: &CMatrix<R>, q: [&CMatrix<R>; 3]) -> Result<[Complex<R>; 3], InvariantsError> {
    require_dim6(&[p, q[0], q[1], q[2]])?;
    let pq: Vec<CMatrix<R>> = q.iter().map(|qi| p * *qi).collect();
    let c36 = R::from_f64(36.0);
    let one = Complex::<R>::one();
    let t01 = tr_pqpq(&pq, 0, 1);
    let t02 = tr_pqpq(&pq, 0, 2);
    let t12 = tr_pqpq(&pq, 1, 2);
    let u1 = (t01 + t02 + t12) * c36;
    let p012 = &pq[0] * &pq[1];
    let p021 = &pq[0] * &pq[2];
    let u2 = (p012.trace_of_product(&pq[2]) + p021.trace_of_product(&pq[1])) * R::from_f64(216.0);
    let u3 = (t01 * c36 - one) * (t12 * c36 - one) * (t02 * c36 - one);
    Ok([u1, u2, u3])
}

pub fn u_invariants<R: Real>(p: &CMatrix<R>, q: [&CMatrix<R>; 3]) -> Result<InvariantVector<R>, InvariantsError> {
    let [u1, u2, u3] = u_invariants_complex(p, q)?;
    Ok(InvariantVector {
        u1: u1.re,
        u2: u2.re,
        u3: u3.re,
        imag_residue: u1.im.abs().max(u2.im.abs()).max(u3.im.abs()),
    })
}

/// `Tr(m_{w_1} ... m_{w_k})` and its derivative along `dm`.
fn trace_word_with_derivative<R: Real>(
    m: &[&CMatrix<R>],
    dm: &[&CMatrix<R>],
    word: &[usize],
) -> (Complex<R>, Complex<R>) {
    let d = m[0].rows();
    let product = |ws: &[usize]| ws.iter().fold(CMatrix::identity(d), |acc: CMatrix<R>, &k| &acc * m[k]);
    let value = product(word).tr();
    let mut deriv = Complex::zero();
    for pos in 0..word.len() {
        // Tr(L dX R) = Tr(dX R L)
        let rl = &product(&word[pos + 1..]) * &product(&word[..pos]);
        deriv = deriv + dm[word[pos]].trace_of_product(&rl);
    }
    (value, deriv)
}

/// Directional derivative of `(u1, u2, u3)` at `(P, q)` along `(dP, dq)`.
pub fn u_differential<R: Real>(
    p: &CMatrix<R>,
    q: [&CMatrix<R>; 3],
    dp: &CMatrix<R>,
    dq: [&CMatrix<R>; 3],
) -> Result<[Complex<R>; 3], InvariantsError> {
    require_dim6(&[p, q[0], q[1], q[2], dp, dq[0], dq[1], dq[2]])?;
    let m = [p, q[0], q[1], q[2]];
    let dm = [dp, dq[0], dq[1], dq[2]];
    let c36 = R::from_f64(36.0);
    let one = Complex::<R>::one();
    // generator 0 is P, generator a+1 is q_a
    let pair = |a: usize, b: usize| trace_word_with_derivative(&m, &dm, &[0, a + 1, 0, b + 1]);
    let (t01, d01) = pair(0, 1);
    let (t02, d02) = pair(0, 2);
    let (t12, d12) = pair(1, 2);
    let du1 = (d01 + d02 + d12) * c36;
    let (_, w012) = trace_word_with_derivative(&m, &dm, &[0, 1, 0, 2, 0, 3]);
    let (_, w021) = trace_word_with_derivative(&m, &dm, &[0, 1, 0, 3, 0, 2]);
    let du2 = (w012 + w021) * R::from_f64(216.0);
    let (f01, f12, f02) = (t01 * c36 - one, t12 * c36 - one, t02 * c36 - one);
    let du3 = (d01 * f12 * f02 + f01 * d12 * f02 + f01 * f12 * d02) * c36;
    Ok([du1, du2, du3])
}

/// The three factors `36 Tr(P q_a P q_b) - 1` of `u3`, pairs (1,2), (2,3), (3,1).
pub fn u3_factors<R: Real>(p: &CMatrix<R>, q: [&CMatrix<R>; 3]) -> Result<[Complex<R>; 3], InvariantsError> {
    require_dim6(&[p, q[0], q[1], q[2]])?;
    let pq: Vec<CMatrix<R>> = q.iter().map(|qi| p * *qi).collect();
    let f = |a: usize, b: usize| tr_pqpq(&pq, a, b) * R::from_f64(36.0) - Complex::one();
    Ok([f(0, 1), f(1, 2), f(2, 0)])
}

/// Invariants of `P = sum_{i in p_subset} p_i` against the chosen q-triple
/// (0-based indices).
pub fn restricted_invariants<R: Real>(
    c: &PairConfiguration<R>,
    p_subset: &[usize],
    q_triple: [usize; 3],
) -> Result<InvariantVector<R>, InvariantsError> {
    check_indices(p_subset, c.n)?;
    check_indices(&q_triple, c.n)?;
    let p = c.p_system.partial_sum(p_subset);
    u_invariants(&p, [c.q(q_triple[0]), c.q(q_triple[1]), c.q(q_triple[2])])
}

fn check_indices(idx: &[usize], n: usize) -> Result<(), InvariantsError> {
    for (k, &i) in idx.iter().enumerate() {
        if i >= n {
            return Err(InvariantsError::Dimension(format!(
                "index {} out of range 1..={n}",
                i + 1
            )));
        }
        if idx[..k].contains(&i) {
            return Err(InvariantsError::Dimension(format!("repeated index {}", i + 1)));
        }
    }
    Ok(())
}

/// `z1 = Tr(P q1 P q2)`, `z2 = Tr(P q5 P q6)` (real parts).
pub fn z_functions<R: Real>(p: &CMatrix<R>, q: &[CMatrix<R>]) -> Result<(R, R), InvariantsError> {
    if q.len() != 6 {
        return Err(InvariantsError::Dimension(format!("expected six q's, got {}", q.len())));
    }
    let mut all = vec![p];
    all.extend(q.iter());
    require_dim6(&all)?;
    let z = |a: usize, b: usize| (p * &q[a]).trace_of_product(&(p * &q[b])).re;
    Ok((z(0, 1), z(4, 5)))
}

/// `P -> 1 - P`.
pub fn sigma<R: Real>(p: &CMatrix<R>) -> Result<CMatrix<R>, InvariantsError> {
    if !p.is_square() {
        return Err(InvariantsError::Dimension(format!("sigma of a {:?} matrix", p.shape())));
    }
    Ok(&CMatrix::identity(p.rows()) - p)
}

/// Exchange of the two projector systems.
pub fn tau<R: Real>(c: &PairConfiguration<R>) -> PairConfiguration<R> {
    PairConfiguration {
        n: c.n,
        p_system: c.q_system.clone(),
        q_system: c.p_system.clone(),
        residual: c.residual,
    }
}

/// Hermitian conjugation of every projector.
pub fn theta<R: Real>(c: &PairConfiguration<R>) -> PairConfiguration<R> {
    let adj = |s: &ProjectorSystem<R>| ProjectorSystem {
        n: s.n,
        projectors: s.projectors.iter().map(CMatrix::adjoint).collect(),
    };
    PairConfiguration {
        n: c.n,
        p_system: adj(&c.p_system),
        q_system: adj(&c.q_system),
        residual: c.residual,
    }
}

/// Both sides of the trace identity and their distance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IdentityReport<R = f64> {
    pub lhs: R,
    pub rhs: R,
    /// `|lhs - rhs|` computed on the complex values.
    pub gap: R,
}

/// Tolerance on `|Tr p_i q_j - 1/6|` below which the identity is claimed.
pub const IDENTITY_PRECONDITION_TOL: f64 = 1e-8;

fn check_triples<R: Real>(p: [&CMatrix<R>; 3], q: [&CMatrix<R>; 3], tol: f64) -> Result<(), InvariantsError> {
    require_dim6(&[p[0], p[1], p[2], q[0], q[1], q[2]])?;
    let tol_r = R::from_f64(tol);
    for (label, t) in [("p", p), ("q", q)] {
        for i in 0..3 {
            let idem = (&(t[i] * t[i]) - t[i]).max_abs_entry();
            let tr1 = cabs(t[i].tr() - Complex::one());
            if idem > tol_r || tr1 > tol_r {
                return Err(InvariantsError::Precondition {
                    what: format!("{label}{} is not a rank-1 projector", i + 1),
                    residual: idem.max(tr1).to_f64(),
                });
            }
            for j in 0..3 {
                if i != j {
                    let o = (t[i] * t[j]).max_abs_entry();
                    if o > tol_r {
                        return Err(InvariantsError::Precondition {
                            what: format!("{label}{} {label}{} != 0", i + 1, j + 1),
                            residual: o.to_f64(),
                        });
                    }
                }
            }
        }
    }
    let sixth = Complex::new(R::one() / R::from_f64(6.0), R::zero());
    for (i, pi) in p.iter().enumerate() {
        for (j, qj) in q.iter().enumerate() {
            let d = cabs(pi.trace_of_product(qj) - sixth);
            if d > tol_r {
                return Err(InvariantsError::Precondition {
                    what: format!("|Tr p{} q{} - 1/6|", i + 1, j + 1),
                    residual: d.to_f64(),
                });
            }
        }
    }
    Ok(())
}

fn ordered_product<R: Real>(big: &CMatrix<R>, t: [&CMatrix<R>; 3], ordered: bool) -> Complex<R> {
    let bt: Vec<CMatrix<R>> = t.iter().map(|x| big * *x).collect();
    let c36 = R::from_f64(36.0);
    let mut acc = Complex::one();
    for i in 0..3 {
        for j in 0..3 {
            if i != j && (ordered || j == (i + 1) % 3) {
                acc = acc * (bt[i].trace_of_product(&bt[j]) * c36 - Complex::one());
            }
        }
    }
    acc
}

/// `prod_{i != j} (36 Tr(P q_i P q_j) - 1)` against the same product with
/// the roles of the triples exchanged, `P = p1+p2+p3`, `Q = q1+q2+q3`.
/// The product runs over ordered pairs.
pub fn identity_check<R: Real>(p: [&CMatrix<R>; 3], q: [&CMatrix<R>; 3]) -> Result<IdentityReport<R>, InvariantsError> {
    identity_check_with(p, q, true)
}

/// As [`identity_check`] with the product over the three unordered pairs
/// `(1,2), (2,3), (3,1)`.
pub fn identity_check_unordered<R: Real>(
    p: [&CMatrix<R>; 3],
    q: [&CMatrix<R>; 3],
) -> Result<IdentityReport<R>, InvariantsError> {
    identity_check_with(p, q, false)
}

fn identity_check_with<R: Real>(
    p: [&CMatrix<R>; 3],
    q: [&CMatrix<R>; 3],
    ordered: bool,
) -> Result<IdentityReport<R>, InvariantsError> {
    check_triples(p, q, IDENTITY_PRECONDITION_TOL)?;
    let big_p = p[0] + &(p[1] + p[2]);
    let big_q = q[0] + &(q[1] + q[2]);
    let lhs = ordered_product(&big_p, q, ordered);
    let rhs = ordered_product(&big_q, p, ordered);
    Ok(IdentityReport {
        lhs: lhs.re,
        rhs: rhs.re,
        gap: cabs(lhs - rhs),
    })
}

/// `(Tr PQPQ, Tr PQPQPQ)`.
pub fn pq_traces<R: Real>(p: &CMatrix<R>, q: &CMatrix<R>) -> (Complex<R>, Complex<R>) {
    let pq = p * q;
    let pqpq = &pq * &pq;
    (pqpq.tr(), pqpq.trace_of_product(&pq))
}

/// `u1` and `u2` predicted from `(P, Q)` through [`U1_AFFINE`] and [`U2_AFFINE`].
pub fn u12_from_pq<R: Real>(p: &CMatrix<R>, q: &CMatrix<R>) -> (Complex<R>, Complex<R>) {
    let (t2, t3) = pq_traces(p, q);
    let (a, b) = U1_AFFINE;
    let u1 = t2 * R::from_f64(36.0 * a) + Complex::new(R::from_f64(b), R::zero());
    let (a2, b2, c2) = U2_AFFINE;
    let u2 = t3 * R::from_f64(a2) + t2 * R::from_f64(b2) + Complex::new(R::from_f64(c2), R::zero());
    (u1, u2)
}

/// Options for [`solve_complement`].
#[derive(Clone, Copy, Debug)]
pub struct ComplementOptions {
    pub restarts: usize,
    pub max_iter: usize,
    /// Newton stops once the largest equation residual is below this.
    pub newton_tol: f64,
    /// Acceptance threshold for the verified triple.
    pub accept_tol: f64,
}

impl Default for ComplementOptions {
    fn default() -> Self {
        Self {
            restarts: 20,
            max_iter: 60,
            newton_tol: 1e-13,
            accept_tol: 1e-9,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplementSolution {
    pub projectors: Vec<ComplexMatrix>,
    /// Worst verified relation residual of the returned projectors.
    pub residual: f64,
    pub restarts_used: usize,
    pub iterations: usize,
}

/// Best iterate: residual, `G`, `H`, restart index, iterations.
type Candidate = (f64, DMatrix<Complex64>, DMatrix<Complex64>, usize, usize);

/// Rank-1 projectors `p'_1..p'_m` with `sum p'_i = 1 - P`, mutually
/// orthogonal and `Tr p'_i q_j = 1/n` for all `j`; `m = n - rank P`.
///
/// Writing `1 - P = B C` with `C B = 1`, each `p'_i = B g_i h_i^T C` and the
/// unknowns `G = [g_i]`, `H = [h_i]` solve `H^T G = 1` together with
/// `h_i^T (C a_j)(b_j^T B) g_i = 1/n` where `q_j = a_j b_j^T`.
pub fn solve_complement(
    p: &ComplexMatrix,
    q: &[ComplexMatrix],
    seed: u64,
    opts: &ComplementOptions,
) -> Result<ComplementSolution, InvariantsError> {
    let n = p.rows();
    if !p.is_square() || q.len() != n || q.iter().any(|x| x.shape() != (n, n)) {
        return Err(InvariantsError::Dimension(format!(
            "need an {n}x{n} P and {n} q's of the same size"
        )));
    }
    let rank_p = numerical_rank(p, 1e-8)?.rank;
    let r = rank_p as f64 / n as f64;
    let an = an_residual(p, q, &vec![r; n])?;
    if an > 1e-8 {
        return Err(InvariantsError::Precondition {
            what: format!("A(n) relations with r = {r}"),
            residual: an,
        });
    }
    let m = n - rank_p;
    if m == 0 {
        return Err(InvariantsError::Precondition {
            what: "1 - P is zero".into(),
            residual: 0.0,
        });
    }

    // 1 - P = B C with C B = 1_m
    let ip = sigma(p)?.to_nalgebra();
    let svd = ip
        .try_svd(true, true, SVD_EPS, 0)
        .ok_or_else(|| LinalgError::DecompositionFailed("svd of 1 - P".into()))?;
    let order = sorted_desc(svd.singular_values.as_slice());
    let (u, vt) = (svd.u.expect("u requested"), svd.v_t.expect("v_t requested"));
    let b = DMatrix::from_fn(n, m, |i, k| u[(i, order[k])] * svd.singular_values[order[k]]);
    let cm = DMatrix::from_fn(m, n, |k, j| vt[(order[k], j)]);

    let mj: Vec<DMatrix<Complex64>> = q
        .iter()
        .map(|qj| {
            let (a, bt) = rank1_factor(&qj.to_nalgebra())?;
            Ok((&cm * a) * (bt * &b))
        })
        .collect::<Result<_, InvariantsError>>()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<Candidate> = None;
    for restart in 0..=opts.restarts {
        let gauss = DMatrix::from_fn(m, m, |_, _| {
            Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng))
        });
        let mut g = gauss.qr().q();
        let mut h = g.map(|z| z.conj());
        let mut res = f64::INFINITY;
        let mut iters = 0;
        for it in 0..opts.max_iter {
            iters = it;
            let f = complement_equations(&g, &h, &mj, n);
            res = f.iter().map(|z| z.norm()).fold(0.0, f64::max);
            if res < opts.newton_tol || !res.is_finite() {
                break;
            }
            let jac = complement_jacobian(&g, &h, &mj);
            let step = pinv_solve_complex(&jac, &f, 1e-10)?;
            for k in 0..m * m {
                g[(k / m, k % m)] -= step[k];
                h[(k / m, k % m)] -= step[m * m + k];
            }
        }
        if res.is_finite() && best.as_ref().map_or(true, |b| res < b.0) {
            best = Some((res, g.clone(), h.clone(), restart, iters));
        }
        if res < opts.newton_tol * 10.0 {
            let (projectors, verified) = assemble_complement(&b, &cm, &g, &h, p, q)?;
            if verified <= opts.accept_tol {
                return Ok(ComplementSolution {
                    projectors,
                    residual: verified,
                    restarts_used: restart,
                    iterations: iters,
                });
            }
        }
    }
    // accept a slower convergence if it still verifies
    if let Some((_, g, h, restart, iters)) = best {
        let (projectors, verified) = assemble_complement(&b, &cm, &g, &h, p, q)?;
        if verified <= opts.accept_tol {
            return Ok(ComplementSolution {
                projectors,
                residual: verified,
                restarts_used: restart,
                iterations: iters,
            });
        }
        return Err(InvariantsError::NonConvergence {
            best_residual: verified,
            restarts: opts.restarts,
        });
    }
    Err(InvariantsError::NonConvergence {
        best_residual: f64::INFINITY,
        restarts: opts.restarts,
    })
}

fn sorted_desc(s: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..s.len()).collect();
    order.sort_by(|&a, &b| s[b].total_cmp(&s[a]));
    order
}

/// `q = a b^T` for a rank-1 `q`, read off the row and column through the
/// largest diagonal entry: `q = q[:, k] q[k, :] / q[k, k]`.
fn rank1_factor(q: &DMatrix<Complex64>) -> Result<(DMatrix<Complex64>, DMatrix<Complex64>), InvariantsError> {
    let k = (0..q.nrows())
        .max_by(|&x, &y| q[(x, x)].norm().total_cmp(&q[(y, y)].norm()))
        .ok_or_else(|| InvariantsError::Dimension("empty projector".into()))?;
    let pivot = q[(k, k)];
    if pivot.norm() == 0.0 {
        return Err(LinalgError::Singular.into());
    }
    let a = DMatrix::from_fn(q.nrows(), 1, |i, _| q[(i, k)]);
    let bt = DMatrix::from_fn(1, q.ncols(), |_, j| q[(k, j)] / pivot);
    Ok((a, bt))
}

fn complement_equations(
    g: &DMatrix<Complex64>,
    h: &DMatrix<Complex64>,
    mj: &[DMatrix<Complex64>],
    n: usize,
) -> DVector<Complex64> {
    let m = g.nrows();
    let mut f = Vec::with_capacity(m * m + m * mj.len());
    let htg = h.transpose() * g;
    for a in 0..m {
        for b in 0..m {
            f.push(htg[(a, b)] - if a == b { Complex64::one() } else { Complex64::zero() });
        }
    }
    let target = Complex64::new(1.0 / n as f64, 0.0);
    for i in 0..m {
        let gi = g.column(i);
        let hi = h.column(i);
        for mm in mj {
            f.push((hi.transpose() * mm * gi)[(0, 0)] - target);
        }
    }
    DVector::from_vec(f)
}

fn complement_jacobian(
    g: &DMatrix<Complex64>,
    h: &DMatrix<Complex64>,
    mj: &[DMatrix<Complex64>],
) -> DMatrix<Complex64> {
    let m = g.nrows();
    let mut jac = DMatrix::zeros(m * m + m * mj.len(), 2 * m * m);
    let mut row = 0;
    for a in 0..m {
        for b in 0..m {
            // (H^T G)_{ab} = sum_k H[k,a] G[k,b]
            for k in 0..m {
                jac[(row, k * m + b)] += h[(k, a)];
                jac[(row, m * m + k * m + a)] += g[(k, b)];
            }
            row += 1;
        }
    }
    for i in 0..m {
        let gi = g.column(i).into_owned();
        let hi = h.column(i).into_owned();
        for mm in mj {
            let dg = hi.transpose() * mm;
            let dh = mm * &gi;
            for k in 0..m {
                jac[(row, k * m + i)] += dg[(0, k)];
                jac[(row, m * m + k * m + i)] += dh[k];
            }
            row += 1;
        }
    }
    jac
}

/// Build the projectors and return the worst verified residual.
fn assemble_complement(
    b: &DMatrix<Complex64>,
    cm: &DMatrix<Complex64>,
    g: &DMatrix<Complex64>,
    h: &DMatrix<Complex64>,
    p: &ComplexMatrix,
    q: &[ComplexMatrix],
) -> Result<(Vec<ComplexMatrix>, f64), InvariantsError> {
    let m = g.nrows();
    let n = p.rows();
    let projectors: Vec<ComplexMatrix> = (0..m)
        .map(|i| {
            let left = b * g.column(i);
            let right = h.column(i).transpose() * cm;
            ComplexMatrix::from_fn(n, n, |a, c| left[a] * right[(0, c)])
        })
        .collect();
    Ok((projectors.clone(), complement_residual(&projectors, p, q)?))
}

/// Worst violation of the complement conditions (spectral norms and trace
/// deviations).
pub fn complement_residual(
    triple: &[ComplexMatrix],
    p: &ComplexMatrix,
    q: &[ComplexMatrix],
) -> Result<f64, InvariantsError> {
    let n = p.rows();
    let mut worst: f64 = 0.0;
    let mut sum = ComplexMatrix::zeros(n, n);
    for (i, x) in triple.iter().enumerate() {
        worst = worst.max((&(x * x) - x).spectral_norm()?);
        for (j, y) in triple.iter().enumerate() {
            if i != j {
                worst = worst.max((x * y).spectral_norm()?);
            }
        }
        for qj in q {
            worst = worst.max((x.trace_of_product(qj) - Complex64::new(1.0 / n as f64, 0.0)).norm());
        }
        sum = &sum + x;
    }
    worst = worst.max((&sum - &sigma(p)?).spectral_norm()?);
    Ok(worst)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MembershipOutcome {
    /// No conjugator relates the configuration to its Hermitian conjugate.
    NotThetaStable,
    /// A conjugator exists but is indefinite.
    ThetaStableOnly,
    /// Definite conjugator: equivalent to a configuration of Hermitian projectors.
    RealLocus,
    /// A leading minor is too close to zero to decide.
    BoundaryIndeterminate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MembershipReport {
    pub outcome: MembershipOutcome,
    /// Hermitian-normalized conjugator `g` with `x^H g = g x` for all projectors.
    pub conjugator: Option<ComplexMatrix>,
    /// Leading principal minors of `g`.
    pub minors: Vec<f64>,
    /// Dimension of the solution space of the conjugator equations.
    pub solution_dim: usize,
}

/// Sylvester test on a Hermitian matrix: leading minors must exceed
/// `tol * scale^k` (all positive, or alternating for `-g`), with `scale` the
/// largest entry modulus.
pub fn sylvester_classify(g: &ComplexMatrix, tol: f64) -> Result<(MembershipOutcome, Vec<f64>), InvariantsError> {
    let n = g.rows();
    let scale = g.max_abs_entry();
    let mut minors = Vec::with_capacity(n);
    for k in 1..=n {
        minors.push(determinant(&g.leading_block(k))?.re);
    }
    let thresholds: Vec<f64> = (1..=n).map(|k| tol * scale.powi(k as i32)).collect();
    if minors.iter().zip(&thresholds).any(|(m, t)| m.abs() <= *t) {
        return Ok((MembershipOutcome::BoundaryIndeterminate, minors));
    }
    let positive = minors.iter().all(|m| *m > 0.0);
    let negative = minors
        .iter()
        .enumerate()
        .all(|(k, m)| if k % 2 == 0 { *m < 0.0 } else { *m > 0.0 });
    let outcome = if positive || negative {
        MembershipOutcome::RealLocus
    } else {
        MembershipOutcome::ThetaStableOnly
    };
    Ok((outcome, minors))
}

/// Decide whether `c` is fixed by θ up to conjugation and, if so, whether the
/// conjugator is definite (the configuration is equivalent to a Hermitian one).
pub fn membership_test(c: &PairConfiguration, tol: f64) -> Result<MembershipReport, InvariantsError> {
    let mats = c.matrices();
    let comm = commutant_dimension(&mats, tol)?;
    if comm != 1 {
        return Err(InvariantsError::Reducible(comm));
    }
    let d = c.n;
    let dd = d * d;
    // rows: vec(x^H g - g x) = (x^H ⊗ I - I ⊗ x^T) vec(g)
    let mut sys = ComplexMatrix::zeros(mats.len() * dd, dd);
    for (k, x) in mats.iter().enumerate() {
        for a in 0..d {
            for b in 0..d {
                let row = k * dd + a * d + b;
                for e in 0..d {
                    sys[(row, e * d + b)] += x[(e, a)].conj();
                    sys[(row, a * d + e)] -= x[(e, b)];
                }
            }
        }
    }
    let kernel = nullspace(&sys, tol)?;
    match kernel.len() {
        0 => {
            return Ok(MembershipReport {
                outcome: MembershipOutcome::NotThetaStable,
                conjugator: None,
                minors: Vec::new(),
                solution_dim: 0,
            })
        }
        1 => {}
        k => return Err(InvariantsError::Reducible(k)),
    }
    let g = ComplexMatrix::from_vec(d, d, kernel[0].clone())?;
    let h = hermitian_normalize(&g);
    let (outcome, minors) = sylvester_classify(&h, tol)?;
    Ok(MembershipReport {
        outcome,
        conjugator: Some(h),
        minors,
        solution_dim: 1,
    })
}

/// With `g^H = λ g`, return the Hermitian multiple `e^{i arg(λ)/2} g`.
fn hermitian_normalize(g: &ComplexMatrix) -> ComplexMatrix {
    let gh = g.adjoint();
    let num = g
        .data()
        .iter()
        .zip(gh.data())
        .fold(Complex64::zero(), |acc, (a, b)| acc + a.conj() * b);
    let den: f64 = g.data().iter().map(|z| z.norm_sqr()).sum();
    let lambda = num / den;
    let alpha = Complex64::from_polar(1.0, lambda.arg() / 2.0);
    let h = g.scale(alpha);
    (&h + &h.adjoint()).scale_real(0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::standard_pair;
    use crate::relations::restrict;

    fn s6() -> PairConfiguration {
        standard_pair(6, false).unwrap()
    }

    #[test]
    fn fourier_invariants() {
        let c = s6();
        let p = c.p_system.partial_sum(&[0, 1, 2]);
        let u = u_invariants(&p, [c.q(0), c.q(1), c.q(2)]).unwrap();
        assert!((u.u1 - 8.0).abs() < 1e-12 && u.u2.abs() < 1e-12 && (u.u3 + 9.0).abs() < 1e-12);
        let u = u_invariants(&p, [c.q(0), c.q(1), c.q(3)]).unwrap();
        assert!(u.u3.abs() < 1e-12);
        let perm = u_invariants(&p, [c.q(3), c.q(0), c.q(1)]).unwrap();
        assert!((perm.u1 - u.u1).abs() < 1e-12 && (perm.u2 - u.u2).abs() < 1e-12);
    }

    #[test]
    fn differential_matches_central_difference() {
        let c = s6();
        let p = c.p_system.partial_sum(&[0, 1, 2]);
        let mk = |s: f64| {
            ComplexMatrix::from_fn(6, 6, |i, j| {
                Complex64::new((s * (i + 2 * j) as f64).sin(), (s * (3 * i + j) as f64).cos())
            })
        };
        let (dp, dq) = (mk(0.3), [mk(0.7), mk(1.1), mk(1.9)]);
        let q = [c.q(0), c.q(1), c.q(2)];
        let du = u_differential(&p, q, &dp, [&dq[0], &dq[1], &dq[2]]).unwrap();
        let h = 1e-6;
        let shift = |s: f64| {
            let pp = &p + &dp.scale_real(s);
            let qq: Vec<ComplexMatrix> = (0..3).map(|k| q[k] + &dq[k].scale_real(s)).collect();
            u_invariants_complex(&pp, [&qq[0], &qq[1], &qq[2]]).unwrap()
        };
        let (up, um) = (shift(h), shift(-h));
        for k in 0..3 {
            let fd = (up[k] - um[k]) / (2.0 * h);
            assert!(
                (fd - du[k]).norm() <= 1e-6 * (1.0 + du[k].norm()),
                "{k}: {fd} vs {}",
                du[k]
            );
        }
    }

    #[test]
    fn z_examples() {
        let x0 = standard_pair::<f64>(6, true).unwrap();
        let pt = restrict(&x0, &[0, 1, 2]).unwrap();
        let q: Vec<_> = (1..=6).map(|j| pt.get(&format!("q{j}")).unwrap().clone()).collect();
        let (z1, _) = z_functions(pt.get("P").unwrap(), &q).unwrap();
        assert!((z1 - 1.0 / 9.0).abs() < 1e-13);
        assert_eq!(z_functions(&ComplexMatrix::zeros(6, 6), &q).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn involutions() {
        let c = s6();
        let p = c.p_system.partial_sum(&[0, 1, 2]);
        assert_eq!(sigma(&sigma(&p).unwrap()).unwrap(), p);
        assert!((&sigma(&p).unwrap() - &c.p_system.partial_sum(&[3, 4, 5])).max_abs_entry() < 1e-15);
        assert_eq!(tau(&tau(&c)), c);
        assert_eq!(theta(&theta(&c)), c);
        assert_eq!(theta(&c), c);
    }

    #[test]
    fn identity_at_fourier() {
        let c = s6();
        let p = [c.p(0), c.p(1), c.p(2)];
        let q = [c.q(0), c.q(1), c.q(2)];
        let rep = identity_check(p, q).unwrap();
        assert!(rep.gap <= 1e-12, "{rep:?}");
        let rep = identity_check(p, p);
        assert!(matches!(rep, Err(InvariantsError::Precondition { .. })));
    }

    #[test]
    fn affine_relations_at_fourier() {
        let c = s6();
        let p = c.p_system.partial_sum(&[0, 1, 2]);
        let q = c.q_system.partial_sum(&[0, 1, 2]);
        let u = u_invariants(&p, [c.q(0), c.q(1), c.q(2)]).unwrap();
        let (u1, u2) = u12_from_pq(&p, &q);
        assert!((u1.re - u.u1).abs() < 1e-12 && (u2.re - u.u2).abs() < 1e-12);
    }

    #[test]
    fn complement_of_x0() {
        let x0 = standard_pair::<f64>(6, true).unwrap();
        for (subset, rest) in [([0, 1, 2], [3, 4, 5]), ([3, 4, 5], [0, 1, 2])] {
            let p = x0.p_system.partial_sum(&subset);
            let sol = solve_complement(&p, &x0.q_system.projectors, 11, &ComplementOptions::default()).unwrap();
            assert!(sol.residual <= 1e-9);
            for found in &sol.projectors {
                let d = rest
                    .iter()
                    .map(|&k| (found - x0.p(k)).max_abs_entry())
                    .fold(f64::INFINITY, f64::min);
                assert!(d < 1e-9, "{d}");
            }
        }
    }

    #[test]
    fn membership_of_standard_pair() {
        let rep = membership_test(&s6(), 1e-9).unwrap();
        assert_eq!(rep.outcome, MembershipOutcome::RealLocus);
        let g = rep.conjugator.unwrap();
        // proportional to the identity
        let ratio = g[(0, 0)];
        assert!((&g - &ComplexMatrix::identity(6).scale(ratio)).max_abs_entry() < 1e-10);
    }

    #[test]
    fn sylvester_on_definite_and_indefinite() {
        let pos = ComplexMatrix::diagonal(&[Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0)]);
        assert_eq!(sylvester_classify(&pos, 1e-9).unwrap().0, MembershipOutcome::RealLocus);
        let neg = pos.scale_real(-1.0);
        assert_eq!(sylvester_classify(&neg, 1e-9).unwrap().0, MembershipOutcome::RealLocus);
        let indef = ComplexMatrix::diagonal(&[Complex64::new(2.0, 0.0), Complex64::new(-1.0, 0.0)]);
        assert_eq!(
            sylvester_classify(&indef, 1e-9).unwrap().0,
            MembershipOutcome::ThetaStableOnly
        );
        let edge = ComplexMatrix::diagonal(&[Complex64::new(2.0, 0.0), Complex64::new(1e-13, 0.0)]);
        assert_eq!(
            sylvester_classify(&edge, 1e-9).unwrap().0,
            MembershipOutcome::BoundaryIndeterminate
        );
    }
}

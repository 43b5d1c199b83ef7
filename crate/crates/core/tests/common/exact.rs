//! Exact arithmetic in Q(ζ), ζ = exp(iπ/3), for oracle checks of the
//! standard pair in dimensions 2, 3 and 6.
#![allow(dead_code)]

use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};

/// `a + b ζ` with `ζ^2 = ζ - 1`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Z6 {
    pub a: BigRational,
    pub b: BigRational,
}

pub fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

impl Z6 {
    pub fn new(a: BigRational, b: BigRational) -> Self {
        Self { a, b }
    }

    pub fn from_rat(a: BigRational) -> Self {
        Self {
            a,
            b: BigRational::zero(),
        }
    }

    pub fn int(n: i64) -> Self {
        Self::from_rat(rat(n, 1))
    }

    pub fn zero() -> Self {
        Self::int(0)
    }

    pub fn one() -> Self {
        Self::int(1)
    }

    /// `ζ^k`, `k` taken mod 6.
    pub fn zeta_pow(k: i64) -> Self {
        let (o, z) = (rat(1, 1), rat(0, 1));
        match k.rem_euclid(6) {
            0 => Self::new(o, z),
            1 => Self::new(z, o),
            2 => Self::new(-o, rat(1, 1)),
            3 => Self::new(-o, z),
            4 => Self::new(z, -o),
            _ => Self::new(o, -rat(1, 1)),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    /// `conj(ζ) = 1 - ζ`.
    pub fn conj(&self) -> Self {
        Self::new(&self.a + &self.b, -self.b.clone())
    }

    /// Exact real part `a + b/2`; the imaginary part is `b sqrt(3)/2`.
    pub fn re(&self) -> BigRational {
        &self.a + &self.b / rat(2, 1)
    }

    pub fn is_real(&self) -> bool {
        self.b.is_zero()
    }

    pub fn inv(&self) -> Self {
        // (a + bζ)(a + b - bζ) = a^2 + ab + b^2
        let norm = &self.a * &self.a + &self.a * &self.b + &self.b * &self.b;
        let c = self.conj();
        Self::new(c.a / &norm, c.b / norm)
    }

    pub fn to_f64(&self) -> (f64, f64) {
        let f = |r: &BigRational| {
            r.numer().to_string().parse::<f64>().unwrap() / r.denom().to_string().parse::<f64>().unwrap()
        };
        (f(&self.a) + f(&self.b) / 2.0, f(&self.b) * 3f64.sqrt() / 2.0)
    }

    pub fn abs_upper(&self) -> BigRational {
        self.a.abs() + self.b.abs()
    }
}

impl Add for &Z6 {
    type Output = Z6;
    fn add(self, o: &Z6) -> Z6 {
        Z6::new(&self.a + &o.a, &self.b + &o.b)
    }
}

impl Sub for &Z6 {
    type Output = Z6;
    fn sub(self, o: &Z6) -> Z6 {
        Z6::new(&self.a - &o.a, &self.b - &o.b)
    }
}

impl Neg for &Z6 {
    type Output = Z6;
    fn neg(self) -> Z6 {
        Z6::new(-self.a.clone(), -self.b.clone())
    }
}

impl Mul for &Z6 {
    type Output = Z6;
    fn mul(self, o: &Z6) -> Z6 {
        let bd = &self.b * &o.b;
        Z6::new(&self.a * &o.a - &bd, &self.a * &o.b + &self.b * &o.a + bd)
    }
}

/// Square matrix over Q(ζ), row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZMat {
    pub n: usize,
    pub data: Vec<Z6>,
}

impl ZMat {
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> Z6) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        Self { n, data }
    }

    pub fn zero(n: usize) -> Self {
        Self::from_fn(n, |_, _| Z6::zero())
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, |i, j| if i == j { Z6::one() } else { Z6::zero() })
    }

    pub fn at(&self, i: usize, j: usize) -> &Z6 {
        &self.data[i * self.n + j]
    }

    pub fn mul(&self, o: &ZMat) -> ZMat {
        let n = self.n;
        ZMat::from_fn(n, |i, j| {
            let mut acc = Z6::zero();
            for k in 0..n {
                let t = self.at(i, k);
                if !t.is_zero() {
                    acc = &acc + &(t * o.at(k, j));
                }
            }
            acc
        })
    }

    pub fn add(&self, o: &ZMat) -> ZMat {
        ZMat::from_fn(self.n, |i, j| self.at(i, j) + o.at(i, j))
    }

    pub fn sub(&self, o: &ZMat) -> ZMat {
        ZMat::from_fn(self.n, |i, j| self.at(i, j) - o.at(i, j))
    }

    pub fn scale(&self, s: &Z6) -> ZMat {
        ZMat::from_fn(self.n, |i, j| self.at(i, j) * s)
    }

    pub fn trace(&self) -> Z6 {
        (0..self.n).fold(Z6::zero(), |acc, i| &acc + self.at(i, i))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Z6::is_zero)
    }

    pub fn to_f64(&self) -> Vec<(f64, f64)> {
        self.data.iter().map(Z6::to_f64).collect()
    }
}

/// Standard pair over Q(ζ): coordinate projectors and the projectors onto
/// the columns of `(ε^{ij})/sqrt(n)`, `ε = ζ^{6/n}`, `n` dividing 6.
pub fn exact_standard_pair(n: usize, swap34: bool) -> (Vec<ZMat>, Vec<ZMat>) {
    assert!(6 % n == 0);
    let step = (6 / n) as i64;
    let col = |j: usize| -> usize {
        match (swap34, j) {
            (true, 2) => 3,
            (true, 3) => 2,
            _ => j,
        }
    };
    let inv_n = Z6::from_rat(rat(1, n as i64));
    let p = (0..n)
        .map(|k| ZMat::from_fn(n, |i, j| if i == k && j == k { Z6::one() } else { Z6::zero() }))
        .collect();
    let q = (0..n)
        .map(|jj| {
            let j = col(jj) as i64;
            ZMat::from_fn(n, |a, b| &Z6::zeta_pow(step * j * (a as i64 - b as i64)) * &inv_n)
        })
        .collect();
    (p, q)
}

pub fn sum(ms: &[&ZMat]) -> ZMat {
    ms.iter().fold(ZMat::zero(ms[0].n), |acc, m| acc.add(m))
}

/// `Tr(A B A C)`.
pub fn tr_abac(a: &ZMat, b: &ZMat, c: &ZMat) -> Z6 {
    a.mul(b).mul(a).mul(c).trace()
}

/// Exact `(u1, u2, u3)` of `P` against a q-triple.
pub fn exact_u(p: &ZMat, q: [&ZMat; 3]) -> [Z6; 3] {
    let c36 = Z6::int(36);
    let one = Z6::one();
    let t = |i: usize, j: usize| tr_abac(p, q[i], q[j]);
    let (t01, t02, t12) = (t(0, 1), t(0, 2), t(1, 2));
    let u1 = &(&(&t01 + &t02) + &t12) * &c36;
    let pq: Vec<ZMat> = q.iter().map(|x| p.mul(x)).collect();
    let w = |a: usize, b: usize, c: usize| pq[a].mul(&pq[b]).mul(&pq[c]).trace();
    let u2 = &(&w(0, 1, 2) + &w(0, 2, 1)) * &Z6::int(216);
    let f = |x: &Z6| &(x * &c36) - &one;
    let u3 = &(&f(&t01) * &f(&t12)) * &f(&t02);
    [u1, u2, u3]
}

/// Ordered-pair product `prod_{i != j} (36 Tr(B t_i B t_j) - 1)`.
pub fn exact_identity_side(big: &ZMat, t: [&ZMat; 3]) -> Z6 {
    let mut acc = Z6::one();
    for i in 0..3 {
        for j in 0..3 {
            if i != j {
                let f = &(&tr_abac(big, t[i], t[j]) * &Z6::int(36)) - &Z6::one();
                acc = &acc * &f;
            }
        }
    }
    acc
}

/// Rank over Q(ζ) by Gaussian elimination; rows are consumed.
pub fn exact_rank(mut rows: Vec<Vec<Z6>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&r| !rows[r][c].is_zero()) else {
            continue;
        };
        rows.swap(rank, piv);
        let inv = rows[rank][c].inv();
        let pivot_row: Vec<Z6> = rows[rank].iter().map(|x| x * &inv).collect();
        for (r, row) in rows.iter_mut().enumerate() {
            if r != rank && !row[c].is_zero() {
                let f = row[c].clone();
                for k in c..cols {
                    if !pivot_row[k].is_zero() {
                        row[k] = &row[k] - &(&f * &pivot_row[k]);
                    }
                }
            }
        }
        rows[rank] = pivot_row;
        rank += 1;
    }
    rank
}

/// Relations of B_{n,n} as `(coefficient, word)` lists over generators
/// `p_1..p_n, q_1..q_n`; the empty word is the identity.
pub fn bnn_words(n: usize) -> Vec<Vec<(Z6, Vec<usize>)>> {
    let r = Z6::from_rat(rat(1, n as i64));
    let mut rels = Vec::new();
    for i in 0..2 * n {
        rels.push(vec![(Z6::one(), vec![i, i]), (Z6::int(-1), vec![i])]);
    }
    for i in 0..2 * n {
        for j in (i + 1)..2 * n {
            let same_side = (i < n) == (j < n);
            if same_side {
                rels.push(vec![(Z6::one(), vec![i, j])]);
                rels.push(vec![(Z6::one(), vec![j, i])]);
            } else {
                rels.push(vec![(Z6::one(), vec![i, j, i]), (-&r, vec![i])]);
                rels.push(vec![(Z6::one(), vec![j, i, j]), (-&r, vec![j])]);
            }
        }
    }
    for side in [0..n, n..2 * n] {
        let mut terms: Vec<(Z6, Vec<usize>)> = side.map(|k| (Z6::one(), vec![k])).collect();
        terms.push((Z6::int(-1), Vec::new()));
        rels.push(terms);
    }
    rels
}

fn word(x: &[ZMat], w: &[usize], n: usize) -> ZMat {
    w.iter().fold(ZMat::identity(n), |acc, &k| acc.mul(&x[k]))
}

/// Exact relation Jacobian rows: `d(L E_ab R)[s,t] = L[s,a] R[b,t]`.
pub fn exact_jacobian(x: &[ZMat], rels: &[Vec<(Z6, Vec<usize>)>]) -> Vec<Vec<Z6>> {
    let n = x[0].n;
    let nn = n * n;
    let mut rows = vec![vec![Z6::zero(); x.len() * nn]; rels.len() * nn];
    for (ri, rel) in rels.iter().enumerate() {
        for (coeff, w) in rel {
            for pos in 0..w.len() {
                let l = word(x, &w[..pos], n);
                let r = word(x, &w[pos + 1..], n);
                for s in 0..n {
                    for a in 0..n {
                        let la = l.at(s, a) * coeff;
                        if la.is_zero() {
                            continue;
                        }
                        for b in 0..n {
                            for t in 0..n {
                                let v = &la * r.at(b, t);
                                let cell = &mut rows[ri * nn + s * n + t][w[pos] * nn + a * n + b];
                                *cell = &*cell + &v;
                            }
                        }
                    }
                }
            }
        }
    }
    rows
}

/// Orbit vectors `([E_ab, x_k])_k` as rows.
pub fn exact_orbit(x: &[ZMat]) -> Vec<Vec<Z6>> {
    let n = x[0].n;
    let mut out = Vec::new();
    for a in 0..n {
        for b in 0..n {
            let mut v = Vec::new();
            for m in x {
                for s in 0..n {
                    for t in 0..n {
                        let mut z = Z6::zero();
                        if s == a {
                            z = &z + m.at(b, t);
                        }
                        if t == b {
                            z = &z - m.at(s, a);
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

/// Largest entry difference between an exact and a floating matrix.
pub fn max_diff(exact: &ZMat, approx: &orthopair_core::ComplexMatrix) -> f64 {
    exact
        .to_f64()
        .iter()
        .zip(approx.data())
        .map(|((re, im), z)| ((re - z.re).powi(2) + (im - z.im).powi(2)).sqrt())
        .fold(0.0, f64::max)
}

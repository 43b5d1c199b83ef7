//! Defining relations of the algebras B_r(Γ), B_{k,n}, B_{n,n}, A(n), A₃ and
//! C, evaluated on concrete matrices, plus the commutant dimension.

use std::collections::BTreeSet;

use num_traits::Zero;
use thiserror::Error;

use crate::config::{ConfigError, PairConfiguration};
use crate::linalg::{numerical_rank, CMatrix, LinalgError, Real};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RelationsError {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("empty index subset")]
    EmptySubset,
    #[error("index {index} out of range for {len} generators")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("generator list does not match the algebra signature: {0}")]
    Signature(String),
    #[error("projector rank {got} does not match subset size {expected}")]
    RankMismatch { expected: usize, got: usize },
    #[error("sum of r-parameters {sum} is not the rank {rank} of P")]
    RSum { sum: f64, rank: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Undirected graph without loops or multiple edges.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LooplessGraph {
    vertex_count: usize,
    edges: BTreeSet<(usize, usize)>,
}

impl LooplessGraph {
    pub fn new(vertex_count: usize, edges: &[(usize, usize)]) -> Result<Self, RelationsError> {
        let mut set = BTreeSet::new();
        for &(a, b) in edges {
            if a == b {
                return Err(RelationsError::InvalidGraph(format!("loop at vertex {a}")));
            }
            if a >= vertex_count || b >= vertex_count {
                return Err(RelationsError::InvalidGraph(format!(
                    "edge ({a}, {b}) outside {vertex_count} vertices"
                )));
            }
            if !set.insert((a.min(b), a.max(b))) {
                return Err(RelationsError::InvalidGraph(format!("duplicate edge ({a}, {b})")));
            }
        }
        Ok(Self {
            vertex_count,
            edges: set,
        })
    }

    /// Γ_{k,n}: vertices `0..k` on one side, `k..k+n` on the other.
    pub fn complete_bipartite(k: usize, n: usize) -> Self {
        let edges = (0..k).flat_map(|i| (0..n).map(move |j| (i, k + j))).collect();
        Self {
            vertex_count: k + n,
            edges,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges.contains(&(a.min(b), a.max(b)))
    }

    /// Relabel vertex `v` as `perm[v]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self, RelationsError> {
        let edges: Vec<_> = self.edges().map(|(a, b)| (perm[a], perm[b])).collect();
        Self::new(self.vertex_count, &edges)
    }
}

/// `sum coeff * x_{w_1} ... x_{w_k}`; the empty word is the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct Relation<R = f64> {
    pub name: String,
    pub terms: Vec<(R, Vec<usize>)>,
}

impl<R: Real> Relation<R> {
    pub fn new(name: impl Into<String>, terms: Vec<(R, Vec<usize>)>) -> Self {
        Self {
            name: name.into(),
            terms,
        }
    }

    pub fn max_generator(&self) -> Option<usize> {
        self.terms.iter().flat_map(|(_, w)| w.iter().copied()).max()
    }

    pub fn evaluate(&self, x: &[CMatrix<R>]) -> CMatrix<R> {
        let d = x[0].rows();
        let mut acc = CMatrix::zeros(d, d);
        for (coeff, word) in &self.terms {
            let value = word_product(x, word, d);
            acc = &acc + &value.scale_real(*coeff);
        }
        acc
    }
}

pub(crate) fn word_product<R: Real>(x: &[CMatrix<R>], word: &[usize], d: usize) -> CMatrix<R> {
    match word.split_first() {
        None => CMatrix::identity(d),
        Some((&first, rest)) => rest.iter().fold(x[first].clone(), |acc, &k| &acc * &x[k]),
    }
}

fn one<R: Real>() -> R {
    R::one()
}

fn idempotent<R: Real>(k: usize, name: &str) -> Relation<R> {
    Relation::new(
        format!("{name}^2 - {name}"),
        vec![(one(), vec![k, k]), (-one::<R>(), vec![k])],
    )
}

/// Relations of B_r(Γ) on generators indexed by the vertices.
pub fn tl_relations<R: Real>(g: &LooplessGraph, r: R, names: &[String]) -> Vec<Relation<R>> {
    let m = g.vertex_count();
    let mut rels: Vec<Relation<R>> = (0..m).map(|i| idempotent(i, &names[i])).collect();
    for i in 0..m {
        for j in (i + 1)..m {
            let (a, b) = (&names[i], &names[j]);
            if g.has_edge(i, j) {
                rels.push(Relation::new(
                    format!("{a}{b}{a} - r{a}"),
                    vec![(one(), vec![i, j, i]), (-r, vec![i])],
                ));
                rels.push(Relation::new(
                    format!("{b}{a}{b} - r{b}"),
                    vec![(one(), vec![j, i, j]), (-r, vec![j])],
                ));
            } else {
                rels.push(Relation::new(format!("{a}{b}"), vec![(one(), vec![i, j])]));
                rels.push(Relation::new(format!("{b}{a}"), vec![(one(), vec![j, i])]));
            }
        }
    }
    rels
}

pub fn sum_relation<R: Real>(indices: &[usize], name: impl Into<String>) -> Relation<R> {
    let mut terms: Vec<(R, Vec<usize>)> = indices.iter().map(|&k| (one(), vec![k])).collect();
    terms.push((-one::<R>(), Vec::new()));
    Relation::new(name, terms)
}

pub fn pair_names(k: usize, n: usize) -> Vec<String> {
    (1..=k)
        .map(|i| format!("p{i}"))
        .chain((1..=n).map(|j| format!("q{j}")))
        .collect()
}

/// B_{n,n}: Γ_{n,n} with `r = 1/n` and both sum relations; generators
/// `p_1..p_n, q_1..q_n`.
pub fn bnn_relations<R: Real>(n: usize) -> Vec<Relation<R>> {
    let g = LooplessGraph::complete_bipartite(n, n);
    let mut rels = tl_relations(&g, R::one() / R::from_f64(n as f64), &pair_names(n, n));
    rels.push(sum_relation(&(0..n).collect::<Vec<_>>(), "sum p - 1"));
    rels.push(sum_relation(&(n..2 * n).collect::<Vec<_>>(), "sum q - 1"));
    rels
}

pub fn an_names(m: usize) -> Vec<String> {
    std::iter::once("P".to_string())
        .chain((1..=m).map(|j| format!("q{j}")))
        .collect()
}

/// A(n) on generators `P, q_1..q_m`: `P^2 = P`, `q_i^2 = q_i`,
/// `q_i P q_i = r_i q_i` and `sum q_i = 1`.
pub fn an_relations<R: Real>(r: &[R]) -> Vec<Relation<R>> {
    let mut rels = a3_like(r);
    rels.push(sum_relation(&(1..=r.len()).collect::<Vec<_>>(), "sum q - 1"));
    rels
}

fn a3_like<R: Real>(r: &[R]) -> Vec<Relation<R>> {
    let mut rels = vec![idempotent(0, "P")];
    for (i, &ri) in r.iter().enumerate() {
        let k = i + 1;
        rels.push(idempotent(k, &format!("q{k}")));
        rels.push(Relation::new(
            format!("q{k}Pq{k} - r{k}q{k}"),
            vec![(one(), vec![k, 0, k]), (-ri, vec![k])],
        ));
    }
    rels
}

/// A₃ on generators `P, q_1, q_2, q_3` with `q_j P q_j = q_j / 2`.
pub fn a3_relations<R: Real>() -> Vec<Relation<R>> {
    a3_like(&[R::from_f64(0.5); 3])
}

/// C on generators `P, Q`: two idempotents.
pub fn c_relations<R: Real>() -> Vec<Relation<R>> {
    vec![idempotent(0, "P"), idempotent(1, "Q")]
}

fn check_square_common(x: &[CMatrix<impl Real>]) -> Result<usize, RelationsError> {
    let d = x.first().map_or(0, CMatrix::rows);
    for (k, m) in x.iter().enumerate() {
        if m.shape() != (d, d) {
            return Err(RelationsError::DimensionMismatch(format!(
                "generator {} is {:?}, expected {d}x{d}",
                k + 1,
                m.shape()
            )));
        }
    }
    Ok(d)
}

/// Largest spectral-norm violation over `rels` and the name of the worst one.
pub fn evaluate_relations<R: Real>(rels: &[Relation<R>], x: &[CMatrix<R>]) -> Result<(R, String), RelationsError> {
    check_square_common(x)?;
    let mut worst = (R::zero(), String::from("none"));
    for rel in rels {
        if let Some(k) = rel.max_generator() {
            if k >= x.len() {
                return Err(RelationsError::IndexOutOfRange { index: k, len: x.len() });
            }
        }
        let v = rel.evaluate(x).spectral_norm()?;
        if v > worst.0 || worst.1 == "none" {
            worst = (v, rel.name.clone());
        }
    }
    Ok(worst)
}

pub fn tl_residual<R: Real>(g: &LooplessGraph, r: R, x: &[CMatrix<R>]) -> Result<R, RelationsError> {
    if x.len() != g.vertex_count() {
        return Err(RelationsError::DimensionMismatch(format!(
            "{} matrices for {} vertices",
            x.len(),
            g.vertex_count()
        )));
    }
    if x.is_empty() {
        return Ok(R::zero());
    }
    let names: Vec<String> = (1..=x.len()).map(|k| format!("x{k}")).collect();
    Ok(evaluate_relations(&tl_relations(g, r, &names), x)?.0)
}

pub fn bnn_residual<R: Real>(c: &PairConfiguration<R>) -> Result<R, RelationsError> {
    Ok(evaluate_relations(&bnn_relations(c.n), &c.matrices())?.0)
}

pub fn an_residual<R: Real>(p: &CMatrix<R>, q: &[CMatrix<R>], r: &[R]) -> Result<R, RelationsError> {
    if q.len() != r.len() {
        return Err(RelationsError::DimensionMismatch(format!(
            "{} projectors q but {} parameters r",
            q.len(),
            r.len()
        )));
    }
    let mut x = vec![p.clone()];
    x.extend(q.iter().cloned());
    Ok(evaluate_relations(&an_relations(r), &x)?.0)
}

/// `sum r_i = rank P`, the integrality condition on the A(n) parameters.
/// Checked only on request.
pub fn check_r_sum(r: &[f64], rank_p: usize, tol: f64) -> Result<(), RelationsError> {
    let sum: f64 = r.iter().sum();
    if (sum - rank_p as f64).abs() <= tol {
        Ok(())
    } else {
        Err(RelationsError::RSum { sum, rank: rank_p })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgebraTag {
    /// B_r(Γ) for a general loopless graph.
    TemperleyLieb,
    /// B_r(Γ_{k,n}).
    Bkn,
    /// B_{n,n}: Γ_{n,n} with both sum relations.
    Bnn,
    An,
    A3,
    C,
}

/// Named generator matrices of a representation of one of the algebras.
#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraRepPoint<R = f64> {
    pub tag: AlgebraTag,
    /// `[r]` for the Temperley-Lieb types, `r_1..r_m` for A(n), empty otherwise.
    pub parameters: Vec<R>,
    pub generators: Vec<(String, CMatrix<R>)>,
    /// Graph for `TemperleyLieb` and `Bkn`.
    pub graph: Option<LooplessGraph>,
}

impl<R: Real> AlgebraRepPoint<R> {
    pub fn new(
        tag: AlgebraTag,
        parameters: Vec<R>,
        generators: Vec<(String, CMatrix<R>)>,
        graph: Option<LooplessGraph>,
    ) -> Result<Self, RelationsError> {
        let point = Self {
            tag,
            parameters,
            generators,
            graph,
        };
        point.check_signature()?;
        check_square_common(&point.matrices())?;
        Ok(point)
    }

    fn check_signature(&self) -> Result<(), RelationsError> {
        let names: Vec<&str> = self.generators.iter().map(|(n, _)| n.as_str()).collect();
        let expect = |want: Vec<String>| -> Result<(), RelationsError> {
            if names.iter().copied().eq(want.iter().map(String::as_str)) {
                Ok(())
            } else {
                Err(RelationsError::Signature(format!("expected {want:?}, got {names:?}")))
            }
        };
        match self.tag {
            AlgebraTag::TemperleyLieb | AlgebraTag::Bkn => {
                let g = self
                    .graph
                    .as_ref()
                    .ok_or_else(|| RelationsError::Signature("graph required".into()))?;
                if g.vertex_count() != names.len() || self.parameters.len() != 1 {
                    return Err(RelationsError::Signature(format!(
                        "{} generators and {} parameters for a graph on {} vertices",
                        names.len(),
                        self.parameters.len(),
                        g.vertex_count()
                    )));
                }
                Ok(())
            }
            AlgebraTag::Bnn => {
                let n = names.len() / 2;
                expect(pair_names(n, n))
            }
            AlgebraTag::An => {
                if self.parameters.len() + 1 != names.len() {
                    return Err(RelationsError::Signature("one r per q required".into()));
                }
                expect(an_names(names.len().saturating_sub(1)))
            }
            AlgebraTag::A3 => expect(an_names(3)),
            AlgebraTag::C => expect(vec!["P".into(), "Q".into()]),
        }
    }

    pub fn matrices(&self) -> Vec<CMatrix<R>> {
        self.generators.iter().map(|(_, m)| m.clone()).collect()
    }

    pub fn get(&self, name: &str) -> Option<&CMatrix<R>> {
        self.generators.iter().find(|(n, _)| n == name).map(|(_, m)| m)
    }

    pub fn dimension(&self) -> usize {
        self.generators.first().map_or(0, |(_, m)| m.rows())
    }

    pub fn relations(&self) -> Vec<Relation<R>> {
        let names: Vec<String> = self.generators.iter().map(|(n, _)| n.clone()).collect();
        match self.tag {
            AlgebraTag::TemperleyLieb | AlgebraTag::Bkn => tl_relations(
                self.graph.as_ref().expect("checked at construction"),
                self.parameters[0],
                &names,
            ),
            AlgebraTag::Bnn => bnn_relations(names.len() / 2),
            AlgebraTag::An => an_relations(&self.parameters),
            AlgebraTag::A3 => a3_relations(),
            AlgebraTag::C => c_relations(),
        }
    }

    /// Worst relation violation and its name.
    pub fn residual(&self) -> Result<(R, String), RelationsError> {
        evaluate_relations(&self.relations(), &self.matrices())
    }
}

impl<R: Real> PairConfiguration<R> {
    pub fn to_rep_point(&self) -> AlgebraRepPoint<R> {
        let names = pair_names(self.n, self.n);
        AlgebraRepPoint {
            tag: AlgebraTag::Bnn,
            parameters: vec![R::one() / R::from_f64(self.n as f64)],
            generators: names.into_iter().zip(self.matrices()).collect(),
            graph: None,
        }
    }
}

fn check_subset(subset: &[usize], len: usize) -> Result<(), RelationsError> {
    if subset.is_empty() {
        return Err(RelationsError::EmptySubset);
    }
    let mut seen = BTreeSet::new();
    for &i in subset {
        if i >= len {
            return Err(RelationsError::IndexOutOfRange { index: i, len });
        }
        if !seen.insert(i) {
            return Err(RelationsError::Signature(format!("repeated index {}", i + 1)));
        }
    }
    Ok(())
}

/// A(n)-point `P = sum_{i in subset} p_i` together with all `q_j`; the
/// parameters are `r_j = |subset| / n`. Indices are 0-based.
pub fn restrict<R: Real>(c: &PairConfiguration<R>, p_subset: &[usize]) -> Result<AlgebraRepPoint<R>, RelationsError> {
    check_subset(p_subset, c.n)?;
    let p = c.p_system.partial_sum(p_subset);
    let rank = numerical_rank(&p, 1e-8)?.rank;
    if rank != p_subset.len() {
        return Err(RelationsError::RankMismatch {
            expected: p_subset.len(),
            got: rank,
        });
    }
    let r = R::from_f64(p_subset.len() as f64) / R::from_f64(c.n as f64);
    let mut generators = vec![("P".to_string(), p)];
    for j in 0..c.n {
        generators.push((format!("q{}", j + 1), c.q(j).clone()));
    }
    AlgebraRepPoint::new(AlgebraTag::An, vec![r; c.n], generators, None)
}

/// Γ_{k,m}-point on the chosen `p` and `q` projectors with `r = 1/n` (no sum
/// relations). Indices are 0-based.
pub fn restrict_bipartite<R: Real>(
    c: &PairConfiguration<R>,
    p_subset: &[usize],
    q_subset: &[usize],
) -> Result<AlgebraRepPoint<R>, RelationsError> {
    check_subset(p_subset, c.n)?;
    check_subset(q_subset, c.n)?;
    let mut generators: Vec<(String, CMatrix<R>)> = p_subset
        .iter()
        .enumerate()
        .map(|(k, &i)| (format!("p{}", k + 1), c.p(i).clone()))
        .collect();
    generators.extend(
        q_subset
            .iter()
            .enumerate()
            .map(|(k, &j)| (format!("q{}", k + 1), c.q(j).clone())),
    );
    AlgebraRepPoint::new(
        AlgebraTag::Bkn,
        vec![R::one() / R::from_f64(c.n as f64)],
        generators,
        Some(LooplessGraph::complete_bipartite(p_subset.len(), q_subset.len())),
    )
}

/// Matrix of `xi -> (m_1 xi - xi m_1, ..., m_k xi - xi m_k)` acting on the
/// row-major `vec(xi)`; block `k` is `m_k ⊗ I - I ⊗ m_k^T`.
pub fn commutator_system<R: Real>(m: &[CMatrix<R>]) -> Result<CMatrix<R>, RelationsError> {
    let d = check_square_common(m)?;
    let dd = d * d;
    let mut out = CMatrix::zeros(m.len() * dd, dd);
    for (k, x) in m.iter().enumerate() {
        for a in 0..d {
            for b in 0..d {
                let row = k * dd + a * d + b;
                // (m xi)_{ab} = sum_c m_{ac} xi_{cb}
                for c in 0..d {
                    let v = x[(a, c)];
                    out[(row, c * d + b)] = out[(row, c * d + b)] + v;
                }
                // (xi m)_{ab} = sum_c xi_{ac} m_{cb}
                for c in 0..d {
                    let v = x[(c, b)];
                    out[(row, a * d + c)] = out[(row, a * d + c)] - v;
                }
            }
        }
    }
    Ok(out)
}

/// Dimension of `{xi : xi m_i = m_i xi for all i}`; 1 means irreducible.
pub fn commutant_dimension<R: Real>(m: &[CMatrix<R>], tol: f64) -> Result<usize, RelationsError> {
    if m.is_empty() {
        return Err(RelationsError::EmptySubset);
    }
    let d = m[0].rows();
    let sys = commutator_system(m)?;
    if sys.data().iter().all(|z| z.is_zero()) {
        return Ok(d * d);
    }
    let rep = numerical_rank(&sys, tol)?;
    Ok(d * d - rep.rank)
}

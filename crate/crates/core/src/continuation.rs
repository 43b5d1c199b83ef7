//! Predictor-corrector tracing of the family of complex Hadamard matrices in
//! dephased phase coordinates, random-walk sampling and canonical forms.

use std::collections::HashSet;
use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

use crate::config::{from_hadamard, wrap_phase, ConfigError, HadamardPoint};
use crate::invariants::{restricted_invariants, InvariantVector, InvariantsError};
use crate::linalg::dense::{pinv_solve_gapped, spectrum};
use crate::linalg::{LinalgError, SVD_EPS};
use crate::tangent::{unitarity_equations_f64, unitarity_jacobian_f64, DEFAULT_RANK_TOL};

/// Real dimension of the traced family.
pub const FAMILY_DIM: usize = 4;
/// Default corrector stopping tolerance on the unitarity residual.
pub const CORRECTOR_TOL: f64 = 1e-12;
/// Largest residual at which Newton is started.
pub const CORRECTOR_PRECONDITION: f64 = 0.1;
/// Relative cutoff of the truncated pseudo-inverse.
pub const PINV_RCOND: f64 = 1e-10;
/// Singular values below this fraction of the largest one that sit under a
/// gap of at least [`KERNEL_GAP`] are treated as kernel directions.
pub const KERNEL_FLOOR: f64 = 1e-4;
pub const KERNEL_GAP: f64 = 1e3;
/// Largest residual of an emitted path point.
pub const ACCEPT_RESIDUAL: f64 = 1e-10;
pub const MAX_HALVINGS: usize = 5;
/// Default scale of random-walk steps.
pub const DEFAULT_STEP: f64 = 5e-3;
/// Rounding quantum of the canonical-form comparison keys.
pub const CANONICAL_QUANTUM: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ContinuationError {
    #[error("expected a {expected}-dimensional tangent, found defect {found}")]
    Defect { expected: usize, found: usize },
    #[error("residual {residual:e} exceeds the corrector precondition {limit:e}")]
    Precondition { residual: f64, limit: f64 },
    #[error("direction must have {expected} finite components with nonzero norm")]
    Direction { expected: usize },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Invariants(#[from] InvariantsError),
}

type Result<T> = std::result::Result<T, ContinuationError>;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ContinuationOptions {
    pub corrector_tol: f64,
    pub max_iter: usize,
    /// Relative rank tolerance used for the tangent frame.
    pub rank_tol: f64,
    pub accept_residual: f64,
    pub max_halvings: usize,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            corrector_tol: CORRECTOR_TOL,
            max_iter: 20,
            rank_tol: DEFAULT_RANK_TOL,
            accept_residual: ACCEPT_RESIDUAL,
            max_halvings: MAX_HALVINGS,
        }
    }
}

/// Orthonormal kernel basis (columns) of the unitarity Jacobian at `h`.
///
/// With `previous`, the basis is rotated within its span to be as close as
/// possible to `previous` (orthogonal Procrustes), which keeps frame
/// coordinates continuous along a path.
pub fn tangent_frame(h: &HadamardPoint, tol: f64, previous: Option<&DMatrix<f64>>) -> Result<DMatrix<f64>> {
    crate::linalg::check_tol(tol)?;
    let spec = spectrum(&unitarity_jacobian_f64(h), true)?;
    let smax = spec.singular_values.first().copied().unwrap_or(0.0);
    let kernel = spec
        .kernel(tol * smax)
        .ok_or_else(|| LinalgError::DecompositionFailed("missing right singular vectors".into()))?;
    if kernel.ncols() != FAMILY_DIM {
        return Err(ContinuationError::Defect {
            expected: FAMILY_DIM,
            found: kernel.ncols(),
        });
    }
    match previous {
        None => Ok(kernel),
        Some(prev) => {
            let m = kernel.transpose() * prev;
            let svd = m
                .try_svd(true, true, SVD_EPS, 0)
                .ok_or_else(|| LinalgError::DecompositionFailed("procrustes svd".into()))?;
            let (u, v_t) = svd
                .u
                .zip(svd.v_t)
                .ok_or_else(|| LinalgError::DecompositionFailed("procrustes factors".into()))?;
            Ok(kernel * u * v_t)
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NewtonResult {
    /// Best iterate (smallest residual).
    pub point: HadamardPoint,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Residual before each iteration and after the last.
    pub history: Vec<f64>,
}

/// Gauss-Newton projection onto the unitarity variety with truncated
/// pseudo-inverse steps on the phases.
pub fn newton_correct(h: &HadamardPoint, tol: f64, max_iter: usize) -> Result<NewtonResult> {
    let r0 = h.unitarity_residual();
    if r0.is_nan() || r0 > CORRECTOR_PRECONDITION {
        return Err(ContinuationError::Precondition {
            residual: r0,
            limit: CORRECTOR_PRECONDITION,
        });
    }
    let mut current = h.clone();
    let mut residual = r0;
    let mut best = (current.clone(), residual);
    let mut history = vec![residual];
    let mut stalled = 0;
    let mut iterations = 0;
    while residual > tol && iterations < max_iter {
        let f = unitarity_equations_f64(&current);
        let j = unitarity_jacobian_f64(&current);
        let step = pinv_solve_gapped(&j, &f, PINV_RCOND, KERNEL_FLOOR, KERNEL_GAP)?;
        let phases = DVector::from_vec(current.flat()) - step;
        current = HadamardPoint::from_flat(h.n, phases.as_slice())?;
        let next = current.unitarity_residual();
        iterations += 1;
        history.push(next);
        stalled = if next >= residual { stalled + 1 } else { 0 };
        residual = next;
        if residual < best.1 {
            best = (current.clone(), residual);
        }
        if stalled >= 3 || !residual.is_finite() {
            break;
        }
    }
    Ok(NewtonResult {
        converged: best.1 <= tol,
        point: best.0,
        residual: best.1,
        iterations,
        history,
    })
}

/// Distance between phase vectors, each coordinate taken modulo `2 pi`.
pub fn phase_distance(a: &HadamardPoint, b: &HadamardPoint) -> f64 {
    a.flat()
        .iter()
        .zip(b.flat())
        .map(|(x, y)| wrap_phase(x - y).powi(2))
        .sum::<f64>()
        .sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathState {
    pub current: HadamardPoint,
    /// Columns: orthonormal basis of the tangent space at `current`.
    pub tangent_frame: DMatrix<f64>,
    pub step_size: f64,
    pub last_residual: f64,
    pub step_index: usize,
}

impl PathState {
    pub fn new(start: &HadamardPoint, h: f64, opts: &ContinuationOptions) -> Result<Self> {
        let last_residual = start.unitarity_residual();
        if last_residual.is_nan() || last_residual > opts.accept_residual {
            return Err(ContinuationError::Precondition {
                residual: last_residual,
                limit: opts.accept_residual,
            });
        }
        Ok(Self {
            tangent_frame: tangent_frame(start, opts.rank_tol, None)?,
            current: start.clone(),
            step_size: h,
            last_residual,
            step_index: 0,
        })
    }

    /// One predictor-corrector step along `frame * direction` with up to
    /// `max_halvings` halvings. Returns the number of halvings used, or
    /// `None` when every attempt failed (the state is then unchanged).
    pub fn advance(&mut self, direction: &DVector<f64>, opts: &ContinuationOptions) -> Option<usize> {
        let mut h = self.step_size;
        for halvings in 0..=opts.max_halvings {
            if let Some((point, residual, frame)) = self.try_step(direction, h, opts) {
                self.current = point;
                self.last_residual = residual;
                self.tangent_frame = frame;
                self.step_index += 1;
                return Some(halvings);
            }
            h /= 2.0;
        }
        None
    }

    fn try_step(
        &self,
        direction: &DVector<f64>,
        h: f64,
        opts: &ContinuationOptions,
    ) -> Option<(HadamardPoint, f64, DMatrix<f64>)> {
        let delta = &self.tangent_frame * direction * h;
        let predicted = DVector::from_vec(self.current.flat()) + delta;
        let guess = HadamardPoint::from_flat(self.current.n, predicted.as_slice()).ok()?;
        let corrected = newton_correct(&guess, opts.corrector_tol, opts.max_iter).ok()?;
        if !corrected.converged || corrected.residual > opts.accept_residual {
            return None;
        }
        if phase_distance(&self.current, &corrected.point) < h / 2.0 {
            return None;
        }
        let frame = tangent_frame(&corrected.point, opts.rank_tol, Some(&self.tangent_frame)).ok()?;
        Some((corrected.point, corrected.residual, frame))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathStatus {
    Complete,
    /// The corrector failed after all halvings; the path ends early.
    Truncated {
        at_step: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathResult {
    /// Start point followed by one point per successful step.
    pub points: Vec<HadamardPoint>,
    pub residuals: Vec<f64>,
    pub status: PathStatus,
    pub requested_steps: usize,
    pub halvings: usize,
    pub final_state: PathState,
}

impl PathResult {
    pub fn successful_steps(&self) -> usize {
        self.points.len() - 1
    }
}

fn unit_direction(direction: &[f64]) -> Result<DVector<f64>> {
    let d = DVector::from_column_slice(direction);
    let norm = d.norm();
    if direction.len() != FAMILY_DIM || !norm.is_finite() || norm == 0.0 {
        return Err(ContinuationError::Direction { expected: FAMILY_DIM });
    }
    Ok(d / norm)
}

/// Trace `steps` predictor-corrector steps of size `h` from `start` along
/// `direction`, given in coordinates of the start frame.
pub fn trace_path(
    start: &HadamardPoint,
    direction: &[f64],
    steps: usize,
    h: f64,
    opts: &ContinuationOptions,
) -> Result<PathResult> {
    let state = PathState::new(start, h, opts)?;
    trace_from_state(state, direction, steps, opts)
}

/// As [`trace_path`], continuing from an existing state.
pub fn trace_from_state(
    mut state: PathState,
    direction: &[f64],
    steps: usize,
    opts: &ContinuationOptions,
) -> Result<PathResult> {
    let dir = unit_direction(direction)?;
    let mut points = vec![state.current.clone()];
    let mut residuals = vec![state.last_residual];
    let mut halvings = 0;
    let mut status = PathStatus::Complete;
    for k in 0..steps {
        match state.advance(&dir, opts) {
            Some(used) => {
                halvings += used;
                points.push(state.current.clone());
                residuals.push(state.last_residual);
            }
            None => {
                status = PathStatus::Truncated { at_step: k };
                break;
            }
        }
    }
    Ok(PathResult {
        points,
        residuals,
        status,
        requested_steps: steps,
        halvings,
        final_state: state,
    })
}

/// Trace several directions concurrently; results are in input order.
pub fn trace_directions(
    start: &HadamardPoint,
    directions: &[Vec<f64>],
    steps: usize,
    h: f64,
    opts: &ContinuationOptions,
) -> Result<Vec<PathResult>> {
    let state = PathState::new(start, h, opts)?;
    directions
        .par_iter()
        .map(|d| trace_from_state(state.clone(), d, steps, opts))
        .collect()
}

/// Invariants of the `{1,2,3}` restriction against `q1, q2, q3`.
pub fn point_invariants(h: &HadamardPoint) -> Result<InvariantVector> {
    let c = from_hadamard::<f64>(h)?;
    Ok(restricted_invariants(&c, &[0, 1, 2], [0, 1, 2])?)
}

/// Largest ratio `|u(k+1) - u(k)| / |phi(k+1) - phi(k)|` along a path.
pub fn invariant_lipschitz(points: &[HadamardPoint]) -> Result<f64> {
    let inv = points.iter().map(point_invariants).collect::<Result<Vec<_>>>()?;
    let mut c: f64 = 0.0;
    for k in 1..points.len() {
        let (a, b) = (inv[k - 1].as_array(), inv[k].as_array());
        let du = a.iter().zip(&b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
        let dphi = phase_distance(&points[k - 1], &points[k]);
        if dphi > 0.0 {
            c = c.max(du / dphi);
        }
    }
    Ok(c)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SampleMetadata {
    pub step_scale: f64,
    pub corrector_tol: f64,
    pub attempts: usize,
    /// Steps that failed after all halvings.
    pub failures: usize,
    /// Accepted steps whose canonical form was already present.
    pub duplicates: usize,
    pub halvings: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FamilySample {
    pub points: Vec<HadamardPoint>,
    pub invariants: Vec<InvariantVector>,
    pub residuals: Vec<f64>,
    pub seed: u64,
    pub metadata: SampleMetadata,
}

/// Random walk in the tangent frame with Gaussian steps of scale
/// `step_scale`, keeping points with distinct canonical forms. Stops after
/// `count` points or `10 * count` attempts.
pub fn sample_family(
    start: &HadamardPoint,
    count: usize,
    seed: u64,
    step_scale: f64,
    opts: &ContinuationOptions,
) -> Result<FamilySample> {
    let mut state = PathState::new(start, step_scale, opts)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut seen = HashSet::new();
    let mut sample = FamilySample {
        points: Vec::new(),
        invariants: Vec::new(),
        residuals: Vec::new(),
        seed,
        metadata: SampleMetadata {
            step_scale,
            corrector_tol: opts.corrector_tol,
            attempts: 0,
            failures: 0,
            duplicates: 0,
            halvings: 0,
        },
    };
    if count == 0 {
        return Ok(sample);
    }
    seen.insert(canonical_form(start).1);
    sample.invariants.push(point_invariants(start)?);
    sample.points.push(start.clone());
    sample.residuals.push(state.last_residual);
    while sample.points.len() < count && sample.metadata.attempts < 10 * count {
        sample.metadata.attempts += 1;
        let g: Vec<f64> = (0..FAMILY_DIM).map(|_| StandardNormal.sample(&mut rng)).collect();
        let g = DVector::from_vec(g);
        let norm = g.norm();
        if norm == 0.0 {
            continue;
        }
        // the step length is |g| * step_scale along the unit direction g/|g|
        state.step_size = step_scale * norm;
        match state.advance(&(g / norm), opts) {
            Some(used) => {
                sample.metadata.halvings += used;
                if seen.insert(canonical_form(&state.current).1) {
                    sample.invariants.push(point_invariants(&state.current)?);
                    sample.points.push(state.current.clone());
                    sample.residuals.push(state.last_residual);
                } else {
                    sample.metadata.duplicates += 1;
                }
            }
            None => sample.metadata.failures += 1,
        }
    }
    Ok(sample)
}

fn full_phases(h: &HadamardPoint) -> Vec<Vec<f64>> {
    let n = h.n;
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| if i == 0 || j == 0 { 0.0 } else { h.phases[i - 1][j - 1] })
                .collect()
        })
        .collect()
}

fn quantize(phi: f64) -> i64 {
    let full = (2.0 * PI / CANONICAL_QUANTUM).round() as i64;
    let k = (phi.rem_euclid(2.0 * PI) / CANONICAL_QUANTUM).round() as i64;
    if k >= full {
        k - full
    } else {
        k
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for (k, &first) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(k);
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

/// Largest `n` for which every column permutation is tried.
pub const EXHAUSTIVE_CANONICAL_MAX_N: usize = 7;

/// Canonical representative under dephasing and row/column permutations,
/// with its comparison key (phases rounded to [`CANONICAL_QUANTUM`]).
///
/// Every entry is tried as the dephasing pivot; for `n <= 7` every order of
/// the remaining columns is tried, otherwise columns are sorted by key. Rows
/// are then sorted by key and the lexicographically smallest candidate wins
/// (the first one on ties).
pub fn canonical_form(h: &HadamardPoint) -> (HadamardPoint, Vec<i64>) {
    let n = h.n;
    let phi = full_phases(h);
    let mut best: Option<(Vec<i64>, Vec<Vec<f64>>)> = None;
    for r in 0..n {
        for c in 0..n {
            let rows: Vec<usize> = std::iter::once(r).chain((0..n).filter(|&i| i != r)).collect();
            let mut cols: Vec<usize> = std::iter::once(c).chain((0..n).filter(|&j| j != c)).collect();
            let d = |i: usize, j: usize| phi[i][j] - phi[i][c] - phi[r][j] + phi[r][c];
            let orders = if n <= EXHAUSTIVE_CANONICAL_MAX_N {
                permutations(&cols[1..])
            } else {
                let mut rest = cols[1..].to_vec();
                rest.sort_by_cached_key(|&j| {
                    let mut k: Vec<i64> = rows.iter().map(|&i| quantize(d(i, j))).collect();
                    k.sort_unstable();
                    k
                });
                vec![rest]
            };
            for order in orders {
                cols.truncate(1);
                cols.extend(order);
                let mut body: Vec<(Vec<i64>, Vec<f64>)> = rows[1..]
                    .iter()
                    .map(|&i| {
                        let vals: Vec<f64> = cols.iter().map(|&j| d(i, j)).collect();
                        (vals.iter().map(|v| quantize(*v)).collect(), vals)
                    })
                    .collect();
                body.sort_by(|a, b| a.0.cmp(&b.0));
                let key: Vec<i64> = body.iter().flat_map(|(k, _)| k[1..].iter().copied()).collect();
                if best.as_ref().map_or(true, |(bk, _)| key < *bk) {
                    best = Some((key, body.into_iter().map(|(_, v)| v[1..].to_vec()).collect()));
                }
            }
        }
    }
    let (key, phases) = best.expect("n >= 2 gives at least one candidate");
    let point = HadamardPoint::new(n, phases).expect("dephased phases of a valid point");
    (point, key)
}

/// Canonical representatives with duplicates removed, in first-seen order.
pub fn canonical_reduce(points: &[HadamardPoint]) -> Vec<HadamardPoint> {
    let mut seen = HashSet::new();
    points
        .iter()
        .map(canonical_form)
        .filter(|(_, key)| seen.insert(key.clone()))
        .map(|(p, _)| p)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> ContinuationOptions {
        ContinuationOptions::default()
    }

    #[test]
    fn frame_at_fourier() {
        let f6 = HadamardPoint::fourier(6).unwrap();
        let frame = tangent_frame(&f6, 1e-9, None).unwrap();
        assert_eq!(frame.ncols(), 4);
        let j = unitarity_jacobian_f64(&f6);
        for k in 0..4 {
            assert!((&j * frame.column(k)).norm() <= 1e-8);
        }
        assert!((frame.transpose() * &frame - DMatrix::identity(4, 4)).norm() < 1e-12);
        let rotated = tangent_frame(&f6, 1e-9, Some(&frame)).unwrap();
        assert!((&rotated * rotated.transpose() - &frame * frame.transpose()).norm() < 1e-10);
        let f2 = HadamardPoint::fourier(2).unwrap();
        assert!(matches!(
            tangent_frame(&f2, 1e-9, None),
            Err(ContinuationError::Defect { found: 0, .. })
        ));
    }

    #[test]
    fn newton_fixed_point_and_convergence() {
        let f6 = HadamardPoint::fourier(6).unwrap();
        let r = newton_correct(&f6, 1e-12, 10).unwrap();
        assert!(r.converged && r.iterations == 0 && r.point == f6);
        let mut flat = f6.flat();
        for (k, x) in flat.iter_mut().enumerate() {
            *x += 1e-3 * ((k as f64) * 0.77).sin();
        }
        let r = newton_correct(&HadamardPoint::from_flat(6, &flat).unwrap(), 1e-12, 20).unwrap();
        assert!(r.converged && r.residual <= 1e-12 && r.iterations <= 6, "{r:?}");
    }

    #[test]
    fn newton_refuses_far_points() {
        let h = HadamardPoint::new(3, vec![vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(
            newton_correct(&h, 1e-12, 10),
            Err(ContinuationError::Precondition { .. })
        ));
    }

    #[test]
    fn zero_steps_returns_start() {
        let f6 = HadamardPoint::fourier(6).unwrap();
        let p = trace_path(&f6, &[1.0, 0.0, 0.0, 0.0], 0, 1e-2, &opts()).unwrap();
        assert_eq!(p.points, vec![f6]);
        assert_eq!(p.status, PathStatus::Complete);
        assert!(trace_path(&p.points[0], &[0.0; 4], 1, 1e-2, &opts()).is_err());
    }

    #[test]
    fn short_path_is_valid() {
        let f6 = HadamardPoint::fourier(6).unwrap();
        let p = trace_path(&f6, &[0.3, -0.2, 0.5, 0.1], 5, 1e-2, &opts()).unwrap();
        assert_eq!(p.status, PathStatus::Complete);
        assert_eq!(p.successful_steps(), 5);
        for w in p.points.windows(2) {
            assert!(phase_distance(&w[0], &w[1]) >= 5e-3);
            assert!(w[1].unitarity_residual() <= 1e-10);
        }
    }

    #[test]
    fn canonical_form_quotients_symmetries() {
        let f6 = HadamardPoint::fourier(6).unwrap();
        let u = f6.matrix::<f64>();
        let swapped = HadamardPoint::dephase(&u.permute_columns(&[0, 1, 3, 2, 4, 5])).unwrap();
        let shifted = HadamardPoint::dephase(&u.scale(crate::linalg::cis(0.7))).unwrap();
        let (a, ka) = canonical_form(&f6);
        assert_eq!(ka, canonical_form(&swapped).1);
        assert_eq!(ka, canonical_form(&shifted).1);
        let (b, kb) = canonical_form(&a);
        assert_eq!(ka, kb);
        assert!(phase_distance(&a, &b) < 1e-9);
        assert_eq!(canonical_reduce(&[f6.clone(), swapped, shifted]).len(), 1);
    }

    #[test]
    fn quantize_wraps() {
        assert_eq!(quantize(0.0), 0);
        assert_eq!(quantize(2.0 * PI - 1e-12), 0);
        assert_eq!(quantize(-1e-12), 0);
        assert_eq!(permutations(&[1, 2, 3]).len(), 6);
    }
}

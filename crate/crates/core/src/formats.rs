//! JSON file formats and report records.
//!
//! Complex numbers are `[re, im]` pairs and matrices row-major nested arrays.
//! Double-precision reals are written as JSON numbers in shortest round-trip
//! form; extended-precision reals as decimal strings.

use std::io::{self, BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::config::{from_bases, ConfigError, HadamardPoint, PairConfiguration, ProjectorSystem};
use crate::continuation::{PathResult, PathStatus};
use crate::invariants::InvariantVector;
use crate::linalg::{complex_from_f64, CMatrix, Complex64, ComplexMatrix, Real};
use crate::relations::{LooplessGraph, RelationsError};
use crate::tangent::{DefectReport, FiberReport, TangentReport, TangentStatus};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("I/O error: {0}")]
    Io(#[from] io::Error),
    #[error("bad shape: {0}")]
    Shape(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Relations(#[from] RelationsError),
}

pub type JsonComplex = [f64; 2];
pub type JsonMatrix = Vec<Vec<JsonComplex>>;

pub fn matrix_to_json<R: Real>(m: &CMatrix<R>) -> JsonMatrix {
    (0..m.rows())
        .map(|i| m.row(i).iter().map(|z| [z.re.to_f64(), z.im.to_f64()]).collect())
        .collect()
}

/// Rectangular check and conversion; `expected` is the required `(rows, cols)`.
pub fn matrix_from_json<R: Real>(
    m: &JsonMatrix,
    expected: (usize, usize),
    what: &str,
) -> Result<CMatrix<R>, FormatError> {
    if m.len() != expected.0 || m.iter().any(|r| r.len() != expected.1) {
        return Err(FormatError::Shape(format!(
            "{what}: expected a {}x{} matrix",
            expected.0, expected.1
        )));
    }
    let mut out = CMatrix::zeros(expected.0, expected.1);
    for (i, row) in m.iter().enumerate() {
        for (j, z) in row.iter().enumerate() {
            out[(i, j)] = complex_from_f64(Complex64::new(z[0], z[1]));
        }
    }
    Ok(out)
}

/// Pair file: two bases (columns are basis vectors) or two projector lists.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "format", rename_all = "lowercase", deny_unknown_fields)]
pub enum PairFile {
    Bases {
        n: usize,
        e_basis: JsonMatrix,
        f_basis: JsonMatrix,
    },
    Projectors {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        p: Vec<JsonMatrix>,
        q: Vec<JsonMatrix>,
    },
}

impl PairFile {
    pub fn from_bases(e: &ComplexMatrix, f: &ComplexMatrix) -> Self {
        PairFile::Bases {
            n: e.rows(),
            e_basis: matrix_to_json(e),
            f_basis: matrix_to_json(f),
        }
    }

    pub fn from_configuration<R: Real>(c: &PairConfiguration<R>) -> Self {
        PairFile::Projectors {
            n: Some(c.n),
            p: c.p_system.projectors.iter().map(matrix_to_json).collect(),
            q: c.q_system.projectors.iter().map(matrix_to_json).collect(),
        }
    }

    /// Build the configuration without validating its relations.
    pub fn to_configuration<R: Real>(&self) -> Result<PairConfiguration<R>, FormatError> {
        match self {
            PairFile::Bases { n, e_basis, f_basis } => {
                check_n(*n)?;
                let e = matrix_from_json(e_basis, (*n, *n), "e_basis")?;
                let f = matrix_from_json(f_basis, (*n, *n), "f_basis")?;
                Ok(from_bases(&e, &f)?)
            }
            PairFile::Projectors { n, p, q } => {
                let d = n.unwrap_or(p.len());
                check_n(d)?;
                if p.len() != d || q.len() != d {
                    return Err(FormatError::Shape(format!(
                        "expected {d} p's and {d} q's, got {} and {}",
                        p.len(),
                        q.len()
                    )));
                }
                let load = |list: &[JsonMatrix], name: &str| -> Result<Vec<CMatrix<R>>, FormatError> {
                    list.iter()
                        .enumerate()
                        .map(|(k, m)| matrix_from_json(m, (d, d), &format!("{name}{}", k + 1)))
                        .collect()
                };
                Ok(PairConfiguration::new(
                    ProjectorSystem::new(load(p, "p")?)?,
                    ProjectorSystem::new(load(q, "q")?)?,
                )?)
            }
        }
    }
}

fn check_n(n: usize) -> Result<(), FormatError> {
    if n < 2 {
        return Err(ConfigError::InvalidDimension { min: 2, got: n }.into());
    }
    Ok(())
}

/// Dephased Hadamard file: `(n-1) x (n-1)` phases in radians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HadamardFile {
    pub n: usize,
    pub phases: Vec<Vec<f64>>,
}

impl HadamardFile {
    pub fn to_point(&self) -> Result<HadamardPoint, FormatError> {
        Ok(HadamardPoint::new(self.n, self.phases.clone())?)
    }
}

impl From<&HadamardPoint> for HadamardFile {
    fn from(h: &HadamardPoint) -> Self {
        Self {
            n: h.n,
            phases: h.phases.clone(),
        }
    }
}

/// Graph file; vertices are numbered from 1.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum GraphFile {
    Explicit { vertices: usize, edges: Vec<[usize; 2]> },
    Bipartite { bipartite: [usize; 2] },
}

impl GraphFile {
    pub fn to_graph(&self) -> Result<LooplessGraph, FormatError> {
        match self {
            GraphFile::Explicit { vertices, edges } => {
                let zero_based = edges
                    .iter()
                    .map(|[a, b]| match (a.checked_sub(1), b.checked_sub(1)) {
                        (Some(a), Some(b)) => Ok((a, b)),
                        _ => Err(FormatError::Shape("vertices are numbered from 1".into())),
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                Ok(LooplessGraph::new(*vertices, &zero_based)?)
            }
            GraphFile::Bipartite { bipartite: [k, n] } => Ok(LooplessGraph::complete_bipartite(*k, *n)),
        }
    }
}

/// A real as a JSON number (double) or a decimal string (extended).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum JsonReal {
    Number(f64),
    Text(String),
}

impl JsonReal {
    pub fn from_real<R: Real>(x: R) -> Self {
        if R::EXTENDED {
            JsonReal::Text(x.to_string())
        } else {
            JsonReal::Number(x.to_f64())
        }
    }

    pub fn to_f64(&self) -> Option<f64> {
        match self {
            JsonReal::Number(x) => Some(*x),
            JsonReal::Text(s) => s.trim().parse().ok(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvariantsRecord {
    pub u1: JsonReal,
    pub u2: JsonReal,
    pub u3: JsonReal,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z1: Option<JsonReal>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z2: Option<JsonReal>,
    pub imag_residue: JsonReal,
}

impl InvariantsRecord {
    pub fn new<R: Real>(u: &InvariantVector<R>, z: Option<(R, R)>) -> Self {
        Self {
            u1: JsonReal::from_real(u.u1),
            u2: JsonReal::from_real(u.u2),
            u3: JsonReal::from_real(u.u3),
            z1: z.map(|z| JsonReal::from_real(z.0)),
            z2: z.map(|z| JsonReal::from_real(z.1)),
            imag_residue: JsonReal::from_real(u.imag_residue),
        }
    }
}

fn status_name(s: TangentStatus) -> String {
    match s {
        TangentStatus::Determinate => "determinate".into(),
        TangentStatus::Indeterminate => "indeterminate".into(),
    }
}

/// Infinite gap ratios (nothing below the cut) are written as `null`.
fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TangentRecord {
    pub nullity: usize,
    pub orbit_dim: usize,
    pub moduli_dim: usize,
    pub gap_ratio: Option<f64>,
    pub singular_values: Vec<f64>,
    pub status: String,
}

impl From<&TangentReport> for TangentRecord {
    fn from(r: &TangentReport) -> Self {
        Self {
            nullity: r.nullity,
            orbit_dim: r.orbit_dim,
            moduli_dim: r.moduli_dim,
            gap_ratio: finite(r.gap_ratio),
            singular_values: r.singular_values.clone(),
            status: status_name(r.status),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectRecord {
    pub defect: usize,
    pub gap_ratio: Option<f64>,
    pub singular_values: Vec<JsonReal>,
    pub status: String,
}

impl<R: Real> From<&DefectReport<R>> for DefectRecord {
    fn from(r: &DefectReport<R>) -> Self {
        Self {
            defect: r.defect,
            gap_ratio: finite(r.gap_ratio),
            singular_values: r.singular_values.iter().map(|s| JsonReal::from_real(*s)).collect(),
            status: status_name(r.status),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FiberRecord {
    pub rank: usize,
    pub moduli_dim: usize,
    pub normalized_singular_values: Vec<f64>,
    pub gap_ratio: Option<f64>,
    pub flags: Vec<String>,
}

impl From<&FiberReport> for FiberRecord {
    fn from(r: &FiberReport) -> Self {
        Self {
            rank: r.rank,
            moduli_dim: r.moduli_dim,
            normalized_singular_values: r.normalized_singular_values.clone(),
            gap_ratio: finite(r.gap_ratio),
            flags: r.flags.clone(),
        }
    }
}

/// One line of a family dump.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilyRecord {
    pub phases: Vec<Vec<f64>>,
    pub residual: f64,
    pub invariants: InvariantsRecord,
    pub step: usize,
    pub path: usize,
}

impl FamilyRecord {
    pub fn new(h: &HadamardPoint, residual: f64, u: &InvariantVector, step: usize, path: usize) -> Self {
        Self {
            phases: h.phases.clone(),
            residual,
            invariants: InvariantsRecord::new(u, None),
            step,
            path,
        }
    }

    pub fn point(&self) -> Result<HadamardPoint, FormatError> {
        Ok(HadamardPoint::new(self.phases.len() + 1, self.phases.clone())?)
    }
}

/// Summary of one traced path.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PathSummary {
    pub path: usize,
    pub requested_steps: usize,
    pub successful_steps: usize,
    pub halvings: usize,
    pub truncated_at: Option<usize>,
}

impl PathSummary {
    pub fn new(path: usize, r: &PathResult) -> Self {
        Self {
            path,
            requested_steps: r.requested_steps,
            successful_steps: r.successful_steps(),
            halvings: r.halvings,
            truncated_at: match r.status {
                PathStatus::Complete => None,
                PathStatus::Truncated { at_step } => Some(at_step),
            },
        }
    }
}

pub fn write_jsonl<T: Serialize, W: Write>(records: &[T], mut w: W) -> Result<(), FormatError> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_jsonl<T: for<'de> Deserialize<'de>, B: BufRead>(r: B) -> Result<Vec<T>, FormatError> {
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        if !line.trim().is_empty() {
            out.push(serde_json::from_str(&line)?);
        }
    }
    Ok(out)
}

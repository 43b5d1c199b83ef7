//! Reading input files and parsing index lists.

use std::fs;
use std::path::Path;

use orthopair_core::config::{from_hadamard_unchecked, to_hadamard};
use orthopair_core::formats::{GraphFile, HadamardFile, PairFile};
use orthopair_core::{HadamardPoint, LooplessGraph, PairConfiguration, Real};
use serde_json::Value;

use crate::report::{usage, CliError};

/// Contents of a point file: a pair of projector systems or Hadamard phases.
pub enum PointFile {
    Pair(PairFile),
    Hadamard(HadamardFile),
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| usage(format!("{}: malformed JSON: {e}", path.display())))
}

pub fn read_point_file(path: &Path) -> Result<PointFile, CliError> {
    let value = read_json(path)?;
    let malformed = |e: serde_json::Error| usage(format!("{}: {e}", path.display()));
    if value.get("format").is_some() {
        Ok(PointFile::Pair(serde_json::from_value(value).map_err(malformed)?))
    } else if value.get("phases").is_some() {
        Ok(PointFile::Hadamard(serde_json::from_value(value).map_err(malformed)?))
    } else {
        Err(usage(format!(
            "{}: expected a pair file (\"format\") or a Hadamard file (\"phases\")",
            path.display()
        )))
    }
}

/// Configuration at precision `R`. Hadamard files are expanded without a
/// unitarity check so that off-variety inputs reach the residual reports.
pub fn load_configuration<R: Real>(path: &Path) -> Result<PairConfiguration<R>, CliError> {
    match read_point_file(path)? {
        PointFile::Pair(f) => f
            .to_configuration()
            .map_err(|e| usage(format!("{}: {e}", path.display()))),
        PointFile::Hadamard(f) => {
            let h = f.to_point().map_err(|e| usage(format!("{}: {e}", path.display())))?;
            Ok(from_hadamard_unchecked(&h))
        }
    }
}

/// Dephased Hadamard point; pair files are gauge-fixed with `tol`.
/// The inner error is a library failure on well-formed input.
pub fn load_point(path: &Path, tol: f64) -> Result<Result<HadamardPoint, String>, CliError> {
    match read_point_file(path)? {
        PointFile::Hadamard(f) => f
            .to_point()
            .map(Ok)
            .map_err(|e| usage(format!("{}: {e}", path.display()))),
        PointFile::Pair(f) => {
            let c: PairConfiguration = f
                .to_configuration()
                .map_err(|e| usage(format!("{}: {e}", path.display())))?;
            Ok(to_hadamard(&c, tol).map_err(|e| e.to_string()))
        }
    }
}

pub fn load_graph(path: &Path) -> Result<LooplessGraph, CliError> {
    let value = read_json(path)?;
    let file: GraphFile =
        serde_json::from_value(value).map_err(|e| usage(format!("{}: not a graph file: {e}", path.display())))?;
    file.to_graph().map_err(|e| usage(format!("{}: {e}", path.display())))
}

/// Comma-separated 1-based indices, returned 0-based; distinct and at most `n`.
pub fn parse_subset(text: &str, n: usize, size: Option<usize>, what: &str) -> Result<Vec<usize>, CliError> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let k: usize = part
            .trim()
            .parse()
            .map_err(|_| usage(format!("{what}: '{part}' is not a positive integer")))?;
        if k == 0 || k > n {
            return Err(usage(format!("{what}: index {k} outside 1..={n}")));
        }
        if out.contains(&(k - 1)) {
            return Err(usage(format!("{what}: repeated index {k}")));
        }
        out.push(k - 1);
    }
    if let Some(s) = size {
        if out.len() != s {
            return Err(usage(format!("{what}: expected {s} indices, got {}", out.len())));
        }
    }
    Ok(out)
}

/// Comma-separated reals.
pub fn parse_reals(text: &str, what: &str) -> Result<Vec<f64>, CliError> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .ok()
                .filter(|x| x.is_finite())
                .ok_or_else(|| usage(format!("{what}: '{p}' is not a finite number")))
        })
        .collect()
}

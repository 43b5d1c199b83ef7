//! Command implementations.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use orthopair_core::config::{standard_pair, to_hadamard};
use orthopair_core::continuation::{
    point_invariants, sample_family, trace_directions, ContinuationOptions, PathStatus, FAMILY_DIM,
};
use orthopair_core::formats::{
    matrix_to_json, write_jsonl, DefectRecord, FamilyRecord, FiberRecord, HadamardFile, InvariantsRecord, JsonReal,
    PairFile, PathSummary, TangentRecord,
};
use orthopair_core::invariants::{
    identity_check, identity_check_unordered, membership_test, solve_complement, u_invariants, u_invariants_complex,
    z_functions, ComplementOptions, MembershipOutcome,
};
use orthopair_core::relations::{evaluate_relations, pair_names, restrict, restrict_bipartite, tl_relations};
use orthopair_core::tangent::{
    a6_moduli_tangent_dim, an_dimension_formula, dephased_defect, fiber_rank_check, moduli_tangent_dim,
    x33_moduli_tangent_dim, TangentStatus,
};
use orthopair_core::{DoubleDouble, PairConfiguration, Real};
use serde::Serialize;

use crate::args::{Cli, Command, Global, Model, Precision};
use crate::input::{load_configuration, load_graph, load_point, parse_reals, parse_subset};
use crate::report::{usage, CliError, CliResult, Outcome, Status};

/// Smallest tolerance that double (or double-double) data can meet.
const DOUBLE_TOL_FLOOR: f64 = 1e-15;
const EXTENDED_TOL_FLOOR: f64 = 1e-30;

/// Imaginary parts of the invariants above this are reported.
const IMAG_RESIDUE_WARN: f64 = 1e-8;

pub fn run(cli: &Cli) -> CliResult {
    let g = &cli.global;
    check_positive(g.tol, "--tol")?;
    if g.precision == Precision::Extended && !cli.command.supports_extended() {
        return Err(usage(format!(
            "{} does not support --precision extended",
            cli.command.name()
        )));
    }
    let mut outcome = match &cli.command {
        Command::StandardPair { n, swap34, out } => match g.precision {
            Precision::Double => standard_pair_cmd::<f64>(g, *n, *swap34, out.as_deref()),
            Precision::Extended => standard_pair_cmd::<DoubleDouble>(g, *n, *swap34, out.as_deref()),
        },
        Command::Verify { file } => match g.precision {
            Precision::Double => verify::<f64>(g, file),
            Precision::Extended => verify::<DoubleDouble>(g, file),
        },
        Command::Invariants { file, p, q } => match g.precision {
            Precision::Double => invariants::<f64>(g, file, p, q),
            Precision::Extended => invariants::<DoubleDouble>(g, file, p, q),
        },
        Command::Tangent {
            file,
            model,
            p,
            q,
            rank_tol,
            fiber,
        } => tangent(g, file, *model, p.as_deref(), q.as_deref(), *rank_tol, *fiber),
        Command::Defect { file, rank_tol } => match g.precision {
            Precision::Double => defect::<f64>(g, file, *rank_tol),
            Precision::Extended => defect::<DoubleDouble>(g, file, *rank_tol),
        },
        Command::Trace {
            start,
            directions,
            steps,
            step,
            out,
        } => trace(g, start, directions, *steps, *step, out),
        Command::Sample {
            start,
            count,
            step,
            out,
        } => sample(g, start, *count, *step, out),
        Command::Membership { file, rank_tol } => membership(g, file, *rank_tol),
        Command::Identity { file, p, q, unordered } => match g.precision {
            Precision::Double => identity::<f64>(g, file, p, q, *unordered),
            Precision::Extended => identity::<DoubleDouble>(g, file, p, q, *unordered),
        },
        Command::Complement { file, p } => complement(g, file, p),
        Command::ToHadamard { pair, out } => to_hadamard_cmd(g, pair, out.as_deref()),
        Command::TlCheck { graph, pair, r } => tl_check(g, graph, pair, *r),
    }?;
    let mut head = serde_json::Map::new();
    head.insert("command".into(), cli.command.name().into());
    head.insert("status".into(), outcome.status.name().into());
    head.insert(
        "precision".into(),
        match g.precision {
            Precision::Double => "double",
            Precision::Extended => "extended",
        }
        .into(),
    );
    head.append(&mut outcome.payload);
    outcome.payload = head;
    Ok(outcome)
}

fn check_positive(x: f64, what: &str) -> Result<(), CliError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(usage(format!("{what} must be a positive finite number, got {x}")))
    }
}

fn require_seed(g: &Global, command: &str) -> Result<u64, CliError> {
    g.seed
        .ok_or_else(|| usage(format!("{command} is randomized and requires --seed")))
}

fn real<R: Real>(x: R) -> JsonReal {
    JsonReal::from_real(x)
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<(), CliError> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))?;
    w.write_all(b"\n")
        .and_then(|_| w.flush())
        .map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

fn write_records<T: Serialize>(path: &Path, records: &[T]) -> Result<(), CliError> {
    write_jsonl(records, create(path)?).map_err(|e| usage(format!("cannot write {}: {e}", path.display())))
}

/// Fail unless the configuration satisfies its relations to `tol`.
fn require_valid<R: Real>(c: &PairConfiguration<R>, tol: f64) -> Result<(), Outcome> {
    let b = match c.residual_breakdown() {
        Ok(b) => b,
        Err(e) => return Err(Outcome::failure(e)),
    };
    if b.max().to_f64() <= tol {
        return Ok(());
    }
    let mut o = Outcome::new(Status::Fail)
        .with("residual", real(b.max()))
        .with("worst_relation", b.worst());
    o.note(format!(
        "input is not a valid configuration: {} = {:e} exceeds tol {:e}",
        b.worst(),
        b.max().to_f64(),
        tol
    ));
    Err(o)
}

fn standard_pair_cmd<R: Real>(g: &Global, n: usize, swap34: bool, out: Option<&Path>) -> CliResult {
    if n < 2 {
        return Err(usage(format!("--n must be at least 2, got {n}")));
    }
    if swap34 && n < 4 {
        return Err(usage(format!("--swap34 needs n >= 4, got {n}")));
    }
    let c = standard_pair::<R>(n, swap34).map_err(|e| usage(e.to_string()))?;
    let file = PairFile::from_configuration(&c);
    // residual of the data as written, evaluated at the working precision
    let written: PairConfiguration<R> = match file.to_configuration() {
        Ok(w) => w,
        Err(e) => return Ok(Outcome::failure(e)),
    };
    let b = match written.residual_breakdown() {
        Ok(b) => b,
        Err(e) => return Ok(Outcome::failure(e)),
    };
    let status = if b.max().to_f64() <= g.tol {
        Status::Ok
    } else {
        Status::Fail
    };
    let mut o = Outcome::new(status)
        .with("n", n)
        .with("swap34", swap34)
        .with("residual", real(b.max()))
        .with("worst_relation", b.worst());
    match out {
        Some(path) => {
            write_json(path, &file)?;
            o.set("out", path.display().to_string());
        }
        None => o.set("pair", &file),
    }
    Ok(o)
}

fn verify<R: Real>(g: &Global, file: &Path) -> CliResult {
    let c: PairConfiguration<R> = load_configuration(file)?;
    let b = match c.residual_breakdown() {
        Ok(b) => b,
        Err(e) => return Ok(Outcome::failure(e)),
    };
    let target = R::one() / R::from_f64(c.n as f64);
    let deviations: Vec<Vec<JsonReal>> = c
        .overlap_traces()
        .iter()
        .map(|row| {
            row.iter()
                .map(|t| {
                    let re = t.re - target;
                    real((re * re + t.im * t.im).sqrt())
                })
                .collect()
        })
        .collect();
    let max = b.max();
    let mut o = Outcome::new(if max.to_f64() <= g.tol {
        Status::Ok
    } else {
        Status::Fail
    })
    .with("n", c.n)
    .with("tol", g.tol)
    .with("p_system", real(b.p_system))
    .with("p_worst", &b.p_worst)
    .with("q_system", real(b.q_system))
    .with("q_worst", &b.q_worst)
    .with("unbiasedness", real(b.unbiasedness))
    .with("unbiasedness_worst", &b.unbiasedness_worst)
    .with("hermiticity", real(c.hermiticity_residual()))
    .with("overlap_deviations", deviations)
    .with("max_residual", real(max))
    .with("worst_relation", b.worst());
    let floor = if R::EXTENDED {
        EXTENDED_TOL_FLOOR
    } else {
        DOUBLE_TOL_FLOOR
    };
    if g.tol < floor {
        o.demote(Status::Fail);
        o.note(format!(
            "tol {:e} is below the {:e} floor of {} precision data",
            g.tol,
            floor,
            if R::EXTENDED { "extended" } else { "double" }
        ));
    }
    if o.status == Status::Fail && max.to_f64() > g.tol {
        o.note(format!("{} = {:e} exceeds tol {:e}", b.worst(), max.to_f64(), g.tol));
    }
    Ok(o)
}

fn invariants<R: Real>(g: &Global, file: &Path, p: &str, q: &str) -> CliResult {
    let c: PairConfiguration<R> = load_configuration(file)?;
    if c.n != 6 {
        return Err(usage(format!("invariants are defined in dimension 6, got {}", c.n)));
    }
    let ps = parse_subset(p, c.n, Some(3), "--p")?;
    let qs = parse_subset(q, c.n, Some(3), "--q")?;
    let mut o = Outcome::new(Status::Ok);
    if let Err(bad) = require_valid(&c, g.tol) {
        o = bad;
    }
    let big_p = c.p_system.partial_sum(&ps);
    let u = match u_invariants(&big_p, [c.q(qs[0]), c.q(qs[1]), c.q(qs[2])]) {
        Ok(u) => u,
        Err(e) => return Ok(Outcome::failure(e)),
    };
    let z = match z_functions(&big_p, &c.q_system.projectors) {
        Ok(z) => z,
        Err(e) => return Ok(Outcome::failure(e)),
    };
    if u.imag_residue.to_f64() > IMAG_RESIDUE_WARN {
        o.note(format!(
            "invariants have imaginary parts up to {:e}; real parts reported",
            u.imag_residue.to_f64()
        ));
        o.set("imag_residue_flag", true);
        match u_invariants_complex(&big_p, [c.q(qs[0]), c.q(qs[1]), c.q(qs[2])]) {
            Ok(zs) => {
                let parts: Vec<[JsonReal; 2]> = zs.iter().map(|z| [real(z.re), real(z.im)]).collect();
                o.set("complex_invariants", parts);
            }
            Err(e) => return Ok(Outcome::failure(e)),
        }
    }
    o.set("p", ps.iter().map(|i| i + 1).collect::<Vec<_>>());
    o.set("q", qs.iter().map(|i| i + 1).collect::<Vec<_>>());
    o.set("invariants", InvariantsRecord::new(&u, Some(z)));
    Ok(o)
}

#[allow(clippy::too_many_arguments)]
fn tangent(
    g: &Global,
    file: &Path,
    model: Model,
    p: Option<&str>,
    q: Option<&str>,
    rank_tol: f64,
    fiber: bool,
) -> CliResult {
    check_positive(rank_tol, "--rank-tol")?;
    match model {
        Model::Bnn if p.is_some() || q.is_some() => return Err(usage("--p/--q apply to the a6 and x33 models")),
        Model::A6 if q.is_some() => return Err(usage("--q applies to the x33 model")),
        _ => {}
    }
    if fiber && model != Model::X33 {
        return Err(usage("--fiber applies to the x33 model"));
    }
    let c: PairConfiguration = load_configuration(file)?;
    if let Err(bad) = require_valid(&c, g.tol) {
        return Ok(bad);
    }
    let ps = parse_subset(p.unwrap_or("1,2,3"), c.n, None, "--p")?;
    let mut o = Outcome::new(Status::Ok);
    let report = match model {
        Model::Bnn => moduli_tangent_dim(&c, rank_tol),
        Model::A6 => {
            o.set("formula_dim", an_dimension_formula(c.n as i64, ps.len() as i64));
            restrict(&c, &ps)
                .map_err(Into::into)
                .and_then(|point| a6_moduli_tangent_dim(&point, rank_tol))
        }
        Model::X33 => {
            if ps.len() != 3 {
                return Err(usage("--p: the x33 model takes exactly 3 indices"));
            }
            let qs = parse_subset(q.unwrap_or("1,2,3"), c.n, Some(3), "--q")?;
            let point = match restrict_bipartite(&c, &ps, &qs) {
                Ok(x) => x,
                Err(e) => return Ok(Outcome::failure(e)),
            };
            if fiber {
                match fiber_rank_check(&point, rank_tol) {
                    Ok(f) => {
                        for flag in &f.flags {
                            o.note(format!("fiber: {flag}"));
                        }
                        o.set("fiber", FiberRecord::from(&f));
                    }
                    Err(e) => return Ok(Outcome::failure(e)),
                }
            }
            x33_moduli_tangent_dim(&point, rank_tol)
        }
    };
    let report = match report {
        Ok(r) => r,
        Err(e) => return Ok(Outcome::failure(e)),
    };
    if report.status == TangentStatus::Indeterminate {
        o.demote(Status::Indeterminate);
        o.note(format!(
            "singular-value gap ratio {:e} below the decision threshold",
            report.gap_ratio.min(report.orbit_gap_ratio)
        ));
    }
    o.set(
        "model",
        match model {
            Model::Bnn => "bnn",
            Model::A6 => "a6",
            Model::X33 => "x33",
        },
    );
    o.set("rank_tol", rank_tol);
    o.set("tangent", TangentRecord::from(&report));
    o.set(
        "orbit_gap_ratio",
        Some(report.orbit_gap_ratio).filter(|x| x.is_finite()),
    );
    Ok(o)
}

fn defect<R: Real>(g: &Global, file: &Path, rank_tol: f64) -> CliResult {
    check_positive(rank_tol, "--rank-tol")?;
    let h = match load_point(file, g.tol)? {
        Ok(h) => h,
        Err(e) => return Ok(Outcome::failure(e)),
    };
    let rep = match dephased_defect::<R>(&h, rank_tol) {
        Ok(r) => r,
        Err(e) => {
            let mut o = Outcome::failure(e);
            o.set("unitarity_residual", h.unitarity_residual());
            return Ok(o);
        }
    };
    let mut o = Outcome::new(Status::Ok)
        .with("n", h.n)
        .with("rank_tol", rank_tol)
        .with("unitarity_residual", h.unitarity_residual())
        .with("defect", DefectRecord::from(&rep));
    if rep.status == TangentStatus::Indeterminate {
        o.demote(Status::Indeterminate);
        o.note(format!(
            "singular-value gap ratio {:e} below the decision threshold",
            rep.gap_ratio
        ));
    }
    Ok(o)
}

fn coordinate_directions() -> Vec<Vec<f64>> {
    (0..FAMILY_DIM)
        .map(|k| (0..FAMILY_DIM).map(|i| if i == k { 1.0 } else { 0.0 }).collect())
        .collect()
}

fn trace(g: &Global, start: &Path, directions: &[String], steps: usize, step: f64, out: &Path) -> CliResult {
    check_positive(step, "--step")?;
    let dirs = if directions.is_empty() {
        coordinate_directions()
    } else {
        let mut dirs = Vec::new();
        for d in directions {
            let v = parse_reals(d, "--direction")?;
            if v.len() != FAMILY_DIM || v.iter().all(|x| *x == 0.0) {
                return Err(usage(format!(
                    "--direction needs {FAMILY_DIM} coordinates, not all zero: '{d}'"
                )));
            }
            dirs.push(v);
        }
        dirs
    };
    let h = match load_point(start, g.tol)? {
        Ok(h) => h,
        Err(e) => return Ok(Outcome::failure(e)),
    };
    let opts = ContinuationOptions::default();
    let paths = match trace_directions(&h, &dirs, steps, step, &opts) {
        Ok(p) => p,
        Err(e) => return Ok(Outcome::failure(e)),
    };
    let mut records = Vec::new();
    for (k, path) in paths.iter().enumerate() {
        for (s, (pt, res)) in path.points.iter().zip(&path.residuals).enumerate() {
            match point_invariants(pt) {
                Ok(u) => records.push(FamilyRecord::new(pt, *res, &u, s, k)),
                Err(e) => return Ok(Outcome::failure(e)),
            }
        }
    }
    write_records(out, &records)?;
    let summaries: Vec<PathSummary> = paths.iter().enumerate().map(|(k, p)| PathSummary::new(k, p)).collect();
    let requested = steps * paths.len();
    let succeeded: usize = paths.iter().map(|p| p.successful_steps()).sum();
    let mut o = Outcome::new(Status::Ok)
        .with("out", out.display().to_string())
        .with("points", records.len())
        .with("requested_steps", requested)
        .with("successful_steps", succeeded)
        .with("paths", summaries);
    for (k, p) in paths.iter().enumerate() {
        if let PathStatus::Truncated { at_step } = p.status {
            o.demote(Status::Fail);
            o.note(format!(
                "path {k} truncated at step {at_step}: corrector failed after all halvings"
            ));
        }
    }
    Ok(o)
}

fn sample(g: &Global, start: &Path, count: usize, step: f64, out: &Path) -> CliResult {
    let seed = require_seed(g, "sample")?;
    check_positive(step, "--step")?;
    let h = match load_point(start, g.tol)? {
        Ok(h) => h,
        Err(e) => return Ok(Outcome::failure(e)),
    };
    let s = match sample_family(&h, count, seed, step, &ContinuationOptions::default()) {
        Ok(s) => s,
        Err(e) => return Ok(Outcome::failure(e)),
    };
    let records: Vec<FamilyRecord> = s
        .points
        .iter()
        .zip(&s.residuals)
        .zip(&s.invariants)
        .enumerate()
        .map(|(k, ((pt, r), u))| FamilyRecord::new(pt, *r, u, k, 0))
        .collect();
    write_records(out, &records)?;
    let m = &s.metadata;
    let mut o = Outcome::new(if records.len() == count {
        Status::Ok
    } else {
        Status::Fail
    })
    .with("out", out.display().to_string())
    .with("seed", seed)
    .with("requested", count)
    .with("points", records.len())
    .with("step_scale", m.step_scale)
    .with("corrector_tol", m.corrector_tol)
    .with("attempts", m.attempts)
    .with("failures", m.failures)
    .with("duplicates", m.duplicates)
    .with("halvings", m.halvings);
    if records.len() < count {
        o.note(format!(
            "only {} of {count} distinct points after {} attempts",
            records.len(),
            m.attempts
        ));
    }
    Ok(o)
}

fn membership(g: &Global, file: &Path, rank_tol: f64) -> CliResult {
    check_positive(rank_tol, "--rank-tol")?;
    let c: PairConfiguration = load_configuration(file)?;
    if let Err(bad) = require_valid(&c, g.tol) {
        return Ok(bad);
    }
    let rep = match membership_test(&c, rank_tol) {
        Ok(r) => r,
        Err(e) => return Ok(Outcome::failure(e)),
    };
    let name = match rep.outcome {
        MembershipOutcome::NotThetaStable => "not_theta_stable",
        MembershipOutcome::ThetaStableOnly => "theta_stable_only",
        MembershipOutcome::RealLocus => "real_locus",
        MembershipOutcome::BoundaryIndeterminate => "boundary_indeterminate",
    };
    let mut o = Outcome::new(Status::Ok)
        .with("outcome", name)
        .with("solution_dim", rep.solution_dim)
        .with("minors", &rep.minors);
    if rep.outcome == MembershipOutcome::BoundaryIndeterminate {
        o.demote(Status::Indeterminate);
        o.note("a leading minor of the conjugator is too close to zero to decide");
    }
    Ok(o)
}

fn identity<R: Real>(g: &Global, file: &Path, p: &str, q: &str, unordered: bool) -> CliResult {
    let c: PairConfiguration<R> = load_configuration(file)?;
    let ps = parse_subset(p, c.n, Some(3), "--p")?;
    let qs = parse_subset(q, c.n, Some(3), "--q")?;
    let pt = [c.p(ps[0]), c.p(ps[1]), c.p(ps[2])];
    let qt = [c.q(qs[0]), c.q(qs[1]), c.q(qs[2])];
    let rep = if unordered {
        identity_check_unordered(pt, qt)
    } else {
        identity_check(pt, qt)
    };
    let rep = match rep {
        Ok(r) => r,
        Err(e) => return Ok(Outcome::failure(e)),
    };
    let scale = 1f64.max(rep.lhs.to_f64().abs()).max(rep.rhs.to_f64().abs());
    let ok = rep.gap.to_f64() <= g.tol * scale;
    let mut o = Outcome::new(if ok { Status::Ok } else { Status::Fail })
        .with("p", ps.iter().map(|i| i + 1).collect::<Vec<_>>())
        .with("q", qs.iter().map(|i| i + 1).collect::<Vec<_>>())
        .with("ordered_pairs", !unordered)
        .with("lhs", real(rep.lhs))
        .with("rhs", real(rep.rhs))
        .with("gap", real(rep.gap))
        .with("threshold", g.tol * scale);
    if !ok {
        o.note(format!(
            "identity gap {:e} exceeds {:e}",
            rep.gap.to_f64(),
            g.tol * scale
        ));
    }
    Ok(o)
}

fn complement(g: &Global, file: &Path, p: &str) -> CliResult {
    let seed = require_seed(g, "complement")?;
    let c: PairConfiguration = load_configuration(file)?;
    let ps = parse_subset(p, c.n, None, "--p")?;
    if ps.len() >= c.n {
        return Err(usage("--p must leave at least one index out"));
    }
    if let Err(bad) = require_valid(&c, g.tol) {
        return Ok(bad);
    }
    let big_p = c.p_system.partial_sum(&ps);
    let sol = match solve_complement(&big_p, &c.q_system.projectors, seed, &ComplementOptions::default()) {
        Ok(s) => s,
        Err(e) => return Ok(Outcome::failure(e)),
    };
    // match each new projector to the nearest remaining p
    let rest: Vec<usize> = (0..c.n).filter(|k| !ps.contains(k)).collect();
    let mut matching = Vec::new();
    let mut worst: f64 = 0.0;
    for x in &sol.projectors {
        let (k, d) = rest
            .iter()
            .map(|&k| (k, (x - c.p(k)).max_abs_entry()))
            .fold((rest[0], f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a });
        matching.push(k + 1);
        worst = worst.max(d);
    }
    let mut sorted = matching.clone();
    sorted.sort_unstable();
    sorted.dedup();
    let recovers = sorted.len() == rest.len() && worst <= 1e-8;
    Ok(Outcome::new(Status::Ok)
        .with("seed", seed)
        .with("p", ps.iter().map(|i| i + 1).collect::<Vec<_>>())
        .with("residual", sol.residual)
        .with("restarts_used", sol.restarts_used)
        .with("iterations", sol.iterations)
        .with(
            "projectors",
            sol.projectors.iter().map(matrix_to_json).collect::<Vec<_>>(),
        )
        .with("nearest_remaining_p", matching)
        .with("distance_to_remaining", worst)
        .with("recovers_remaining_p", recovers))
}

fn to_hadamard_cmd(g: &Global, pair: &Path, out: Option<&Path>) -> CliResult {
    let c: PairConfiguration = load_configuration(pair)?;
    let h = match to_hadamard(&c, g.tol) {
        Ok(h) => h,
        Err(e) => return Ok(Outcome::failure(e)),
    };
    let file = HadamardFile::from(&h);
    let mut o = Outcome::new(Status::Ok)
        .with("n", h.n)
        .with("unitarity_residual", h.unitarity_residual());
    match out {
        Some(path) => {
            write_json(path, &file)?;
            o.set("out", path.display().to_string());
        }
        None => o.set("hadamard", &file),
    }
    Ok(o)
}

fn tl_check(g: &Global, graph: &Path, pair: &Path, r: Option<f64>) -> CliResult {
    let graph = load_graph(graph)?;
    let c: PairConfiguration = load_configuration(pair)?;
    if graph.vertex_count() != 2 * c.n {
        return Err(usage(format!(
            "graph has {} vertices; the generators are p1..p{n}, q1..q{n} ({} vertices)",
            graph.vertex_count(),
            2 * c.n,
            n = c.n
        )));
    }
    let r = r.unwrap_or(1.0 / c.n as f64);
    if !r.is_finite() {
        return Err(usage("--r must be finite"));
    }
    let rels = tl_relations(&graph, r, &pair_names(c.n, c.n));
    let (value, worst) = match evaluate_relations(&rels, &c.matrices()) {
        Ok(v) => v,
        Err(e) => return Ok(Outcome::failure(e)),
    };
    let ok = value <= g.tol;
    let mut o = Outcome::new(if ok { Status::Ok } else { Status::Fail })
        .with("r", r)
        .with("relations", rels.len())
        .with("residual", value)
        .with("worst_relation", &worst);
    if !ok {
        o.note(format!("{worst} = {value:e} exceeds tol {:e}", g.tol));
    }
    Ok(o)
}

//! Acceptance run: one PASS/FAIL line per criterion with its runtime.
//!
//! Built with `harness = false`, so `cargo test -p orthopair-cli --test acceptance`
//! always shows the report.

#[path = "../../core/tests/common/exact.rs"]
mod exact;

use std::process::Command;
use std::time::{Duration, Instant};

use exact::{exact_identity_side, exact_standard_pair, sum};
use orthopair_core::config::{from_hadamard, is_complex_hadamard, standard_pair, to_hadamard};
use orthopair_core::continuation::{
    point_invariants, sample_family, trace_directions, ContinuationOptions, FamilySample, DEFAULT_STEP,
};
use orthopair_core::invariants::{
    identity_check, membership_test, sigma, solve_complement, tau, theta, u12_from_pq, u_invariants, ComplementOptions,
    MembershipOutcome,
};
use orthopair_core::relations::{restrict, restrict_bipartite};
use orthopair_core::tangent::{
    a6_moduli_tangent_dim, dephased_defect, fiber_rank_check, moduli_tangent_dim, x33_moduli_tangent_dim,
    TangentStatus, DEFAULT_RANK_TOL, MIN_GAP_RATIO,
};
use orthopair_core::{HadamardPoint, PairConfiguration};
use serde_json::Value;

type Verdict = Result<String, String>;

fn triples() -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for a in 0..6 {
        for b in (a + 1)..6 {
            for c in (b + 1)..6 {
                out.push([a, b, c]);
            }
        }
    }
    out
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(elapsed: Duration, limit: Duration) -> Result<(), String> {
    ensure(elapsed < limit, format!("runtime {elapsed:?} exceeds {limit:?}"))
}

fn x0_pair() -> PairConfiguration {
    standard_pair(6, true).unwrap()
}

fn x0() -> HadamardPoint {
    to_hadamard(&x0_pair(), 1e-10).unwrap()
}

fn run_cli(dir: &std::path::Path, args: &[&str]) -> Result<Value, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_orthopair"))
        .current_dir(dir)
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(format!(
            "{args:?} exited with {:?}: {}",
            out.status.code(),
            String::from_utf8_lossy(&out.stderr)
        ));
    }
    serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())
}

fn criterion_1() -> Verdict {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let t = Instant::now();
    run_cli(dir.path(), &["standard-pair", "--n", "6", "--out", "pair.json"])?;
    let v = run_cli(dir.path(), &["verify", "pair.json", "--tol", "1e-12"])?;
    let elapsed = t.elapsed();
    ensure(v["status"] == "ok", "verify did not pass")?;
    let devs: Vec<f64> = v["overlap_deviations"]
        .as_array()
        .into_iter()
        .flatten()
        .flat_map(|row| row.as_array().cloned().unwrap_or_default())
        .filter_map(|x| x.as_f64())
        .collect();
    ensure(devs.len() == 36, format!("{} overlap values", devs.len()))?;
    let worst = devs.iter().copied().fold(0.0, f64::max);
    ensure(worst <= 1e-13, format!("max |Tr p_i q_j - 1/6| = {worst:e}"))?;
    within(elapsed, Duration::from_millis(100))?;
    Ok(format!("36 overlaps within {worst:e}"))
}

fn criterion_2() -> Verdict {
    let mut notes = Vec::new();
    for swap in [true, false] {
        let t = Instant::now();
        let rep = moduli_tangent_dim(&standard_pair(6, swap).unwrap(), DEFAULT_RANK_TOL).map_err(|e| e.to_string())?;
        within(t.elapsed(), Duration::from_secs(30))?;
        ensure(
            rep.moduli_dim == 4 && rep.gap_ratio >= MIN_GAP_RATIO && rep.status == TangentStatus::Determinate,
            format!("swap {swap}: dim {} gap {:e}", rep.moduli_dim, rep.gap_ratio),
        )?;
        notes.push(format!(
            "swap {swap}: {} - {} = 4, gap {:.1e}",
            rep.nullity, rep.orbit_dim, rep.gap_ratio
        ));
    }
    Ok(notes.join("; "))
}

fn criterion_3() -> Verdict {
    let t = Instant::now();
    let rep =
        dephased_defect::<f64>(&HadamardPoint::fourier(6).unwrap(), DEFAULT_RANK_TOL).map_err(|e| e.to_string())?;
    within(t.elapsed(), Duration::from_secs(1))?;
    ensure(
        rep.defect == 4 && rep.status == TangentStatus::Determinate,
        format!("defect {}", rep.defect),
    )?;
    Ok(format!("defect 4, gap {:.1e}", rep.gap_ratio))
}

fn criterion_4() -> Verdict {
    let t = Instant::now();
    let point = restrict(&x0_pair(), &[0, 1, 2]).map_err(|e| e.to_string())?;
    let rep = a6_moduli_tangent_dim(&point, DEFAULT_RANK_TOL).map_err(|e| e.to_string())?;
    within(t.elapsed(), Duration::from_secs(30))?;
    ensure(rep.moduli_dim == 8, format!("dim {}", rep.moduli_dim))?;
    Ok(format!("{} - {} = 8", rep.nullity, rep.orbit_dim))
}

fn criterion_5(sample: &FamilySample) -> Verdict {
    let point = restrict_bipartite(&x0_pair(), &[0, 1, 2], &[0, 1, 2]).map_err(|e| e.to_string())?;
    let rep = x33_moduli_tangent_dim(&point, DEFAULT_RANK_TOL).map_err(|e| e.to_string())?;
    ensure(rep.moduli_dim == 4, format!("X(3,3) dim {}", rep.moduli_dim))?;
    ensure(sample.points.len() >= 50, "fewer than 50 samples")?;
    let mut full = 0;
    for h in &sample.points[..50] {
        let c: PairConfiguration = from_hadamard(h).map_err(|e| e.to_string())?;
        let x = restrict_bipartite(&c, &[0, 1, 2], &[0, 1, 2]).map_err(|e| e.to_string())?;
        let f = fiber_rank_check(&x, DEFAULT_RANK_TOL).map_err(|e| e.to_string())?;
        if f.rank == 3 {
            full += 1;
        } else {
            ensure(!f.flags.is_empty(), format!("unflagged rank {}", f.rank))?;
        }
    }
    ensure(full * 10 >= 9 * 50, format!("rank 3 at {full}/50"))?;
    Ok(format!("X(3,3) dim 4; fiber rank 3 at {full}/50, drops flagged"))
}

fn criterion_6() -> Verdict {
    let t = Instant::now();
    let dirs: Vec<Vec<f64>> = (0..4)
        .map(|k| (0..4).map(|i| if i == k { 1.0 } else { 0.0 }).collect())
        .collect();
    let paths = trace_directions(&x0(), &dirs, 50, 1e-2, &ContinuationOptions::default()).map_err(|e| e.to_string())?;
    let succeeded: usize = paths.iter().map(|p| p.successful_steps()).sum();
    ensure(succeeded * 100 >= 95 * 200, format!("{succeeded}/200 steps"))?;
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    let mut count = 0;
    for h in paths.iter().flat_map(|p| &p.points) {
        ensure(
            is_complex_hadamard(&h.matrix::<f64>(), 1e-9).is_hadamard,
            "point is not Hadamard",
        )?;
        let c: PairConfiguration = from_hadamard(h).map_err(|e| e.to_string())?;
        let m = membership_test(&c, DEFAULT_RANK_TOL).map_err(|e| e.to_string())?;
        ensure(
            m.outcome == MembershipOutcome::RealLocus,
            format!("membership {:?}", m.outcome),
        )?;
        let u = point_invariants(h).map_err(|e| e.to_string())?.as_array();
        for k in 0..3 {
            lo[k] = lo[k].min(u[k]);
            hi[k] = hi[k].max(u[k]);
        }
        count += 1;
    }
    for k in 0..3 {
        ensure(hi[k] - lo[k] > 1e-4, format!("u{} extent {:e}", k + 1, hi[k] - lo[k]))?;
    }
    within(t.elapsed(), Duration::from_secs(300))?;
    Ok(format!(
        "{succeeded}/200 steps, {count} points; extents {:.3} {:.3} {:.3}",
        hi[0] - lo[0],
        hi[1] - lo[1],
        hi[2] - lo[2]
    ))
}

fn criterion_7(sample: &FamilySample) -> Verdict {
    let mut worst: f64 = 0.0;
    let mut checked = 0;
    for h in &sample.points {
        let c: PairConfiguration = from_hadamard(h).map_err(|e| e.to_string())?;
        for pt in triples() {
            for qt in triples() {
                let rep = identity_check(
                    [c.p(pt[0]), c.p(pt[1]), c.p(pt[2])],
                    [c.q(qt[0]), c.q(qt[1]), c.q(qt[2])],
                )
                .map_err(|e| e.to_string())?;
                worst = worst.max(rep.gap);
                checked += 1;
            }
        }
    }
    ensure(worst <= 1e-9, format!("gap {worst:e}"))?;
    let (p, q) = exact_standard_pair(6, true);
    for pt in triples() {
        let big_p = sum(&[&p[pt[0]], &p[pt[1]], &p[pt[2]]]);
        for qt in triples() {
            let big_q = sum(&[&q[qt[0]], &q[qt[1]], &q[qt[2]]]);
            let lhs = exact_identity_side(&big_p, [&q[qt[0]], &q[qt[1]], &q[qt[2]]]);
            let rhs = exact_identity_side(&big_q, [&p[pt[0]], &p[pt[1]], &p[pt[2]]]);
            ensure(lhs == rhs, format!("exact gap nonzero at p {pt:?} q {qt:?}"))?;
        }
    }
    Ok(format!(
        "{checked} sub-triples, max gap {worst:.1e}; exact gap 0 on 400 sub-triples of x0"
    ))
}

fn criterion_8(sample: &FamilySample) -> Verdict {
    let opts = ComplementOptions::default();
    let mut ok = 0;
    for (k, h) in sample.points.iter().enumerate() {
        let c: PairConfiguration = from_hadamard(h).map_err(|e| e.to_string())?;
        let p = c.p_system.partial_sum(&[0, 1, 2]);
        if solve_complement(&p, &c.q_system.projectors, k as u64, &opts).is_ok_and(|s| s.residual <= 1e-9) {
            ok += 1;
        }
    }
    let total = sample.points.len();
    ensure(ok * 100 >= 95 * total, format!("{ok}/{total} solved"))?;
    let c = x0_pair();
    for (given, rest) in [([0, 1, 2], [3, 4, 5]), ([3, 4, 5], [0, 1, 2])] {
        let p = c.p_system.partial_sum(&given);
        let sol = solve_complement(&p, &c.q_system.projectors, 0, &opts).map_err(|e| e.to_string())?;
        let mut matched: Vec<usize> = sol
            .projectors
            .iter()
            .filter_map(|x| rest.iter().copied().find(|&k| (x - c.p(k)).max_abs_entry() <= 1e-9))
            .collect();
        matched.sort_unstable();
        ensure(
            matched == rest,
            format!("complement of {given:?} is not the remaining triple"),
        )?;
    }
    Ok(format!("{ok}/{total} solved; both trivial complements at x0 recovered"))
}

fn criterion_9(sample: &FamilySample) -> Verdict {
    const S3: [[usize; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let mut worst_fit: f64 = 0.0;
    for h in &sample.points {
        let c: PairConfiguration = from_hadamard(h).map_err(|e| e.to_string())?;
        ensure(
            tau(&tau(&c)) == c && theta(&theta(&c)) == c,
            "tau or theta is not an involution",
        )?;
        let p = c.p_system.partial_sum(&[0, 1, 2]);
        ensure(
            sigma(&sigma(&p).map_err(|e| e.to_string())?).map_err(|e| e.to_string())? == p,
            "sigma",
        )?;
        let base = u_invariants(&p, [c.q(0), c.q(1), c.q(2)]).map_err(|e| e.to_string())?;
        for a in S3 {
            let pa = c.p_system.partial_sum(&a);
            for b in S3 {
                let u = u_invariants(&pa, [c.q(b[0]), c.q(b[1]), c.q(b[2])]).map_err(|e| e.to_string())?;
                for (x, y) in u.as_array().iter().zip(base.as_array()) {
                    ensure((x - y).abs() <= 1e-12 * (1.0 + y.abs()), "S3 x S3 symmetry")?;
                }
            }
        }
        for qt in triples() {
            let u = u_invariants(&p, [c.q(qt[0]), c.q(qt[1]), c.q(qt[2])]).map_err(|e| e.to_string())?;
            let (u1, u2) = u12_from_pq(&p, &c.q_system.partial_sum(&qt));
            worst_fit = worst_fit.max((u.u1 - u1.re).abs()).max((u.u2 - u2.re).abs());
        }
    }
    ensure(worst_fit <= 1e-9, format!("affine fit {worst_fit:e}"))?;
    Ok(format!(
        "involutions, symmetry and affine relations on {} samples (fit {worst_fit:.1e})",
        sample.points.len()
    ))
}

fn criterion_10() -> Verdict {
    let rep = moduli_tangent_dim(&standard_pair(3, false).unwrap(), DEFAULT_RANK_TOL).map_err(|e| e.to_string())?;
    ensure(rep.moduli_dim == 0, format!("n = 3 moduli dim {}", rep.moduli_dim))?;
    let d = dephased_defect::<f64>(&HadamardPoint::fourier(2).unwrap(), DEFAULT_RANK_TOL).map_err(|e| e.to_string())?;
    ensure(d.defect == 0, format!("F2 defect {}", d.defect))?;
    Ok("n = 3 moduli dim 0, F2 defect 0".into())
}

fn main() {
    let t = Instant::now();
    let sample = sample_family(&x0(), 100, 42, DEFAULT_STEP, &ContinuationOptions::default()).unwrap();
    println!("family sample: {} points in {:?}", sample.points.len(), t.elapsed());
    let criteria: Vec<(usize, Box<dyn Fn() -> Verdict + '_>)> = vec![
        (1, Box::new(criterion_1)),
        (2, Box::new(criterion_2)),
        (3, Box::new(criterion_3)),
        (4, Box::new(criterion_4)),
        (5, Box::new(|| criterion_5(&sample))),
        (6, Box::new(criterion_6)),
        (7, Box::new(|| criterion_7(&sample))),
        (8, Box::new(|| criterion_8(&sample))),
        (9, Box::new(|| criterion_9(&sample))),
        (10, Box::new(criterion_10)),
    ];
    let mut failed = Vec::new();
    for (id, check) in &criteria {
        let t = Instant::now();
        let verdict = check();
        let secs = t.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("criterion {id:>2}: PASS ({secs:.3} s) {detail}"),
            Err(why) => {
                println!("criterion {id:>2}: FAIL ({secs:.3} s) {why}");
                failed.push(*id);
            }
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}

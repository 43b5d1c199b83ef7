use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use orthopair_core::config::{from_hadamard, standard_pair, to_hadamard};
use orthopair_core::continuation::{newton_correct, trace_path, ContinuationOptions};
use orthopair_core::invariants::{identity_check, u_invariants};
use orthopair_core::tangent::{dephased_defect, moduli_tangent_dim, DEFAULT_RANK_TOL};
use orthopair_core::{DoubleDouble, HadamardPoint, PairConfiguration};

fn x0() -> PairConfiguration {
    standard_pair(6, true).unwrap()
}

fn tangent(c: &mut Criterion) {
    let pair = x0();
    let mut group = c.benchmark_group("tangent");
    group.sample_size(10);
    group.bench_function("moduli_tangent_dim x0", |b| {
        b.iter(|| moduli_tangent_dim(black_box(&pair), DEFAULT_RANK_TOL).unwrap())
    });
    group.finish();

    let f6 = HadamardPoint::fourier(6).unwrap();
    c.bench_function("dephased_defect F6 double", |b| {
        b.iter(|| dephased_defect::<f64>(black_box(&f6), DEFAULT_RANK_TOL).unwrap())
    });
    c.bench_function("dephased_defect F6 extended", |b| {
        b.iter(|| dephased_defect::<DoubleDouble>(black_box(&f6), DEFAULT_RANK_TOL).unwrap())
    });
}

fn continuation(c: &mut Criterion) {
    let start = to_hadamard(&x0(), 1e-10).unwrap();
    let opts = ContinuationOptions::default();
    // a point off the family by about 1e-3 for the corrector
    let flat: Vec<f64> = start
        .flat()
        .iter()
        .enumerate()
        .map(|(k, x)| x + 1e-3 * ((k % 3) as f64 - 1.0))
        .collect();
    let off = HadamardPoint::from_flat(6, &flat).unwrap();
    c.bench_function("newton_correct 1e-3 off", |b| {
        b.iter(|| newton_correct(black_box(&off), opts.corrector_tol, opts.max_iter).unwrap())
    });
    c.bench_function("trace_path 10 steps", |b| {
        b.iter(|| trace_path(black_box(&start), &[1.0, 0.5, -0.5, 0.25], 10, 1e-2, &opts).unwrap())
    });
}

fn invariants(c: &mut Criterion) {
    let pair: PairConfiguration = from_hadamard(&to_hadamard(&x0(), 1e-10).unwrap()).unwrap();
    let p = pair.p_system.partial_sum(&[0, 1, 2]);
    c.bench_function("u_invariants", |b| {
        b.iter(|| u_invariants(black_box(&p), [pair.q(0), pair.q(1), pair.q(2)]).unwrap())
    });
    c.bench_function("identity_check", |b| {
        b.iter(|| identity_check([pair.p(0), pair.p(1), pair.p(2)], [pair.q(0), pair.q(1), pair.q(2)]).unwrap())
    });
}

criterion_group!(benches, tangent, continuation, invariants);
criterion_main!(benches);

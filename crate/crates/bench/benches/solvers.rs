use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qubolin_bench::dense_instance;
use qubolin_core::formulations::Family;
use qubolin_core::{brute_force_opt, build, solve_lp, solve_milp, MilpOptions, ModelId, WeightSet};

fn lp_relaxation(c: &mut Criterion) {
    let mut group = c.benchmark_group("lp");
    for n in [10, 20, 30] {
        let inst = dense_instance(n, 1);
        for f in [Family::DW, Family::GW, Family::PK] {
            let model = build(&ModelId::basic(f), &inst, &WeightSet::unit()).unwrap();
            group.bench_with_input(BenchmarkId::new(format!("{f:?}"), n), &model, |b, m| {
                b.iter(|| solve_lp(black_box(m)).unwrap())
            });
        }
    }
    group.finish();
}

fn branch_and_bound(c: &mut Criterion) {
    let mut group = c.benchmark_group("milp");
    group.sample_size(10);
    for n in [8, 12] {
        let inst = dense_instance(n, 2);
        for id in ["GW", "ORPK", "PK(*,b)", "GW(a,g+d)"] {
            let id: ModelId = id.parse().unwrap();
            let model = build(&id, &inst, &WeightSet::unit()).unwrap();
            group.bench_with_input(BenchmarkId::new(id.name(), n), &model, |b, m| {
                b.iter(|| solve_milp(black_box(m), &inst, &MilpOptions::default()).unwrap())
            });
        }
    }
    group.finish();
}

fn oracle(c: &mut Criterion) {
    let mut group = c.benchmark_group("brute_force");
    for n in [12, 16] {
        let inst = dense_instance(n, 3);
        group.bench_with_input(BenchmarkId::from_parameter(n), &inst, |b, i| {
            b.iter(|| brute_force_opt(black_box(i)).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, lp_relaxation, branch_and_bound, oracle);
criterion_main!(benches);

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use milnor_bench::instance;
use milnor_core::{analyze, counterexample, decide_single_class, milnor_invariant};

fn analysis(c: &mut Criterion) {
    let mut group = c.benchmark_group("analyze");
    group.sample_size(10);
    for (prime, dim) in [(3, 6), (5, 10), (2, 10), (7, 14)] {
        let (_, pair) = instance(prime, dim, 7);
        group.bench_with_input(BenchmarkId::new(format!("p{prime}"), pair.dim()), &pair, |b, pair| {
            b.iter(|| analyze(pair, None).unwrap())
        });
    }
    group.finish();
}

fn decision(c: &mut Criterion) {
    let mut group = c.benchmark_group("decide");
    group.sample_size(10);
    for (prime, dim) in [(3, 6), (5, 10)] {
        let (_, pair) = instance(prime, dim, 11);
        group.bench_with_input(BenchmarkId::new(format!("p{prime}"), pair.dim()), &pair, |b, pair| {
            b.iter(|| decide_single_class(&milnor_invariant(pair).unwrap()).unwrap())
        });
    }
    group.finish();
}

fn witness(c: &mut Criterion) {
    let mut group = c.benchmark_group("counterexample");
    group.sample_size(10);
    for seed in 0..40 {
        let (_, pair) = instance(5, 8, seed);
        let inv = milnor_invariant(&pair).unwrap();
        if decide_single_class(&inv).unwrap().single_class {
            continue;
        }
        group.bench_with_input(BenchmarkId::new("p5", pair.dim()), &pair, |b, pair| {
            b.iter(|| counterexample(pair, None).unwrap())
        });
        break;
    }
    group.finish();
}

criterion_group!(benches, analysis, decision, witness);
criterion_main!(benches);

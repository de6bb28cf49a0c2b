//! Benchmarks for the brute-force nearest-neighbour scans that back the
//! similarity metrics and the membership attacks: quadratic scaling over
//! row counts, distance-kind comparison, and single- versus multi-thread
//! throughput.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use synthpriv::{nn_between, nn_within, random_mixed_table, DistanceSpec, Table};

/// Standard workload: half numeric, half categorical columns.
fn tables(rows: usize, seed: u64) -> (Table, Table) {
    let real = random_mixed_table(rows, 5, 5, seed).unwrap();
    let synth = random_mixed_table(rows, 5, 5, seed.wrapping_add(1)).unwrap();
    (real, synth)
}

fn bench_scaling(c: &mut Criterion) {
    let mut group = c.benchmark_group("nn_between_scaling");
    for rows in [500usize, 1_000, 2_000, 4_000] {
        let (real, synth) = tables(rows, 42);
        let spec = DistanceSpec::gower(&real);
        group.throughput(Throughput::Elements((rows * rows) as u64));
        group.bench_with_input(BenchmarkId::from_parameter(rows), &rows, |b, _| {
            b.iter(|| nn_between(&synth, &real, &spec).unwrap())
        });
    }
    group.finish();
}

fn bench_distance_kinds(c: &mut Criterion) {
    let mut group = c.benchmark_group("nn_between_distance_kinds");
    let rows = 1_000;
    group.throughput(Throughput::Elements((rows * rows) as u64));

    let (real, synth) = tables(rows, 7);
    let gower = DistanceSpec::gower(&real);
    group.bench_function("gower_mixed", |b| {
        b.iter(|| nn_between(&synth, &real, &gower).unwrap())
    });

    let numeric = random_mixed_table(rows, 10, 0, 7).unwrap();
    let numeric_queries = random_mixed_table(rows, 10, 0, 8).unwrap();
    let euclidean = DistanceSpec::euclidean();
    group.bench_function("euclidean_numeric", |b| {
        b.iter(|| nn_between(&numeric_queries, &numeric, &euclidean).unwrap())
    });

    let categorical = random_mixed_table(rows, 0, 10, 7).unwrap();
    let categorical_queries = random_mixed_table(rows, 0, 10, 8).unwrap();
    let hamming = DistanceSpec::hamming();
    group.bench_function("hamming_categorical", |b| {
        b.iter(|| nn_between(&categorical_queries, &categorical, &hamming).unwrap())
    });

    group.finish();
}

fn bench_thread_counts(c: &mut Criterion) {
    let mut group = c.benchmark_group("nn_within_threads");
    let rows = 2_000;
    let (real, _) = tables(rows, 13);
    let spec = DistanceSpec::gower(&real);
    group.throughput(Throughput::Elements((rows * rows) as u64));
    for threads in [1usize, 4] {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(threads), &threads, |b, _| {
            b.iter(|| pool.install(|| nn_within(&real, &spec).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_scaling, bench_distance_kinds, bench_thread_counts);
criterion_main!(benches);

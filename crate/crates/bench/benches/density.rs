//! Benchmarks for the Gaussian KDE behind the density-ratio membership
//! attack: fitting, batched log-density evaluation, and the full attack.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use synthpriv::{domias, kde_fit, random_mixed_table, BandwidthRule, Value};

fn bench_fit(c: &mut Criterion) {
    let mut group = c.benchmark_group("kde_fit");
    for rows in [500usize, 2_000, 8_000] {
        let t = random_mixed_table(rows, 4, 2, 5).unwrap();
        group.throughput(Throughput::Elements(rows as u64));
        group.bench_with_input(BenchmarkId::from_parameter(rows), &rows, |b, _| {
            b.iter(|| kde_fit(&t, BandwidthRule::Silverman).unwrap())
        });
    }
    group.finish();
}

fn bench_log_density(c: &mut Criterion) {
    let mut group = c.benchmark_group("kde_log_density");
    let rows = 1_000;
    let queries = 200;
    for numeric in [2usize, 5, 10] {
        let t = random_mixed_table(rows, numeric, 0, 5).unwrap();
        let model = kde_fit(&t, BandwidthRule::Silverman).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let points: Vec<Vec<Value>> = (0..queries)
            .map(|_| (0..numeric).map(|_| Value::Num(rng.gen::<f64>())).collect())
            .collect();
        group.throughput(Throughput::Elements((rows * queries) as u64));
        group.bench_with_input(BenchmarkId::from_parameter(numeric), &numeric, |b, _| {
            b.iter(|| {
                points
                    .iter()
                    .map(|p| model.log_density(p).unwrap())
                    .sum::<f64>()
            })
        });
    }
    group.finish();
}

fn bench_attack(c: &mut Criterion) {
    let mut group = c.benchmark_group("density_ratio_attack");
    group.sample_size(20);
    for rows in [250usize, 500] {
        let synth = random_mixed_table(rows, 4, 2, 1).unwrap();
        let reference = random_mixed_table(rows, 4, 2, 2).unwrap();
        let members = random_mixed_table(rows / 2, 4, 2, 3).unwrap();
        let non_members = random_mixed_table(rows / 2, 4, 2, 4).unwrap();
        let candidates_rows =
            members.rows().chain(non_members.rows()).map(|r| r.to_vec()).collect();
        let candidates =
            synthpriv::Table::new(members.schema().clone(), candidates_rows).unwrap();
        let mut labels = vec![true; members.len()];
        labels.extend(vec![false; non_members.len()]);
        group.throughput(Throughput::Elements((rows * candidates.len()) as u64));
        group.bench_with_input(BenchmarkId::from_parameter(rows), &rows, |b, _| {
            b.iter(|| {
                domias(&synth, &reference, &candidates, &labels, BandwidthRule::Silverman)
                    .unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, bench_fit, bench_log_density, bench_attack);
criterion_main!(benches);

//! Batch query throughput, rayon pool against one sequential session, plus
//! build time. Run with `--no-default-features` for the sequential build.

use std::hint::black_box;

use colorfreq::par::parallel_enabled;
use colorfreq::{build_box, gen_dataset, gen_queries, BoxQuery, Count, Dataset, GenConfig, Side, TreeParams};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

fn workload(n: usize, sides: &[Side], m: usize) -> (Dataset<Count>, Vec<BoxQuery>) {
    let mut cfg = GenConfig::new(n, sides.len(), (n / 20).max(1));
    cfg.queries = m;
    cfg.seed = 17;
    cfg.sides = sides.to_vec();
    (gen_dataset(&cfg), gen_queries(&cfg))
}

fn shapes() -> Vec<(&'static str, Vec<Side>)> {
    vec![
        ("dom2", vec![Side::Upper, Side::Upper]),
        ("rect", vec![Side::Both, Side::Both]),
        ("dom3", vec![Side::Upper; 3]),
    ]
}

fn queries(c: &mut Criterion) {
    let mut group = c.benchmark_group("query_batch");
    for (name, sides) in shapes() {
        let (ds, qs) = workload(20_000, &sides, 2_000);
        let idx = build_box(&ds.points, sides.len(), TreeParams::new(8), &sides).unwrap();
        group.throughput(Throughput::Elements(qs.len() as u64));
        group.bench_with_input(BenchmarkId::new("parallel", name), &qs, |b, qs| {
            b.iter(|| black_box(idx.query_batch(qs)))
        });
        group.bench_with_input(BenchmarkId::new("sequential", name), &qs, |b, qs| {
            b.iter(|| black_box(idx.query_batch_sequential(qs)))
        });
    }
    group.finish();
}

fn builds(c: &mut Criterion) {
    let mode = if parallel_enabled() { "parallel" } else { "sequential" };
    let mut group = c.benchmark_group("build");
    group.sample_size(10);
    for (name, sides) in shapes() {
        let (ds, _) = workload(20_000, &sides, 0);
        group.bench_function(BenchmarkId::new(mode, name), |b| {
            b.iter(|| black_box(build_box(&ds.points, sides.len(), TreeParams::new(8), &sides).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, queries, builds);
criterion_main!(benches);

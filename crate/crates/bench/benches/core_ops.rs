use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};

use simorder::eval::analogy_query;
use simorder::{
    apply_transform, gram, make_transform, normalize_rows, precompute_rotated, scale_columns,
    sym_eig,
};
use simorder_bench::{random_embeddings, random_psd};

fn bench_gram(c: &mut Criterion) {
    let mut group = c.benchmark_group("gram");
    for &rows in &[2_000usize, 20_000] {
        let emb = random_embeddings(1, rows, 128);
        group.throughput(Throughput::Elements((rows * 128 * 128) as u64));
        group.bench_with_input(BenchmarkId::from_parameter(rows), &emb, |b, emb| {
            b.iter(|| gram(emb))
        });
    }
    group.finish();
}

fn bench_sym_eig(c: &mut Criterion) {
    let mut group = c.benchmark_group("sym_eig");
    group.sample_size(10);
    for &dim in &[64usize, 128, 300] {
        let g = random_psd(2, dim);
        group.bench_with_input(BenchmarkId::from_parameter(dim), &g, |b, g| {
            b.iter(|| sym_eig(g).unwrap())
        });
    }
    group.finish();
}

fn bench_transform_paths(c: &mut Criterion) {
    let emb = random_embeddings(3, 20_000, 128);
    let basis = Arc::new(sym_eig(&gram(&emb)).unwrap());
    let rotated = precompute_rotated(&emb, &basis).unwrap();
    let t = make_transform(basis.clone(), -0.45);

    let mut group = c.benchmark_group("per_alpha_transform");
    group.bench_function("apply_transform", |b| {
        b.iter(|| apply_transform(&emb, &t).unwrap())
    });
    group.bench_function("column_scaling_fast_path", |b| {
        b.iter(|| scale_columns(&rotated, &t.column_scales()).unwrap())
    });
    group.finish();
}

fn bench_analogy(c: &mut Criterion) {
    let emb = random_embeddings(4, 50_000, 128);
    let (normalized, _) = normalize_rows(&emb);
    let mut group = c.benchmark_group("analogy_query");
    group.throughput(Throughput::Elements(1));
    group.bench_function("50k_vocab", |b| {
        let mut k = 0usize;
        b.iter(|| {
            k = (k + 7919) % 49_000;
            analogy_query(&normalized, k, k + 13, k + 401)
        })
    });
    group.finish();
}

criterion_group!(
    benches,
    bench_gram,
    bench_sym_eig,
    bench_transform_paths,
    bench_analogy
);
criterion_main!(benches);

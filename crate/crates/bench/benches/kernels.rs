use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use ndarray::Array2;
use std::hint::black_box;
use tourlens::diagnostics::knn;
use tourlens::embed::{pca_embed, tsne_gradient};
use tourlens::numerics::{pca, svd};
use tourlens::tour::{random_basis, Geodesic};
use tourlens::{Session, SessionConfig};
use tourlens_bench::tree;

fn bench_svd(c: &mut Criterion) {
    let mut g = c.benchmark_group("svd");
    for (n, p) in [(50, 10), (200, 20), (500, 50)] {
        let x = tree(n, p).into_values();
        g.bench_with_input(BenchmarkId::from_parameter(format!("{n}x{p}")), &x, |b, x| {
            b.iter(|| svd(black_box(x.view())).unwrap())
        });
    }
    g.finish();
}

fn bench_geodesic(c: &mut Criterion) {
    let a = random_basis(20, 2, 1).unwrap();
    let z = random_basis(20, 2, 2).unwrap();
    c.bench_function("geodesic/new p=20", |b| b.iter(|| Geodesic::new(black_box(&a), black_box(&z)).unwrap()));
    let geo = Geodesic::new(&a, &z).unwrap();
    c.bench_function("geodesic/at p=20", |b| b.iter(|| geo.at(black_box(0.37))));
}

fn bench_gradient(c: &mut Criterion) {
    let mut g = c.benchmark_group("tsne_gradient");
    g.sample_size(20);
    for n in [200, 500, 1000] {
        let x = tree(n, 20);
        let y = pca_embed(&x, 2).unwrap();
        let p = Array2::from_elem((n, n), 1.0 / (n * (n - 1)) as f64);
        g.bench_with_input(BenchmarkId::from_parameter(n), &(p, y), |b, (p, y)| {
            b.iter(|| tsne_gradient(black_box(p.view()), black_box(y.view())))
        });
    }
    g.finish();
}

fn bench_knn(c: &mut Criterion) {
    let mut g = c.benchmark_group("knn k=10");
    g.sample_size(20);
    for n in [500, 2000] {
        let x = tree(n, 12).into_values();
        g.bench_with_input(BenchmarkId::from_parameter(n), &x, |b, x| {
            b.iter(|| knn(black_box(x.view()), 10).unwrap())
        });
    }
    g.finish();
}

fn bench_session_tick(c: &mut Criterion) {
    let x = tree(3000, 100);
    let input = tourlens::DataMatrix::new(pca(&x, 12).unwrap().scores).unwrap();
    let embedding = pca_embed(&x, 2).unwrap();
    let mut session = Session::new(SessionConfig::new(input, embedding)).unwrap();
    c.bench_function("session/tick n=3000 p=12", |b| b.iter(|| session.tick().unwrap()));
}

criterion_group!(benches, bench_svd, bench_geodesic, bench_gradient, bench_knn, bench_session_tick);
criterion_main!(benches);

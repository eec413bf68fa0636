use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use noisy_mds::align::align_matrices;
use noisy_mds::config::{distance_matrix, sample_unit_ball};
use noisy_mds::linalg::{double_center, lanczos_norm, symmetric_eigen, top_p_eigen};
use noisy_mds::noise::{apply_noise_model, sample_xi_matrix, NoiseModel, NoiseSpec, XiDistribution};
use noisy_mds::scaling::classical_scaling;

fn noisy(n: usize) -> noisy_mds::DissimilarityMatrix {
    let x = sample_unit_ball(n, 3, 7);
    let delta = distance_matrix(&x);
    let spec = NoiseSpec {
        model: NoiseModel::Additive,
        xi: XiDistribution::student_t(7.0, 0.25),
    };
    let xi = sample_xi_matrix(&spec.xi, n, 11);
    apply_noise_model(&spec, &delta, &xi).unwrap()
}

fn eigensolvers(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigen");
    group.sample_size(10);
    for n in [128, 256] {
        let b = double_center(noisy(n).as_sym());
        group.bench_with_input(BenchmarkId::new("dense_full", n), &b, |bench, b| {
            bench.iter(|| symmetric_eigen(black_box(b)).unwrap())
        });
    }
    for n in [256, 1024] {
        let b = double_center(noisy(n).as_sym());
        group.bench_with_input(BenchmarkId::new("top3", n), &b, |bench, b| {
            bench.iter(|| top_p_eigen(black_box(b), 3).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("lanczos_norm", n), &b, |bench, b| {
            bench.iter(|| lanczos_norm(black_box(b), 300, 1e-6))
        });
    }
    group.finish();
}

fn pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("pipeline");
    group.sample_size(10);
    for n in [256, 1024] {
        let d = noisy(n);
        group.bench_with_input(BenchmarkId::new("classical_scaling", n), &d, |bench, d| {
            bench.iter(|| classical_scaling(black_box(d), 3).unwrap())
        });
        let spec = XiDistribution::student_t(7.0, 0.25);
        group.bench_with_input(BenchmarkId::new("sample_xi_t7", n), &n, |bench, &n| {
            bench.iter(|| sample_xi_matrix(black_box(&spec), n, 5))
        });
    }
    let x = sample_unit_ball(4096, 3, 1);
    let y = sample_unit_ball(4096, 3, 2);
    group.bench_function("align_4096", |bench| {
        bench.iter(|| align_matrices(black_box(&x.points), black_box(&y.points)).unwrap())
    });
    group.finish();
}

criterion_group!(benches, eigensolvers, pipeline);
criterion_main!(benches);

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

use randpre::curvol::{maxvol, DEFAULT_DOM_TOL, DEFAULT_MAX_SWEEPS};
use randpre::densela::svd;
use randpre::genpsolve::{adversarial_genp_matrix, genp_supported_solve, GenpPolicy, GenpRoute};
use randpre::matgen::{gen_class_sample, ClassTag, TestClass};
use randpre::randmats::{KindTag, RngStream};
use randpre::subspace::{leading_sketch, trailing_attempt, TrailingMethod};
use randpre_bench::{gaussian_matrix, gaussian_vector, svd_input};

fn dense(c: &mut Criterion) {
    let mut g = c.benchmark_group("svd");
    for n in [64, 128, 256] {
        let a = gaussian_matrix(n, n, 1);
        g.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| {
            b.iter(|| svd(black_box(a)).unwrap())
        });
    }
    g.finish();
}

fn leading(c: &mut Criterion) {
    let a = svd_input(256, 32, 2);
    let mut g = c.benchmark_group("leading_sketch_256x32");
    for kind in [KindTag::Gaussian, KindTag::Subcirculant, KindTag::Srft] {
        g.bench_function(kind.name(), |b| {
            let mut rng = RngStream::new(3, 0).rng();
            b.iter(|| leading_sketch(black_box(&a), 32, kind, 0, &mut rng).unwrap())
        });
    }
    g.finish();
}

fn trailing(c: &mut Criterion) {
    let a = svd_input(128, 124, 4);
    let mut g = c.benchmark_group("trailing_128_r4");
    for method in [
        TrailingMethod::North,
        TrailingMethod::Northwest,
        TrailingMethod::Additive,
        TrailingMethod::LeadingComplement,
    ] {
        g.bench_function(method.name(), |b| {
            let mut rng = RngStream::new(5, 0).rng();
            b.iter(|| {
                trailing_attempt(black_box(&a), 4, method, KindTag::Gaussian, &mut rng).unwrap()
            })
        });
    }
    g.finish();
}

fn skeleton(c: &mut Criterion) {
    let a = svd_input(64, 8, 6);
    c.bench_function("maxvol_64_rank8", |b| {
        b.iter(|| maxvol(black_box(&a), 8, DEFAULT_MAX_SWEEPS, DEFAULT_DOM_TOL).unwrap())
    });
}

fn elimination(c: &mut Criterion) {
    let mut rng = RngStream::new(7, 0).rng();
    let a = adversarial_genp_matrix(64, 2, &mut rng).unwrap();
    let rhs = gaussian_vector(64, 8);
    let mut g = c.benchmark_group("genp_supported_64");
    for (route, name) in [
        (GenpRoute::Augment, "augment"),
        (GenpRoute::Additive, "additive"),
    ] {
        let policy = GenpPolicy {
            route,
            ..GenpPolicy::default()
        };
        g.bench_function(name, |b| {
            b.iter(|| genp_supported_solve(black_box(&a), &rhs, &policy, &mut rng).unwrap())
        });
    }
    g.finish();
}

fn classes(c: &mut Criterion) {
    let mut g = c.benchmark_group("class_sample_128_r2");
    g.sample_size(10);
    for tag in [ClassTag::T1n, ClassTag::T2n, ClassTag::T4s] {
        let tc = TestClass { tag, n: 128, r: 2 };
        g.bench_function(tag.name(), |b| {
            let mut rng = RngStream::new(9, 0).rng();
            b.iter(|| gen_class_sample(&tc, &mut rng).unwrap())
        });
    }
    g.finish();
}

criterion_group!(
    benches,
    dense,
    leading,
    trailing,
    skeleton,
    elimination,
    classes
);
criterion_main!(benches);

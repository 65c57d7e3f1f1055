use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use enstrophy_cert::covering::count_lattice_points;
use enstrophy_cert::nonlinear::direct_convolution;
use enstrophy_cert::sampling::random_field;
use enstrophy_cert::solver::GalerkinSystem;
use enstrophy_cert::{GalerkinSpace, NonlinearEvaluator, Scheme};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn nonlinear(c: &mut Criterion) {
    let mut group = c.benchmark_group("nonlinear");
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for k in [4usize, 8, 16] {
        let u = random_field(k, 1.0, &mut rng);
        let mut evaluator = NonlinearEvaluator::new();
        group.bench_with_input(BenchmarkId::new("pseudospectral", k), &u, |b, u| {
            b.iter(|| evaluator.evaluate(black_box(u), k))
        });
    }
    let u = random_field(3, 1.0, &mut rng);
    group.bench_function("direct/3", |b| b.iter(|| direct_convolution(black_box(&u), 3)));
    group.finish();
}

fn solver_step(c: &mut Criterion) {
    let mut group = c.benchmark_group("step");
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for k in [4usize, 8] {
        let space = Arc::new(GalerkinSpace::ball(k));
        let alpha = space.coords(&random_field(k, 1.0, &mut rng));
        let mut system = GalerkinSystem::new(space);
        group.bench_with_input(BenchmarkId::new("if-rk4", k), &alpha, |b, a| {
            b.iter(|| system.step(Scheme::IntegratingFactorRk4, black_box(a), 1e-3))
        });
    }
    group.finish();
}

fn lattice(c: &mut Criterion) {
    let mut group = c.benchmark_group("lattice_count");
    for (n, m, s) in [(12usize, 1usize, 1.05), (12, 2, 0.6), (36, 1, 0.5)] {
        group.bench_function(format!("N{n}_M{m}"), |b| {
            b.iter(|| count_lattice_points(n, m, black_box(s), u64::MAX))
        });
    }
    group.finish();
}

criterion_group!(benches, nonlinear, solver_step, lattice);
criterion_main!(benches);

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use cupflow_core::action::{action_gradient, random_band_limited, ChiCutoff};
use cupflow_core::cohomology::{product_model, relative_cup_length};
use cupflow_core::dynamics::{solve_critical, TruncationLevel};
use cupflow_core::hamiltonian::{benchmark_spec, lift};
use cupflow_core::loops::ProductPoint;

fn bench_action_gradient(c: &mut Criterion) {
    let h = lift(benchmark_spec()).unwrap();
    let chi = ChiCutoff::standard(0.05).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(1);
    let p = ProductPoint::new(
        random_band_limited(&mut rng, 2, 8),
        random_band_limited(&mut rng, 4, 8),
        0.1,
    );
    c.bench_function("action_gradient_k8", |b| {
        b.iter(|| action_gradient(&h, &chi, &p))
    });
}

fn bench_solve(c: &mut Criterion) {
    let h = lift(benchmark_spec()).unwrap();
    let chi = ChiCutoff::standard(0.05).unwrap();
    let level = TruncationLevel::symmetric(4).unwrap();
    let mut rng = ChaCha20Rng::seed_from_u64(2);
    c.bench_function("solve_critical_k4", |b| {
        b.iter_batched(
            || {
                ProductPoint::new(
                    random_band_limited(&mut rng, 2, 4).scaled(0.05),
                    random_band_limited(&mut rng, 4, 4),
                    0.0,
                )
            },
            |start| solve_critical(&h, &chi, &level, &start, 1e-10, 120, 8.0),
            BatchSize::SmallInput,
        )
    });
}

fn bench_cup_length(c: &mut Criterion) {
    c.bench_function("relative_cup_length_product_2_3", |b| {
        b.iter(|| {
            let model = product_model(2, 3).unwrap();
            relative_cup_length(&model)
        })
    });
}

criterion_group!(benches, bench_action_gradient, bench_solve, bench_cup_length);
criterion_main!(benches);

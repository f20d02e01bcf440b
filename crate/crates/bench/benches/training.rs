use advwalk::synthetic::{generate, SyntheticConfig};
use advwalk::{Method, TrainConfig, Trainer, WalkConfig};
use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

fn epochs(c: &mut Criterion) {
    let (g, _) = generate(&SyntheticConfig {
        class_sizes: vec![200, 150, 150],
        edges: 1000,
        homophily: 0.8,
        degree_exponent: 2.6,
        max_propensity: 40.0,
        seed: 0,
    })
    .unwrap();
    let mut group = c.benchmark_group("epoch_500_nodes");
    group.sample_size(10);
    for method in [Method::Dwns, Method::Rand, Method::AdvT, Method::IAdvT] {
        let cfg = TrainConfig { method, epochs: 2, pretrain_epochs: 1, ..Default::default() };
        let mut warm = Trainer::new(&g, WalkConfig::default(), cfg).unwrap();
        // Two epochs build the scale matrix and direction sets up front.
        warm.run_epoch().unwrap();
        warm.run_epoch().unwrap();
        group.bench_function(method.as_str(), |b| {
            b.iter_batched(|| warm.clone(), |mut t| t.run_epoch().unwrap().clean_loss, BatchSize::LargeInput)
        });
    }
    group.finish();
}

criterion_group!(benches, epochs);
criterion_main!(benches);

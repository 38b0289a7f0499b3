//! Sequential vs parallel throughput for the hot paths: forest training,
//! batched prediction, and batch attacks.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use permute_attack::analysis::run_batch;
use permute_attack::ga::AttackConfig;
use permute_attack::model::{train_forest, ModelHandle};
use permute_attack::par::Workers;
use permute_attack::synth;
use permute_attack::tabular::Instance;

fn bench_forest(c: &mut Criterion) {
    let ds = synth::dataset(1000, synth::DEFAULT_SEED).unwrap();
    let (train, test) = ds.train_test_split(0.6, 42);

    let mut group = c.benchmark_group("forest");
    group.sample_size(20);
    group.bench_function("train_10_trees", |b| {
        b.iter(|| train_forest(&train, 10, 12, 2, 9).unwrap())
    });

    let forest = train_forest(&train, 10, 12, 2, 9).unwrap();
    let handle = ModelHandle::from_forest(forest);
    let batch: Vec<Instance> = (0..test.n_rows()).map(|i| test.instance(i)).collect();
    group.bench_function("predict_400", |b| {
        b.iter(|| handle.predict_proba(&batch, &train.schema).unwrap())
    });
    group.finish();
}

fn bench_batch_attack(c: &mut Criterion) {
    let ds = synth::dataset(1000, synth::DEFAULT_SEED).unwrap();
    let (train, test) = ds.train_test_split(0.6, 42);
    let forest = train_forest(&train, 10, 12, 2, 9).unwrap();
    let handle = ModelHandle::from_forest(forest);
    let batch: Vec<Instance> = (0..24).map(|i| test.instance(i)).collect();
    let config = AttackConfig {
        seed: 1,
        ..AttackConfig::default()
    };

    let mut group = c.benchmark_group("batch_attack_24_rows");
    group.sample_size(10);
    group.bench_with_input(BenchmarkId::from_parameter("sequential"), &(), |b, _| {
        b.iter(|| run_batch(&batch, &handle, &train, &config, None, Workers::Sequential).unwrap())
    });
    #[cfg(feature = "parallel")]
    group.bench_with_input(BenchmarkId::from_parameter("parallel"), &(), |b, _| {
        b.iter(|| run_batch(&batch, &handle, &train, &config, None, Workers::Auto).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_forest, bench_batch_attack);
criterion_main!(benches);

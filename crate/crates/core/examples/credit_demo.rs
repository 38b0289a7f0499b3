//! End-to-end run over the bundled synthetic credit dataset: train the
//! reference forest, attack the test split, and print the headline numbers
//! (accuracy, flip rate, sparsity, restricted-attack rate, realism).
//!
//!     cargo run --release -p permute-attack --example credit_demo

use permute_attack::analysis::{
    cooccurrence, realism_discriminator, restricted_attack, run_batch,
};
use permute_attack::ga::AttackConfig;
use permute_attack::model::{train_forest, ForestHyper, ModelHandle};
use permute_attack::par::Workers;
use permute_attack::synth;
use permute_attack::tabular::Instance;

fn main() {
    let t0 = std::time::Instant::now();
    let ds = synth::dataset(1000, synth::DEFAULT_SEED).unwrap();
    let (train, test) = ds.train_test_split(0.6, 42);
    println!(
        "dataset: {} rows, {} features, {} train / {} test",
        ds.n_rows(),
        ds.n_features(),
        train.n_rows(),
        test.n_rows()
    );

    let forest = train_forest(&train, 10, 12, 2, 9).unwrap();
    let handle = ModelHandle::from_forest(forest.clone());
    let accuracy = |data: &permute_attack::tabular::Dataset| {
        let batch: Vec<Instance> = (0..data.n_rows()).map(|i| data.instance(i)).collect();
        let probs = handle.predict_proba(&batch, &data.schema).unwrap();
        probs
            .iter()
            .zip(&data.labels)
            .filter(|(p, &l)| p.argmax() == l)
            .count() as f64
            / data.n_rows() as f64
    };
    println!("train accuracy: {:.3}", accuracy(&train));
    println!("test accuracy:  {:.3}", accuracy(&test));

    let config = AttackConfig {
        seed: 1,
        ..AttackConfig::default()
    };
    let instances: Vec<Instance> = (0..test.n_rows()).map(|i| test.instance(i)).collect();

    let out = run_batch(&instances, &handle, &train, &config, None, Workers::Auto).unwrap();
    println!(
        "attack: {}/{} flipped ({:.1}%), mean changed features {:.2}",
        out.summary.n_success,
        out.summary.n_attacked,
        100.0 * out.summary.success_rate,
        out.summary.mean_changed_features
    );
    println!("change histogram: {:?}", out.summary.histogram);
    let mut counts: Vec<(&String, &usize)> = out.summary.per_feature_change_count.iter().collect();
    counts.sort_by(|a, b| b.1.cmp(a.1));
    println!("most changed features:");
    for (name, count) in counts.iter().take(8) {
        println!("  {count:>4}  {name}");
    }

    let graph = cooccurrence(&out.results, &train.schema);
    println!(
        "co-occurrence: {} nodes, {} edges; top edges:",
        graph.nodes.len(),
        graph.edges.len()
    );
    let mut edges = graph.edges.clone();
    edges.sort_by(|a, b| b.weight.cmp(&a.weight));
    for e in edges.iter().take(5) {
        println!("  {:>3}  {} -- {}", e.weight, e.a, e.b);
    }

    // Attack restricted to the sensitive attributes.
    let sensitive: Vec<String> = ["age", "personal_status_sex", "foreign_worker"]
        .iter()
        .map(|s| s.to_string())
        .collect();
    let restricted =
        restricted_attack(&instances, &sensitive, &handle, &train, &config, Workers::Auto)
            .unwrap();
    println!(
        "sensitive-only attack: {}/{} flipped ({:.1}%)",
        restricted.batch.summary.n_success,
        restricted.batch.summary.n_attacked,
        100.0 * restricted.batch.summary.success_rate
    );

    // Excluding the most frequently changed features.
    let top3: Vec<String> = counts.iter().take(3).map(|(n, _)| (*n).clone()).collect();
    let allowed: Vec<String> = train
        .schema
        .iter()
        .map(|f| f.name.clone())
        .filter(|n| !top3.contains(n))
        .collect();
    let excluded =
        restricted_attack(&instances, &allowed, &handle, &train, &config, Workers::Auto).unwrap();
    println!(
        "excluding top-3 {:?}: {:.1}% success, mean changed {:.2}",
        top3,
        100.0 * excluded.batch.summary.success_rate,
        excluded.batch.summary.mean_changed_features
    );

    // Realism: discriminator fail rate with and without Gibbs sampling.
    let hyper = ForestHyper {
        n_trees: 10,
        max_depth: 12,
        min_leaf: 2,
    };
    for gibbs in [false, true] {
        let cfg = AttackConfig {
            gibbs,
            ..config.clone()
        };
        let report =
            realism_discriminator(&test, &handle, &train, &cfg, hyper, 99, 1, 2, Workers::Auto)
                .unwrap();
        println!(
            "realism (gibbs={gibbs}): fail rate {:.3} ({} train CFs, {} test CFs)",
            report.fail_rate, report.n_train_counterfactuals, report.n_test_counterfactuals
        );
    }

    println!("total time: {:.1?}", t0.elapsed());
}

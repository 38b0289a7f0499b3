//! Batch experiment harness and model criticism over many attack results:
//! change statistics, co-occurrence graphs, restricted-feature probes, and
//! the realism discriminator.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ga::{attack_with_context, AttackConfig, AttackContext, AttackResult};
use crate::model::{train_forest, ForestHyper, ModelHandle};
use crate::par::{map_indexed, Workers};
use crate::tabular::{Dataset, FeatureKind, FeatureSchema, Instance};

/// Direction of feature changes over successful results. Numeric kinds count
/// increases and decreases; categorical kinds tally `old -> new` transitions.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct DirectionStats {
    pub increases: usize,
    pub decreases: usize,
    pub transitions: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchSummary {
    pub n_attacked: usize,
    pub n_success: usize,
    pub success_rate: f64,
    /// Mean changed-feature count over successful attacks.
    pub mean_changed_features: f64,
    /// Changed-feature count -> number of successful results.
    pub histogram: BTreeMap<usize, usize>,
    pub per_feature_change_count: BTreeMap<String, usize>,
    pub per_feature_direction: BTreeMap<String, DirectionStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BatchFailure {
    pub index: usize,
    pub message: String,
}

#[derive(Debug)]
pub struct BatchOutput {
    pub results: Vec<AttackResult>,
    pub summary: BatchSummary,
    /// Per-instance errors (backend failures); counted as attacked but not
    /// successful, without aborting the batch.
    pub failures: Vec<BatchFailure>,
}

fn record_direction(
    stats: &mut DirectionStats,
    feat: &FeatureSchema,
    old: f64,
    new: f64,
) {
    match feat.kind() {
        FeatureKind::Categorical => {
            let key = format!("{} -> {}", feat.display_value(old), feat.display_value(new));
            *stats.transitions.entry(key).or_insert(0) += 1;
        }
        _ => {
            if new > old {
                stats.increases += 1;
            } else {
                stats.decreases += 1;
            }
        }
    }
}

/// Pure fold over a result list; recomputation always matches.
pub fn summarize(
    results: &[AttackResult],
    n_attacked: usize,
    schema: &[FeatureSchema],
) -> BatchSummary {
    let mut histogram = BTreeMap::new();
    let mut per_feature_change_count = BTreeMap::new();
    let mut per_feature_direction: BTreeMap<String, DirectionStats> = BTreeMap::new();
    let mut n_success = 0usize;
    let mut total_changed = 0usize;

    for result in results {
        if !result.success || result.changed_features.is_empty() {
            if result.success {
                // Degenerate zero-change success; excluded from change stats.
                n_success += 1;
            }
            continue;
        }
        n_success += 1;
        let l0 = result.changed_features.len();
        total_changed += l0;
        *histogram.entry(l0).or_insert(0) += 1;
        for change in &result.changed_features {
            let feat = &schema[change.index];
            *per_feature_change_count
                .entry(feat.name.clone())
                .or_insert(0) += 1;
            record_direction(
                per_feature_direction.entry(feat.name.clone()).or_default(),
                feat,
                change.old,
                change.new,
            );
        }
    }

    let n_counted: usize = histogram.values().sum();
    BatchSummary {
        n_attacked,
        n_success,
        success_rate: if n_attacked == 0 {
            0.0
        } else {
            n_success as f64 / n_attacked as f64
        },
        mean_changed_features: if n_counted == 0 {
            0.0
        } else {
            total_changed as f64 / n_counted as f64
        },
        histogram,
        per_feature_change_count,
        per_feature_direction,
    }
}

/// Target class for an instance whose current prediction is `orig_class`.
fn resolve_target(
    supplied: Option<usize>,
    orig_class: usize,
    n_classes: usize,
) -> Result<usize> {
    match supplied {
        Some(t) if t < n_classes => Ok(t),
        Some(t) => Err(Error::InvalidConfig(format!(
            "target class {t} out of range for {n_classes} classes"
        ))),
        None if n_classes == 2 => Ok(1 - orig_class),
        None => Err(Error::InvalidConfig(
            "a target class must be supplied for models with more than 2 classes".into(),
        )),
    }
}

/// One attack per instance with per-instance seeds `config.seed + index`,
/// so results do not depend on batch ordering. `target = None` flips the
/// predicted class (binary models only).
pub fn run_batch(
    instances: &[Instance],
    model: &ModelHandle,
    train: &Dataset,
    config: &AttackConfig,
    target: Option<usize>,
    workers: Workers,
) -> Result<BatchOutput> {
    if instances.is_empty() {
        return Err(Error::Domain("empty instance list".into()));
    }
    let ctx = AttackContext::new(train, config)?;
    let orig_probs = model.predict_proba(instances, &ctx.schema)?;

    let outcomes: Vec<std::result::Result<AttackResult, String>> =
        map_indexed(instances, workers, |i, inst| {
            let mut cfg = config.clone();
            cfg.seed = config.seed.wrapping_add(i as u64);
            resolve_target(target, orig_probs[i].argmax(), model.n_classes())
                .and_then(|t| attack_with_context(inst, t, model, &ctx, &cfg))
                .map_err(|e| e.to_string())
        });

    let mut results = Vec::new();
    let mut failures = Vec::new();
    for (index, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok(result) => results.push(result),
            Err(message) => failures.push(BatchFailure { index, message }),
        }
    }
    let summary = summarize(&results, instances.len(), &ctx.schema);
    Ok(BatchOutput {
        results,
        summary,
        failures,
    })
}

/// Unordered feature pair with the number of successful results where both
/// features changed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoEdge {
    pub a: String,
    pub b: String,
    pub weight: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoOccurrenceGraph {
    /// Features changed in at least one successful result, lexicographic.
    pub nodes: Vec<String>,
    /// Lexicographically ordered pairs, weights >= 1, no self-edges.
    pub edges: Vec<CoEdge>,
}

pub fn cooccurrence(results: &[AttackResult], schema: &[FeatureSchema]) -> CoOccurrenceGraph {
    let mut node_set = std::collections::BTreeSet::new();
    let mut edge_weights: BTreeMap<(String, String), usize> = BTreeMap::new();
    for result in results {
        if !result.success {
            continue;
        }
        let mut names: Vec<&str> = result
            .changed_features
            .iter()
            .map(|c| schema[c.index].name.as_str())
            .collect();
        names.sort_unstable();
        for name in &names {
            node_set.insert(name.to_string());
        }
        for i in 0..names.len() {
            for j in i + 1..names.len() {
                *edge_weights
                    .entry((names[i].to_string(), names[j].to_string()))
                    .or_insert(0) += 1;
            }
        }
    }
    CoOccurrenceGraph {
        nodes: node_set.into_iter().collect(),
        edges: edge_weights
            .into_iter()
            .map(|((a, b), weight)| CoEdge { a, b, weight })
            .collect(),
    }
}

impl CoOccurrenceGraph {
    /// `nodeA<TAB>nodeB<TAB>weight` lines.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for e in &self.edges {
            out.push_str(&format!("{}\t{}\t{}\n", e.a, e.b, e.weight));
        }
        out
    }

    /// GraphViz DOT with edge width proportional to weight.
    pub fn to_dot(&self) -> String {
        let max_weight = self.edges.iter().map(|e| e.weight).max().unwrap_or(1) as f64;
        let mut out = String::from("graph cooccurrence {\n");
        for node in &self.nodes {
            out.push_str(&format!("  \"{node}\";\n"));
        }
        for e in &self.edges {
            let penwidth = 0.5 + 4.5 * e.weight as f64 / max_weight;
            out.push_str(&format!(
                "  \"{}\" -- \"{}\" [weight={}, penwidth={:.2}];\n",
                e.a, e.b, e.weight, penwidth
            ));
        }
        out.push_str("}\n");
        out
    }

    pub fn weight(&self, a: &str, b: &str) -> usize {
        let (x, y) = if a <= b { (a, b) } else { (b, a) };
        self.edges
            .iter()
            .find(|e| e.a == x && e.b == y)
            .map_or(0, |e| e.weight)
    }
}

#[derive(Debug)]
pub struct RestrictedOutput {
    pub batch: BatchOutput,
    /// Per flip direction (`orig_label -> target_label`), the per-feature
    /// direction aggregates over successful results.
    pub by_flip_direction: BTreeMap<String, BTreeMap<String, DirectionStats>>,
}

/// Identical machinery with mutability restricted to `allowed_features`.
pub fn restricted_attack(
    instances: &[Instance],
    allowed_features: &[String],
    model: &ModelHandle,
    train: &Dataset,
    config: &AttackConfig,
    workers: Workers,
) -> Result<RestrictedOutput> {
    if allowed_features.is_empty() {
        return Err(Error::InvalidConfig(
            "allowed_features must be non-empty".into(),
        ));
    }
    let mut cfg = config.clone();
    cfg.mutable_features = Some(allowed_features.iter().cloned().collect());
    let batch = run_batch(instances, model, train, &cfg, None, workers)?;

    let mut by_flip_direction: BTreeMap<String, BTreeMap<String, DirectionStats>> =
        BTreeMap::new();
    for result in &batch.results {
        if !result.success || result.changed_features.is_empty() {
            continue;
        }
        let direction = format!(
            "{} -> {}",
            train.label_names[result.original_class], train.label_names[result.target_class]
        );
        let per_feature = by_flip_direction.entry(direction).or_default();
        for change in &result.changed_features {
            let feat = &train.schema[change.index];
            record_direction(
                per_feature.entry(feat.name.clone()).or_default(),
                feat,
                change.old,
                change.new,
            );
        }
    }
    Ok(RestrictedOutput {
        batch,
        by_flip_direction,
    })
}

/// Trains a fresh forest to separate `real` rows (label 1) from `set_a`
/// rows (label 0) and returns the fraction of `set_b` it classifies as
/// real — the discriminator's failure rate; higher means more realistic.
pub fn discriminator_fail_rate(
    real: &Dataset,
    set_a: &[Instance],
    set_b: &[Instance],
    hyper: ForestHyper,
    seed: u64,
) -> Result<f64> {
    if set_a.is_empty() || set_b.is_empty() {
        return Err(Error::Domain(
            "no counterfactuals to train or test the discriminator".into(),
        ));
    }
    let mut rows = real.rows.clone();
    let mut labels = vec![1usize; rows.len()];
    rows.extend(set_a.iter().map(|inst| inst.values.clone()));
    labels.extend(std::iter::repeat(0).take(set_a.len()));
    let disc_data = Dataset {
        schema: real.schema.clone(),
        rows,
        labels,
        label_names: vec!["generated".into(), "real".into()],
    };
    let forest = train_forest(
        &disc_data,
        hyper.n_trees,
        hyper.max_depth,
        hyper.min_leaf,
        seed,
    )?;
    let handle = ModelHandle::from_forest(forest);
    let probs = handle.predict_proba(set_b, &real.schema)?;
    let fooled = probs.iter().filter(|p| p.argmax() == 1).count();
    Ok(fooled as f64 / set_b.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealismReport {
    pub fail_rate: f64,
    pub n_train_counterfactuals: usize,
    pub n_test_counterfactuals: usize,
}

/// The two-seed protocol: generate counterfactual set A (seed_a), train the
/// discriminator on real-vs-A, generate set B (seed_b), report the fraction
/// of B that fools it.
pub fn realism_discriminator(
    real_test: &Dataset,
    model: &ModelHandle,
    train: &Dataset,
    config: &AttackConfig,
    disc_hyper: ForestHyper,
    disc_seed: u64,
    seed_a: u64,
    seed_b: u64,
    workers: Workers,
) -> Result<RealismReport> {
    if seed_a == seed_b {
        return Err(Error::InvalidConfig(
            "realism seeds must be distinct".into(),
        ));
    }
    let instances: Vec<Instance> = (0..real_test.n_rows())
        .map(|i| real_test.instance(i))
        .collect();

    let generate = |seed: u64| -> Result<Vec<Instance>> {
        let mut cfg = config.clone();
        cfg.seed = seed;
        let out = run_batch(&instances, model, train, &cfg, None, workers)?;
        Ok(out
            .results
            .iter()
            .filter(|r| r.success && !r.changed_features.is_empty())
            .filter_map(|r| r.counterfactual.clone())
            .collect())
    };

    let set_a = generate(seed_a)?;
    let set_b = generate(seed_b)?;
    let fail_rate = discriminator_fail_rate(real_test, &set_a, &set_b, disc_hyper, disc_seed)?;
    Ok(RealismReport {
        fail_rate,
        n_train_counterfactuals: set_a.len(),
        n_test_counterfactuals: set_b.len(),
    })
}

/// Histogram rows as `changed_features,count` CSV.
pub fn histogram_csv(summary: &BatchSummary) -> String {
    let mut out = String::from("changed_features,count\n");
    for (bin, count) in &summary.histogram {
        out.push_str(&format!("{bin},{count}\n"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ga::{AttackResult, ChangedFeature};
    use crate::model::ProbabilityVector;
    use crate::tabular::FeatureDomain;

    fn schema3() -> Vec<FeatureSchema> {
        ["a", "b", "c"]
            .iter()
            .map(|n| FeatureSchema {
                name: n.to_string(),
                domain: FeatureDomain::Ordinal {
                    levels: vec![0.0, 1.0, 2.0],
                },
                mutable: true,
            })
            .collect()
    }

    fn fake_result(changes: &[(usize, f64, f64)]) -> AttackResult {
        AttackResult {
            success: true,
            counterfactual: Some(Instance::new(vec![0.0, 0.0, 0.0])),
            generations_used: 1,
            changed_features: changes
                .iter()
                .map(|(index, old, new)| ChangedFeature {
                    index: *index,
                    old: *old,
                    new: *new,
                })
                .collect(),
            trace: vec![],
            original_probs: ProbabilityVector {
                probs: vec![0.7, 0.3],
            },
            final_probs: ProbabilityVector {
                probs: vec![0.4, 0.6],
            },
            target_class: 1,
            original_class: 0,
            l2_distance: 1.0,
            within_budgets: None,
        }
    }

    #[test]
    fn summary_of_singleton_batch() {
        let results = vec![fake_result(&[(0, 0.0, 1.0), (2, 2.0, 0.0)])];
        let s = summarize(&results, 1, &schema3());
        assert_eq!(s.n_attacked, 1);
        assert_eq!(s.n_success, 1);
        assert_eq!(s.success_rate, 1.0);
        assert_eq!(s.mean_changed_features, 2.0);
        assert_eq!(s.histogram.get(&2), Some(&2usize).map(|_| &1));
        assert_eq!(s.per_feature_change_count["a"], 1);
        assert_eq!(s.per_feature_direction["a"].increases, 1);
        assert_eq!(s.per_feature_direction["c"].decreases, 1);
        let total: usize = s.histogram.values().sum();
        assert_eq!(total, s.n_success);
    }

    #[test]
    fn summary_of_empty_results() {
        let s = summarize(&[], 5, &schema3());
        assert_eq!(s.n_success, 0);
        assert_eq!(s.success_rate, 0.0);
        assert!(s.histogram.is_empty());
        assert_eq!(s.mean_changed_features, 0.0);
    }

    #[test]
    fn cooccurrence_counts_pairs() {
        let results = vec![
            fake_result(&[(0, 0.0, 1.0), (1, 0.0, 1.0)]),
            fake_result(&[(0, 0.0, 2.0), (1, 1.0, 0.0)]),
            fake_result(&[(2, 0.0, 1.0)]),
        ];
        let g = cooccurrence(&results, &schema3());
        assert_eq!(g.nodes, vec!["a", "b", "c"]);
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.weight("a", "b"), 2);
        assert_eq!(g.weight("b", "a"), 2);
        assert_eq!(g.weight("a", "c"), 0);

        let edge_list = g.to_edge_list();
        assert_eq!(edge_list, "a\tb\t2\n");
        let dot = g.to_dot();
        assert!(dot.contains("\"a\" -- \"b\" [weight=2"));
    }

    #[test]
    fn cooccurrence_no_pairs_no_edges() {
        let results = vec![fake_result(&[(0, 0.0, 1.0)]), fake_result(&[(1, 0.0, 1.0)])];
        let g = cooccurrence(&results, &schema3());
        assert_eq!(g.nodes.len(), 2);
        assert!(g.edges.is_empty());
    }

    #[test]
    fn edge_weight_bounded_by_node_counts() {
        let results = vec![
            fake_result(&[(0, 0.0, 1.0), (1, 0.0, 1.0)]),
            fake_result(&[(0, 0.0, 1.0)]),
        ];
        let g = cooccurrence(&results, &schema3());
        let s = summarize(&results, 2, &schema3());
        for e in &g.edges {
            assert!(e.weight <= s.per_feature_change_count[&e.a]);
            assert!(e.weight <= s.per_feature_change_count[&e.b]);
        }
    }

    #[test]
    fn histogram_csv_renders() {
        let results = vec![fake_result(&[(0, 0.0, 1.0)])];
        let s = summarize(&results, 1, &schema3());
        assert_eq!(histogram_csv(&s), "changed_features,count\n1,1\n");
    }
}

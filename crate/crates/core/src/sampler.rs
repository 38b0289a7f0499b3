//! Perturbation-value generation.
//!
//! All perturbed values come from the training data: marginal draws follow a
//! column's empirical distribution, and conditional draws are restricted to
//! training rows whose discretized context (all features but the one being
//! resampled) matches the instance. Gibbs sweeps over the conditionals keep
//! joint multi-feature perturbations in-distribution, and the
//! nearest-conditional lookup does the same for crossover donations.
//!
//! Conditional lookups are pure functions of (feature, context bins), so
//! relaxed lookups are memoized behind a lock; the cache only short-circuits
//! recomputation and never changes a result.

use std::collections::HashMap;
use std::sync::{Arc, RwLock};

use rand::distr::weighted::WeightedIndex;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::tabular::{Dataset, DiscretizedView, FeatureSchema, Instance};

/// Admissible values per feature: the distinct values observed in the
/// training column, weighted by their frequency so a draw reproduces the
/// column's empirical distribution.
#[derive(Debug, Clone)]
pub struct PermutationDomain {
    values: Vec<Vec<f64>>,
    counts: Vec<Vec<u32>>,
    samplers: Vec<WeightedIndex<u32>>,
}

impl PermutationDomain {
    pub fn from_rows(rows: &[Vec<f64>], n_features: usize) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::EmptyDataset());
        }
        let mut values = Vec::with_capacity(n_features);
        let mut counts = Vec::with_capacity(n_features);
        let mut samplers = Vec::with_capacity(n_features);
        for j in 0..n_features {
            let mut column: Vec<f64> = rows.iter().map(|r| r[j]).collect();
            column.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let mut vals = Vec::new();
            let mut cnts: Vec<u32> = Vec::new();
            for v in column {
                if vals.last() == Some(&v) {
                    *cnts.last_mut().unwrap() += 1;
                } else {
                    vals.push(v);
                    cnts.push(1);
                }
            }
            samplers.push(
                WeightedIndex::new(cnts.iter().copied())
                    .map_err(|e| Error::Domain(format!("bad column weights: {e}")))?,
            );
            values.push(vals);
            counts.push(cnts);
        }
        Ok(PermutationDomain {
            values,
            counts,
            samplers,
        })
    }

    /// Distinct admissible values for a feature, ascending.
    pub fn admissible(&self, feature: usize) -> &[f64] {
        &self.values[feature]
    }

    pub fn observation_counts(&self, feature: usize) -> &[u32] {
        &self.counts[feature]
    }

    pub fn contains(&self, feature: usize, value: f64) -> bool {
        self.values[feature]
            .binary_search_by(|v| v.partial_cmp(&value).unwrap())
            .is_ok()
    }

    /// Empirical draw from the training column.
    pub fn draw(&self, feature: usize, rng: &mut impl Rng) -> f64 {
        self.values[feature][rng.sample(&self.samplers[feature])]
    }
}

type ContextKey = Box<[u16]>;

/// Immutable sampling context shared by the optimizer's workers.
pub struct Sampler {
    schema: Vec<FeatureSchema>,
    domain: PermutationDomain,
    n_features: usize,
    n_rows: usize,
    /// Row-major bin matrix of the training data.
    disc: Vec<u16>,
    /// Column-major raw values for fast gathers.
    columns: Vec<Vec<f64>>,
    /// Exact-context lookup: per feature, context bins -> column values of
    /// the rows sharing that context.
    exact: Vec<HashMap<ContextKey, Arc<Vec<f64>>>>,
    /// Memo for contexts that needed relaxation.
    relaxed: RwLock<HashMap<(usize, ContextKey), Arc<Vec<f64>>>>,
}

const RELAX_CACHE_CAP: usize = 1 << 20;

impl Sampler {
    /// Discretizes the dataset (storing bin edges into its schema) and
    /// builds the domain and conditional index from its rows.
    pub fn fit(dataset: &mut Dataset, n_bins: usize) -> Result<Self> {
        let view = dataset.discretize(n_bins)?;
        Self::from_discretized(dataset, &view)
    }

    /// Uses the dataset's current bin edges (e.g. restored from a schema
    /// file) without recomputing them.
    pub fn from_dataset(dataset: &Dataset) -> Result<Self> {
        let view = dataset.discretized_view();
        Self::from_discretized(dataset, &view)
    }

    pub fn from_discretized(dataset: &Dataset, view: &DiscretizedView) -> Result<Self> {
        let m = dataset.n_features();
        let d = dataset.n_rows();
        let domain = PermutationDomain::from_rows(&dataset.rows, m)?;

        let mut disc = Vec::with_capacity(d * m);
        for row in &view.rows {
            disc.extend_from_slice(row);
        }
        let columns: Vec<Vec<f64>> = (0..m)
            .map(|j| dataset.rows.iter().map(|r| r[j]).collect())
            .collect();

        let mut exact: Vec<HashMap<ContextKey, Arc<Vec<f64>>>> = vec![HashMap::new(); m];
        let mut row_lists: Vec<HashMap<ContextKey, Vec<f64>>> = vec![HashMap::new(); m];
        for (r, row) in view.rows.iter().enumerate() {
            for i in 0..m {
                let mut key = Vec::with_capacity(m - 1);
                key.extend_from_slice(&row[..i]);
                key.extend_from_slice(&row[i + 1..]);
                row_lists[i]
                    .entry(key.into_boxed_slice())
                    .or_default()
                    .push(columns[i][r]);
            }
        }
        for (i, lists) in row_lists.into_iter().enumerate() {
            for (key, vals) in lists {
                exact[i].insert(key, Arc::new(vals));
            }
        }

        Ok(Sampler {
            schema: dataset.schema.clone(),
            domain,
            n_features: m,
            n_rows: d,
            disc,
            columns,
            exact,
            relaxed: RwLock::new(HashMap::new()),
        })
    }

    pub fn schema(&self) -> &[FeatureSchema] {
        &self.schema
    }

    pub fn domain(&self) -> &PermutationDomain {
        &self.domain
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    fn check_mutable(&self, feature: usize) -> Result<()> {
        if !self.schema[feature].mutable {
            return Err(Error::ImmutableFeature(self.schema[feature].name.clone()));
        }
        Ok(())
    }

    fn bins_of(&self, instance: &Instance) -> Vec<u16> {
        instance
            .values
            .iter()
            .zip(&self.schema)
            .map(|(v, f)| f.bin_of(*v) as u16)
            .collect()
    }

    /// Replaces `values[i]` with an empirical draw from the training column;
    /// all other entries unchanged.
    pub fn permute_feature(
        &self,
        instance: &Instance,
        feature: usize,
        rng: &mut impl Rng,
    ) -> Result<Instance> {
        self.check_mutable(feature)?;
        let mut out = instance.clone();
        out.values[feature] = self.domain.draw(feature, rng);
        Ok(out)
    }

    /// Feature-i values of all training rows whose discretized context
    /// matches the instance's. An empty context is progressively relaxed by
    /// dropping the condition where the closest training row deviates most
    /// (ties to the lowest feature index); with every condition dropped this
    /// degrades to the marginal column.
    pub fn conditional_values(&self, instance: &Instance, feature: usize) -> Arc<Vec<f64>> {
        let inst_bins = self.bins_of(instance);
        self.conditional_for_bins(feature, &inst_bins)
    }

    fn conditional_for_bins(&self, feature: usize, inst_bins: &[u16]) -> Arc<Vec<f64>> {
        let m = self.n_features;
        let mut key = Vec::with_capacity(m - 1);
        key.extend_from_slice(&inst_bins[..feature]);
        key.extend_from_slice(&inst_bins[feature + 1..]);
        let key: ContextKey = key.into_boxed_slice();

        if let Some(values) = self.exact[feature].get(&key) {
            return Arc::clone(values);
        }
        let cache_key = (feature, key);
        if let Some(values) = self.relaxed.read().unwrap().get(&cache_key) {
            return Arc::clone(values);
        }
        let values = Arc::new(self.relax(feature, inst_bins));
        let mut cache = self.relaxed.write().unwrap();
        if cache.len() < RELAX_CACHE_CAP {
            cache.insert(cache_key, Arc::clone(&values));
        }
        values
    }

    fn relax(&self, feature: usize, inst_bins: &[u16]) -> Vec<f64> {
        let m = self.n_features;
        let d = self.n_rows;

        // Per-row, per-feature bin deviations for this query.
        let mut dev = vec![0u16; d * m];
        for r in 0..d {
            let row = &self.disc[r * m..(r + 1) * m];
            let out = &mut dev[r * m..(r + 1) * m];
            for j in 0..m {
                out[j] = row[j].abs_diff(inst_bins[j]);
            }
        }

        let mut active: Vec<usize> = (0..m).filter(|&j| j != feature).collect();
        loop {
            if active.is_empty() {
                return self.columns[feature].clone();
            }
            // Closest row under the active conditions, early-exiting rows
            // that already exceed the best distance.
            let mut best_row = 0usize;
            let mut best_dist = u32::MAX;
            for r in 0..d {
                let row_dev = &dev[r * m..(r + 1) * m];
                let mut dist = 0u32;
                for &j in &active {
                    dist += row_dev[j] as u32;
                    if dist >= best_dist {
                        break;
                    }
                }
                if dist < best_dist {
                    best_dist = dist;
                    best_row = r;
                    if dist == 0 {
                        break;
                    }
                }
            }
            if best_dist == 0 {
                let mut out = Vec::new();
                'rows: for r in 0..d {
                    let row_dev = &dev[r * m..(r + 1) * m];
                    for &j in &active {
                        if row_dev[j] != 0 {
                            continue 'rows;
                        }
                    }
                    out.push(self.columns[feature][r]);
                }
                return out;
            }
            let best_dev = &dev[best_row * m..(best_row + 1) * m];
            let drop_pos = (0..active.len())
                .max_by_key(|&p| (best_dev[active[p]], std::cmp::Reverse(active[p])))
                .unwrap();
            active.remove(drop_pos);
        }
    }

    /// Joint perturbation of a feature set: marginal initialization followed
    /// by `n_iter` Gibbs sweeps over the conditional distributions. Features
    /// outside the set are never modified.
    pub fn gibbs_perturb(
        &self,
        instance: &Instance,
        features: &[usize],
        n_iter: usize,
        rng: &mut impl Rng,
    ) -> Result<Instance> {
        let mut targets: Vec<usize> = features.to_vec();
        targets.sort_unstable();
        targets.dedup();
        if targets.is_empty() {
            return Err(Error::Domain(
                "gibbs_perturb needs a non-empty feature set".into(),
            ));
        }
        if n_iter == 0 {
            return Err(Error::InvalidConfig("gibbs iterations must be >= 1".into()));
        }
        for &f in &targets {
            self.check_mutable(f)?;
        }

        let mut current = instance.clone();
        for &f in &targets {
            current.values[f] = self.domain.draw(f, rng);
        }
        let mut bins = self.bins_of(&current);
        let mut order = targets.clone();
        for _ in 0..n_iter {
            order.shuffle(rng);
            for &f in &order {
                let candidates = self.conditional_for_bins(f, &bins);
                let value = candidates[rng.random_range(0..candidates.len())];
                current.values[f] = value;
                bins[f] = self.schema[f].bin_of(value) as u16;
            }
        }
        Ok(current)
    }

    /// Among the conditional candidates for `feature`, the value closest to
    /// `target`: absolute difference for numeric kinds, exact match for
    /// categorical kinds with a uniform draw over the distinct candidates
    /// when the target is absent.
    pub fn nearest_conditional_value(
        &self,
        instance: &Instance,
        feature: usize,
        target: f64,
        rng: &mut impl Rng,
    ) -> f64 {
        let candidates = self.conditional_values(instance, feature);
        match self.schema[feature].kind() {
            crate::tabular::FeatureKind::Categorical => {
                if candidates.contains(&target) {
                    return target;
                }
                let mut distinct: Vec<f64> = candidates.to_vec();
                distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
                distinct.dedup();
                distinct[rng.random_range(0..distinct.len())]
            }
            _ => candidates
                .iter()
                .copied()
                .fold(None::<f64>, |best, v| match best {
                    None => Some(v),
                    Some(b) => {
                        let better = ((v - target).abs(), v) < ((b - target).abs(), b);
                        Some(if better { v } else { b })
                    }
                })
                .expect("conditional candidates are never empty"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tabular::{FeatureDomain, FeatureKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn ordinal_feature(name: &str, levels: Vec<f64>) -> FeatureSchema {
        FeatureSchema {
            name: name.into(),
            domain: FeatureDomain::Ordinal { levels },
            mutable: true,
        }
    }

    fn categorical_feature(name: &str, n: usize) -> FeatureSchema {
        FeatureSchema {
            name: name.into(),
            domain: FeatureDomain::Categorical {
                levels: (0..n).map(|i| format!("l{i}")).collect(),
            },
            mutable: true,
        }
    }

    fn make_sampler(schema: Vec<FeatureSchema>, rows: Vec<Vec<f64>>) -> Sampler {
        let n = rows.len();
        let mut ds = Dataset {
            schema,
            rows,
            labels: vec![0; n],
            label_names: vec!["0".into(), "1".into()],
        };
        ds.labels[0] = 1;
        Sampler::fit(&mut ds, 5).unwrap()
    }

    #[test]
    fn singleton_domain_draw_is_deterministic() {
        let sampler = make_sampler(
            vec![
                ordinal_feature("a", vec![5.0]),
                ordinal_feature("b", vec![1.0, 2.0]),
            ],
            vec![vec![5.0, 1.0], vec![5.0, 2.0]],
        );
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for _ in 0..20 {
            let out = sampler
                .permute_feature(&Instance::new(vec![5.0, 1.0]), 0, &mut rng)
                .unwrap();
            assert_eq!(out.values[0], 5.0);
        }
    }

    #[test]
    fn immutable_feature_rejected() {
        let mut schema = vec![ordinal_feature("a", vec![1.0, 2.0])];
        schema[0].mutable = false;
        let rows: Vec<Vec<f64>> = (0..4).map(|i| vec![(i % 2 + 1) as f64]).collect();
        let mut ds = Dataset {
            schema,
            rows,
            labels: vec![0, 1, 0, 1],
            label_names: vec!["0".into(), "1".into()],
        };
        let sampler = Sampler::fit(&mut ds, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let err = sampler
            .permute_feature(&Instance::new(vec![1.0]), 0, &mut rng)
            .unwrap_err();
        assert!(matches!(err, Error::ImmutableFeature(_)));
        let err = sampler
            .gibbs_perturb(&Instance::new(vec![1.0]), &[0], 5, &mut rng)
            .unwrap_err();
        assert!(matches!(err, Error::ImmutableFeature(_)));
    }

    #[test]
    fn marginal_draws_match_training_frequencies() {
        // Column with skewed frequencies: 60% of value 0, 30% of 1, 10% of 2.
        let mut rows = Vec::new();
        for _ in 0..60 {
            rows.push(vec![0.0]);
        }
        for _ in 0..30 {
            rows.push(vec![1.0]);
        }
        for _ in 0..10 {
            rows.push(vec![2.0]);
        }
        let sampler = make_sampler(vec![categorical_feature("c", 3)], rows);
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        let n = 10_000;
        let mut counts = [0u32; 3];
        let base = Instance::new(vec![0.0]);
        for _ in 0..n {
            let out = sampler.permute_feature(&base, 0, &mut rng).unwrap();
            counts[out.values[0] as usize] += 1;
        }
        for (count, p) in counts.iter().zip([0.6, 0.3, 0.1]) {
            let mean = n as f64 * p;
            let sigma = (n as f64 * p * (1.0 - p)).sqrt();
            assert!(
                (*count as f64 - mean).abs() <= 3.0 * sigma,
                "count {count} vs expected {mean} +- {sigma}"
            );
        }
    }

    #[test]
    fn conditional_respects_deterministic_dependency() {
        // x0 == x1 in every training row.
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![(i % 4) as f64, (i % 4) as f64])
            .collect();
        let sampler = make_sampler(
            vec![
                ordinal_feature("x0", vec![0.0, 1.0, 2.0, 3.0]),
                ordinal_feature("x1", vec![0.0, 1.0, 2.0, 3.0]),
            ],
            rows,
        );
        let inst = Instance::new(vec![0.0, 2.0]);
        let vals = sampler.conditional_values(&inst, 0);
        assert!(!vals.is_empty());
        assert!(vals.iter().all(|v| *v == 2.0));
    }

    #[test]
    fn unique_context_returns_singleton() {
        let rows = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]];
        let sampler = make_sampler(
            vec![
                ordinal_feature("x0", vec![0.0, 1.0, 2.0]),
                ordinal_feature("x1", vec![0.0, 1.0, 2.0]),
            ],
            rows,
        );
        let vals = sampler.conditional_values(&Instance::new(vec![0.0, 1.0]), 0);
        assert_eq!(*vals, vec![1.0]);
    }

    #[test]
    fn absent_context_fully_relaxes_to_marginal() {
        // Level l2 exists in the schema but never in the training rows, so
        // conditioning on it cannot be satisfied and every condition drops.
        let rows = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![2.0, 1.0],
            vec![3.0, 1.0],
        ];
        let sampler = make_sampler(
            vec![
                ordinal_feature("x0", vec![0.0, 1.0, 2.0, 3.0]),
                categorical_feature("x1", 3),
            ],
            rows,
        );
        let vals = sampler.conditional_values(&Instance::new(vec![0.0, 2.0]), 0);
        let mut sorted: Vec<f64> = vals.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(sorted, vec![0.0, 1.0, 2.0, 3.0]);
    }

    #[test]
    fn partial_relaxation_drops_farthest_condition_first() {
        // Feature 0 is resampled. Conditions: x1 and x2. The instance context
        // (x1=3, x2=0) is absent; the closest training row (30, 3, 1) matches
        // on x1 and deviates on x2, so x2 drops first and the surviving x1=3
        // condition selects the {30, 40} rows.
        let rows = vec![
            vec![10.0, 0.0, 0.0],
            vec![20.0, 0.0, 0.0],
            vec![30.0, 3.0, 1.0],
            vec![40.0, 3.0, 1.0],
        ];
        let sampler = make_sampler(
            vec![
                ordinal_feature("x0", vec![10.0, 20.0, 30.0, 40.0]),
                ordinal_feature("x1", vec![0.0, 1.0, 2.0, 3.0]),
                ordinal_feature("x2", vec![0.0, 1.0]),
            ],
            rows,
        );
        let vals = sampler.conditional_values(&Instance::new(vec![10.0, 3.0, 0.0]), 0);
        let mut sorted: Vec<f64> = vals.to_vec();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(sorted, vec![30.0, 40.0]);
    }

    #[test]
    fn relaxed_lookups_are_cached_and_stable() {
        let rows = vec![
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![2.0, 1.0],
            vec![3.0, 1.0],
        ];
        let sampler = make_sampler(
            vec![
                ordinal_feature("x0", vec![0.0, 1.0, 2.0, 3.0]),
                categorical_feature("x1", 3),
            ],
            rows,
        );
        let inst = Instance::new(vec![0.0, 2.0]);
        let first = sampler.conditional_values(&inst, 0);
        let second = sampler.conditional_values(&inst, 0);
        assert!(Arc::ptr_eq(&first, &second));
    }

    #[test]
    fn gibbs_singleton_feature_stays_in_conditional_set() {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![(i % 4) as f64, (i % 4) as f64])
            .collect();
        let sampler = make_sampler(
            vec![
                ordinal_feature("x0", vec![0.0, 1.0, 2.0, 3.0]),
                ordinal_feature("x1", vec![0.0, 1.0, 2.0, 3.0]),
            ],
            rows,
        );
        let inst = Instance::new(vec![1.0, 1.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let out = sampler.gibbs_perturb(&inst, &[0], 5, &mut rng).unwrap();
            // conditional on x1 = 1, the only consistent value is 1
            assert_eq!(out.values[0], 1.0);
            assert_eq!(out.values[1], 1.0);
        }
    }

    #[test]
    fn gibbs_joint_perturbation_respects_dependency() {
        // x1 = 2 * x0 deterministically; x2 varies freely.
        let mut rows = Vec::new();
        for a in 0..5 {
            for c in 0..4 {
                rows.push(vec![a as f64, 2.0 * a as f64, c as f64]);
            }
        }
        let sampler = make_sampler(
            vec![
                ordinal_feature("x0", (0..5).map(|v| v as f64).collect()),
                ordinal_feature("x1", (0..5).map(|v| 2.0 * v as f64).collect()),
                ordinal_feature("x2", (0..4).map(|v| v as f64).collect()),
            ],
            rows,
        );
        let inst = Instance::new(vec![0.0, 0.0, 3.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut consistent = 0;
        let n = 1000;
        for _ in 0..n {
            let out = sampler.gibbs_perturb(&inst, &[0, 1], 5, &mut rng).unwrap();
            if out.values[1] == 2.0 * out.values[0] {
                consistent += 1;
            }
            assert_eq!(out.values[2], 3.0, "outside feature touched");
        }
        assert!(
            consistent as f64 >= 0.95 * n as f64,
            "only {consistent}/{n} consistent"
        );
    }

    #[test]
    fn nearest_value_numeric() {
        let rows = vec![vec![10.0, 0.0], vec![20.0, 0.0], vec![50.0, 1.0]];
        let sampler = make_sampler(
            vec![
                ordinal_feature("x0", vec![10.0, 20.0, 50.0]),
                ordinal_feature("x1", vec![0.0, 1.0]),
            ],
            rows,
        );
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        // Context x1=0 -> candidates {10, 20}.
        let inst = Instance::new(vec![10.0, 0.0]);
        assert_eq!(
            sampler.nearest_conditional_value(&inst, 0, 12.0, &mut rng),
            10.0
        );
        assert_eq!(
            sampler.nearest_conditional_value(&inst, 0, 20.0, &mut rng),
            20.0
        );
        assert_eq!(
            sampler.nearest_conditional_value(&inst, 0, 16.0, &mut rng),
            20.0
        );
        // Exact tie (15) prefers the smaller value.
        assert_eq!(
            sampler.nearest_conditional_value(&inst, 0, 15.0, &mut rng),
            10.0
        );
    }

    #[test]
    fn nearest_value_categorical_fallback_is_uniform() {
        // Context x1=0 -> candidates {l0, l1, l2} with skewed multiplicity;
        // target l3 is absent, fallback draws uniformly over the distinct set.
        let mut rows = vec![vec![0.0, 0.0]; 6];
        rows.push(vec![1.0, 0.0]);
        rows.push(vec![2.0, 0.0]);
        rows.push(vec![3.0, 1.0]);
        let sampler = make_sampler(
            vec![
                categorical_feature("x0", 4),
                ordinal_feature("x1", vec![0.0, 1.0]),
            ],
            rows,
        );
        let inst = Instance::new(vec![0.0, 0.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut counts = [0u32; 4];
        let n = 3000;
        for _ in 0..n {
            let v = sampler.nearest_conditional_value(&inst, 0, 3.0, &mut rng);
            counts[v as usize] += 1;
        }
        assert_eq!(counts[3], 0);
        for c in &counts[..3] {
            let expect = n as f64 / 3.0;
            let sigma = (n as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
            assert!((*c as f64 - expect).abs() < 4.0 * sigma, "counts {counts:?}");
        }
        // Exact match short-circuits.
        assert_eq!(
            sampler.nearest_conditional_value(&inst, 0, 1.0, &mut rng),
            1.0
        );
    }

    #[test]
    fn domain_closure_over_perturbations() {
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|i| vec![(i % 7) as f64, (i % 3) as f64, (i as f64) * 1.5])
            .collect();
        let mut ds = Dataset {
            schema: vec![
                ordinal_feature("a", (0..7).map(|v| v as f64).collect()),
                categorical_feature("b", 3),
                FeatureSchema {
                    name: "c".into(),
                    domain: FeatureDomain::Continuous {
                        min: 0.0,
                        max: 73.5,
                        bin_edges: vec![],
                    },
                    mutable: true,
                },
            ],
            rows,
            labels: (0..50).map(|i| i % 2).collect(),
            label_names: vec!["0".into(), "1".into()],
        };
        let sampler = Sampler::fit(&mut ds, 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let base = Instance::new(vec![0.0, 0.0, 1.5]);
        for k in 0..3000 {
            let f = k % 3;
            let out = sampler.permute_feature(&base, f, &mut rng).unwrap();
            assert!(sampler.domain().contains(f, out.values[f]));
            let out = sampler.gibbs_perturb(&base, &[0, 2], 2, &mut rng).unwrap();
            assert!(sampler.domain().contains(0, out.values[0]));
            assert!(sampler.domain().contains(2, out.values[2]));
            assert_eq!(out.values[1], 0.0);
        }
    }

    #[test]
    fn kind_accessors() {
        let f = categorical_feature("x", 2);
        assert_eq!(f.kind(), FeatureKind::Categorical);
    }
}

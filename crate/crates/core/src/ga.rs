//! The permutation-based genetic attack.
//!
//! Each generation evaluates the whole population in one batched model call,
//! carries the fittest member unchanged (the elite), returns it as the
//! counterfactual as soon as its hard class equals the target, and fills the
//! remaining slots by softmax selection over a mating pool, feature-swap
//! crossover, and importance-weighted mutation. When the best target-class
//! probability stalls, both distance penalties are multiplied by a decay
//! factor, trading sparsity for reachability.
//!
//! Randomness is pre-split per (generation, slot), so offspring can be built
//! on parallel workers without changing any result.

use std::collections::BTreeSet;

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelHandle, ProbabilityVector};
use crate::par;
use crate::sampler::Sampler;
use crate::seeding::derive_rng;
use crate::tabular::{Dataset, FeatureKind, FeatureSchema, Instance};

/// All hyperparameters of the attack plus constraint budgets.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AttackConfig {
    /// Penalty weight on the number of changed features.
    pub rho0: f64,
    /// Penalty weight on the normalized l2 distance.
    pub rho1: f64,
    /// Multiplier applied to both penalties when progress stalls.
    pub decay: f64,
    pub population_size: usize,
    pub mating_pool_size: usize,
    pub generations: usize,
    /// Softmax temperature for parent selection.
    pub temperature: f64,
    /// Report-only budget on changed-feature count.
    pub delta0_max: Option<usize>,
    /// Report-only budget on normalized l2 distance.
    pub delta2_max: Option<f64>,
    /// When set, only these features (intersected with the schema's own
    /// mutable flags) may change.
    pub mutable_features: Option<BTreeSet<String>>,
    /// Conditional (Gibbs) sampling for multi-feature perturbations.
    pub gibbs: bool,
    pub gibbs_iters: usize,
    /// Quantile bins defining the conditioning contexts.
    pub n_bins: usize,
    /// Per-feature probability used to draw how many features mutate.
    pub mutation_probability: f64,
    /// Accepted for config fidelity; a permutation draw has no magnitude to
    /// scale, so this knob has no effect.
    pub mutation_range: f64,
    pub seed: u64,
}

impl Default for AttackConfig {
    fn default() -> Self {
        AttackConfig {
            rho0: 0.6,
            rho1: 0.2,
            decay: 0.96,
            population_size: 35,
            mating_pool_size: 15,
            generations: 100,
            temperature: 0.5,
            delta0_max: None,
            delta2_max: None,
            mutable_features: None,
            gibbs: false,
            gibbs_iters: 5,
            n_bins: 5,
            mutation_probability: 0.1,
            mutation_range: 1.0,
            seed: 0,
        }
    }
}

impl AttackConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mating_pool_size < 2 || self.mating_pool_size > self.population_size {
            return Err(Error::InvalidConfig(format!(
                "mating_pool_size must lie in [2, population_size={}], got {}",
                self.population_size, self.mating_pool_size
            )));
        }
        if !(self.temperature > 0.0) {
            return Err(Error::InvalidConfig("temperature must be positive".into()));
        }
        if !(self.decay > 0.0 && self.decay < 1.0) {
            return Err(Error::InvalidConfig("decay must lie in (0, 1)".into()));
        }
        if self.rho0 < 0.0 || self.rho1 < 0.0 {
            return Err(Error::InvalidConfig("penalties must be >= 0".into()));
        }
        if self.generations == 0 {
            return Err(Error::InvalidConfig("generations must be >= 1".into()));
        }
        if !(self.mutation_probability > 0.0 && self.mutation_probability <= 1.0) {
            return Err(Error::InvalidConfig(
                "mutation_probability must lie in (0, 1]".into(),
            ));
        }
        if self.gibbs_iters == 0 || self.n_bins < 2 {
            return Err(Error::InvalidConfig(
                "gibbs_iters must be >= 1 and n_bins >= 2".into(),
            ));
        }
        Ok(())
    }
}

/// Normalizes mixed-type distances: numeric differences are standardized by
/// the training column's standard deviation, a changed categorical feature
/// contributes one unit.
#[derive(Debug, Clone)]
pub struct DistanceNorm {
    kinds: Vec<FeatureKind>,
    stds: Vec<f64>,
}

impl DistanceNorm {
    pub fn fit(dataset: &Dataset) -> Self {
        let m = dataset.n_features();
        let d = dataset.n_rows() as f64;
        let mut stds = vec![0.0; m];
        for j in 0..m {
            let mean: f64 = dataset.rows.iter().map(|r| r[j]).sum::<f64>() / d;
            let var: f64 = dataset.rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / d;
            stds[j] = var.sqrt();
        }
        DistanceNorm {
            kinds: dataset.schema.iter().map(|f| f.kind()).collect(),
            stds,
        }
    }

    pub fn l0(a: &Instance, b: &Instance) -> usize {
        a.values
            .iter()
            .zip(&b.values)
            .filter(|(x, y)| x != y)
            .count()
    }

    pub fn l2(&self, a: &Instance, b: &Instance) -> f64 {
        a.values
            .iter()
            .zip(&b.values)
            .enumerate()
            .map(|(j, (x, y))| {
                if x == y {
                    return 0.0;
                }
                match self.kinds[j] {
                    FeatureKind::Categorical => 1.0,
                    _ => {
                        if self.stds[j] > 0.0 {
                            ((x - y) / self.stds[j]).powi(2)
                        } else {
                            1.0
                        }
                    }
                }
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// The scalar objective: target-class probability shift minus the weighted
/// l0 and l2 penalties. The shift enters signed: movement away from the
/// target class scores negative, otherwise the search stalls chasing
/// equally-large shifts in the wrong direction.
pub fn fitness_value(delta_target_prob: f64, l0: usize, l2: f64, rho0: f64, rho1: f64) -> f64 {
    delta_target_prob - rho0 * l0 as f64 - rho1 * l2
}

/// Single-instance convenience around [`fitness_value`]; the attack loop
/// itself batches all evaluations of a generation into one model call.
pub fn compute_fitness(
    x: &Instance,
    x_orig: &Instance,
    target: usize,
    rho0: f64,
    rho1: f64,
    model: &ModelHandle,
    schema: &[FeatureSchema],
    norm: &DistanceNorm,
) -> Result<f64> {
    let probs = model.predict_proba(std::slice::from_ref(x), schema)?;
    let probs_orig = model.predict_proba(std::slice::from_ref(x_orig), schema)?;
    let delta = probs[0].probs[target] - probs_orig[0].probs[target];
    Ok(fitness_value(
        delta,
        DistanceNorm::l0(x, x_orig),
        norm.l2(x, x_orig),
        rho0,
        rho1,
    ))
}

/// Softmax of `fitnesses / temperature`, max-subtracted for overflow safety.
pub fn selection_probabilities(fitnesses: &[f64], temperature: f64) -> Vec<f64> {
    let max = fitnesses.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = fitnesses
        .iter()
        .map(|f| ((f - max) / temperature).exp())
        .collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// `k` independent parent pairs, each member sampled with replacement with
/// probability `softmax(fitness / temperature)`.
pub fn select_parents(
    fitnesses: &[f64],
    temperature: f64,
    k: usize,
    rng: &mut impl Rng,
) -> Vec<(usize, usize)> {
    let probs = selection_probabilities(fitnesses, temperature);
    let dist = WeightedIndex::new(&probs).expect("softmax weights are positive");
    (0..k)
        .map(|_| (rng.sample(&dist), rng.sample(&dist)))
        .collect()
}

/// Uniform feature-swap crossover. With `gibbs` on, every donated value (a
/// feature where the parents disagree) is snapped to the nearest value found
/// in the child's conditional set, keeping the mix in-distribution.
pub fn crossover(
    parent1: &Instance,
    parent2: &Instance,
    gibbs: bool,
    sampler: &Sampler,
    rng: &mut impl Rng,
) -> Instance {
    let mut child = parent1.clone();
    let mut donated = Vec::new();
    for i in 0..child.values.len() {
        if rng.random_bool(0.5) {
            child.values[i] = parent2.values[i];
        }
        if parent1.values[i] != parent2.values[i] {
            donated.push(i);
        }
    }
    if gibbs {
        for i in donated {
            let target = child.values[i];
            child.values[i] = sampler.nearest_conditional_value(&child, i, target, rng);
        }
    }
    child
}

/// Softmax over per-feature importance, restricted to mutable features
/// (immutable ones get zero weight).
pub fn mutation_weights(importance: &[f64], mutable: &[bool]) -> Vec<f64> {
    let max = importance
        .iter()
        .zip(mutable)
        .filter(|(_, m)| **m)
        .map(|(e, _)| *e)
        .fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = importance
        .iter()
        .zip(mutable)
        .map(|(e, m)| if *m { (e - max).exp() } else { 0.0 })
        .collect();
    let sum: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / sum).collect()
}

/// Draws how many features to mutate (Binomial over the mutable count,
/// clamped to at least one), picks that many distinct features weighted by
/// `softmax(importance)`, and perturbs them jointly (Gibbs) or independently.
pub fn mutate(
    child: &Instance,
    importance: &[f64],
    config: &AttackConfig,
    sampler: &Sampler,
    rng: &mut impl Rng,
) -> Result<Instance> {
    let mutable: Vec<bool> = sampler.schema().iter().map(|f| f.mutable).collect();
    let m_mutable = mutable.iter().filter(|m| **m).count();
    if m_mutable == 0 {
        return Err(Error::Domain("no mutable features".into()));
    }
    let binomial = Binomial::new(m_mutable as u64, config.mutation_probability)
        .map_err(|e| Error::InvalidConfig(format!("bad mutation probability: {e}")))?;
    let n_mut = (binomial.sample(rng) as usize).clamp(1, m_mutable);

    let mut weights = mutation_weights(importance, &mutable);
    let mut picked = Vec::with_capacity(n_mut);
    for _ in 0..n_mut {
        let dist = WeightedIndex::new(&weights).expect("at least one positive weight");
        let f = rng.sample(&dist);
        weights[f] = 0.0;
        picked.push(f);
    }
    picked.sort_unstable();

    if config.gibbs {
        sampler.gibbs_perturb(child, &picked, config.gibbs_iters, rng)
    } else {
        let mut out = child.clone();
        for f in picked {
            out = sampler.permute_feature(&out, f, rng)?;
        }
        Ok(out)
    }
}

/// Multiplies both penalties by `decay` when the best target-class
/// probability failed to improve this generation.
pub fn update_parameters(rho0: f64, rho1: f64, progress: bool, decay: f64) -> (f64, f64) {
    if progress {
        (rho0, rho1)
    } else {
        (rho0 * decay, rho1 * decay)
    }
}

/// One population member.
#[derive(Debug, Clone)]
pub struct Candidate {
    pub instance: Instance,
    pub fitness: f64,
    pub probs: ProbabilityVector,
    pub changed_mask: Vec<bool>,
    /// Signed shift of the target-class probability vs. the original.
    pub delta_target_prob: f64,
    pub l0: usize,
    pub l2: f64,
}

/// Per-generation snapshot: enough to audit elite carry-over and penalty
/// relaxation after the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub generation: usize,
    pub best_fitness: f64,
    pub best_target_prob: f64,
    pub rho0: f64,
    pub rho1: f64,
    pub elite_delta_prob: f64,
    pub elite_l0: usize,
    pub elite_l2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangedFeature {
    pub index: usize,
    pub old: f64,
    pub new: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackResult {
    pub success: bool,
    pub counterfactual: Option<Instance>,
    pub generations_used: usize,
    pub changed_features: Vec<ChangedFeature>,
    pub trace: Vec<TraceEntry>,
    pub original_probs: ProbabilityVector,
    pub final_probs: ProbabilityVector,
    pub target_class: usize,
    pub original_class: usize,
    pub l2_distance: f64,
    /// Whether the counterfactual met the configured budgets; `None` when no
    /// budget was set. Budgets steer reporting only, never the search — the
    /// penalties and their relaxation are the enforcement mechanism.
    pub within_budgets: Option<bool>,
}

/// Immutable per-dataset state shared across attacks: the fitted sampler
/// (with the effective mutability mask applied) and distance normalizer.
pub struct AttackContext {
    pub sampler: Sampler,
    pub norm: DistanceNorm,
    pub schema: Vec<FeatureSchema>,
}

impl AttackContext {
    pub fn new(train: &Dataset, config: &AttackConfig) -> Result<Self> {
        config.validate()?;
        let mut dataset = train.clone();
        if let Some(allowed) = &config.mutable_features {
            for name in allowed {
                if dataset.feature_index(name).is_none() {
                    return Err(Error::InvalidConfig(format!(
                        "mutable_features names unknown feature '{name}'"
                    )));
                }
            }
            for feat in &mut dataset.schema {
                feat.mutable = feat.mutable && allowed.contains(&feat.name);
            }
        }
        if !dataset.schema.iter().any(|f| f.mutable) {
            return Err(Error::Domain("no mutable features".into()));
        }
        let norm = DistanceNorm::fit(&dataset);
        let sampler = Sampler::fit(&mut dataset, config.n_bins)?;
        Ok(AttackContext {
            schema: sampler.schema().to_vec(),
            sampler,
            norm,
        })
    }
}

/// Runs the full attack against one instance. Builds the context from the
/// training data; use [`attack_with_context`] to amortize that across a
/// batch.
pub fn attack(
    x_orig: &Instance,
    target_class: usize,
    model: &ModelHandle,
    train: &Dataset,
    config: &AttackConfig,
) -> Result<AttackResult> {
    let ctx = AttackContext::new(train, config)?;
    attack_with_context(x_orig, target_class, model, &ctx, config)
}

pub fn attack_with_context(
    x_orig: &Instance,
    target_class: usize,
    model: &ModelHandle,
    ctx: &AttackContext,
    config: &AttackConfig,
) -> Result<AttackResult> {
    config.validate()?;
    x_orig.validate(&ctx.schema)?;
    if target_class >= model.n_classes() {
        return Err(Error::InvalidConfig(format!(
            "target class {target_class} out of range for {} classes",
            model.n_classes()
        )));
    }

    let probs_orig = model
        .predict_proba(std::slice::from_ref(x_orig), &ctx.schema)?
        .pop()
        .unwrap();
    let original_class = probs_orig.argmax();
    let p_orig_target = probs_orig.probs[target_class];

    // Degenerate case: the instance already carries the target label.
    if original_class == target_class {
        return Ok(AttackResult {
            success: true,
            counterfactual: Some(x_orig.clone()),
            generations_used: 0,
            changed_features: Vec::new(),
            trace: Vec::new(),
            original_probs: probs_orig.clone(),
            final_probs: probs_orig,
            target_class,
            original_class,
            l2_distance: 0.0,
            within_budgets: budget_check(config, 0, 0.0),
        });
    }

    let mutable_idx: Vec<usize> = ctx
        .schema
        .iter()
        .enumerate()
        .filter(|(_, f)| f.mutable)
        .map(|(i, _)| i)
        .collect();

    let d = config.population_size;
    let seed = config.seed;

    // Generation zero: single-feature permutations of the original.
    let mut population: Vec<Instance> = par::map_range(d, |slot| {
        let mut rng = derive_rng(seed, &[1, slot as u64]);
        let f = mutable_idx[rng.random_range(0..mutable_idx.len())];
        let perturbed = if config.gibbs {
            ctx.sampler
                .gibbs_perturb(x_orig, &[f], config.gibbs_iters, &mut rng)
        } else {
            ctx.sampler.permute_feature(x_orig, f, &mut rng)
        };
        perturbed.expect("generation-0 features come from the mutable set")
    });

    let m = ctx.schema.len();
    let mut rho0 = config.rho0;
    let mut rho1 = config.rho1;
    let mut importance = vec![0.0; m];
    let mut best_pt_so_far = f64::NEG_INFINITY;
    let mut trace: Vec<TraceEntry> = Vec::with_capacity(config.generations);

    for g in 0..config.generations {
        let all_probs = model.predict_proba(&population, &ctx.schema)?;
        let candidates: Vec<Candidate> = population
            .iter()
            .zip(all_probs)
            .map(|(inst, probs)| {
                let delta = probs.probs[target_class] - p_orig_target;
                let l0 = DistanceNorm::l0(inst, x_orig);
                let l2 = ctx.norm.l2(inst, x_orig);
                Candidate {
                    changed_mask: inst
                        .values
                        .iter()
                        .zip(&x_orig.values)
                        .map(|(a, b)| a != b)
                        .collect(),
                    fitness: fitness_value(delta, l0, l2, rho0, rho1),
                    delta_target_prob: delta,
                    l0,
                    l2,
                    instance: inst.clone(),
                    probs,
                }
            })
            .collect();

        // Elite: highest fitness, ties to the sparser then closer candidate.
        let elite_idx = (0..candidates.len())
            .min_by(|&a, &b| {
                let ca = &candidates[a];
                let cb = &candidates[b];
                cb.fitness
                    .partial_cmp(&ca.fitness)
                    .unwrap()
                    .then(ca.l0.cmp(&cb.l0))
                    .then(ca.l2.partial_cmp(&cb.l2).unwrap())
            })
            .unwrap();
        let elite = &candidates[elite_idx];

        let best_pt = candidates
            .iter()
            .map(|c| c.probs.probs[target_class])
            .fold(f64::NEG_INFINITY, f64::max);

        trace.push(TraceEntry {
            generation: g,
            best_fitness: elite.fitness,
            best_target_prob: best_pt,
            rho0,
            rho1,
            elite_delta_prob: elite.delta_target_prob,
            elite_l0: elite.l0,
            elite_l2: elite.l2,
        });

        if elite.probs.argmax() == target_class {
            let changed = changed_features(&elite.instance, x_orig);
            return Ok(AttackResult {
                success: true,
                counterfactual: Some(elite.instance.clone()),
                generations_used: trace.len(),
                changed_features: changed,
                original_probs: probs_orig,
                final_probs: elite.probs.clone(),
                target_class,
                original_class,
                l2_distance: elite.l2,
                within_budgets: budget_check(config, elite.l0, elite.l2),
                trace,
            });
        }

        let progress = best_pt > best_pt_so_far + 1e-9;
        best_pt_so_far = best_pt_so_far.max(best_pt);

        // Mating pool: the top members by fitness (same tie-break as elite).
        let mut order: Vec<usize> = (0..candidates.len()).collect();
        order.sort_by(|&a, &b| {
            let ca = &candidates[a];
            let cb = &candidates[b];
            cb.fitness
                .partial_cmp(&ca.fitness)
                .unwrap()
                .then(ca.l0.cmp(&cb.l0))
                .then(ca.l2.partial_cmp(&cb.l2).unwrap())
                .then(a.cmp(&b))
        });
        let pool: Vec<usize> = order[..config.mating_pool_size.min(order.len())].to_vec();
        let pool_probs = selection_probabilities(
            &pool.iter().map(|&i| candidates[i].fitness).collect::<Vec<_>>(),
            config.temperature,
        );
        let pool_dist = WeightedIndex::new(&pool_probs).expect("softmax weights are positive");

        let offspring: Vec<Instance> = par::map_range(d - 1, |slot| {
            let mut rng = derive_rng(seed, &[2, g as u64 + 1, slot as u64 + 1]);
            let p1 = &candidates[pool[rng.sample(&pool_dist)]].instance;
            let p2 = &candidates[pool[rng.sample(&pool_dist)]].instance;
            let child = crossover(p1, p2, config.gibbs, &ctx.sampler, &mut rng);
            mutate(&child, &importance, config, &ctx.sampler, &mut rng)
                .expect("mutation over a non-empty mutable set")
        });

        // Importance for the next generation's mutation: mean |delta p_t|
        // over members where each feature changed.
        let mut sums = vec![0.0; m];
        let mut counts = vec![0u32; m];
        for c in &candidates {
            for (j, changed) in c.changed_mask.iter().enumerate() {
                if *changed {
                    sums[j] += c.delta_target_prob.abs();
                    counts[j] += 1;
                }
            }
        }
        for j in 0..m {
            importance[j] = if counts[j] > 0 {
                sums[j] / counts[j] as f64
            } else {
                0.0
            };
        }

        let (r0, r1) = update_parameters(rho0, rho1, progress, config.decay);
        rho0 = r0;
        rho1 = r1;

        let mut next = Vec::with_capacity(d);
        next.push(elite.instance.clone());
        next.extend(offspring);
        population = next;
    }

    // Out of generations: report the best trace without a counterfactual.
    let final_probs = model
        .predict_proba(std::slice::from_ref(&population[0]), &ctx.schema)?
        .pop()
        .unwrap();
    Ok(AttackResult {
        success: false,
        counterfactual: None,
        generations_used: trace.len(),
        changed_features: Vec::new(),
        trace,
        original_probs: probs_orig,
        final_probs,
        target_class,
        original_class,
        l2_distance: 0.0,
        within_budgets: None,
    })
}

fn budget_check(config: &AttackConfig, l0: usize, l2: f64) -> Option<bool> {
    if config.delta0_max.is_none() && config.delta2_max.is_none() {
        return None;
    }
    let ok0 = config.delta0_max.map_or(true, |b| l0 <= b);
    let ok2 = config.delta2_max.map_or(true, |b| l2 <= b);
    Some(ok0 && ok2)
}

fn changed_features(x: &Instance, x_orig: &Instance) -> Vec<ChangedFeature> {
    x_orig
        .values
        .iter()
        .zip(&x.values)
        .enumerate()
        .filter(|(_, (old, new))| old != new)
        .map(|(index, (old, new))| ChangedFeature {
            index,
            old: *old,
            new: *new,
        })
        .collect()
}

/// One changed feature rendered with raw level strings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChangedFeatureReport {
    pub name: String,
    pub old: String,
    pub new: String,
}

/// Serializable form of a result: changed features by name with raw level
/// strings, the per-generation trace, final probabilities, the config echo,
/// and the seed that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackReport {
    pub success: bool,
    pub original_class: String,
    pub target_class: String,
    pub generations_used: usize,
    pub changed_features: Vec<ChangedFeatureReport>,
    pub counterfactual: Option<Vec<String>>,
    pub original_probs: Vec<f64>,
    pub final_probs: Vec<f64>,
    pub l2_distance: f64,
    pub within_budgets: Option<bool>,
    pub trace: Vec<TraceEntry>,
    pub config: AttackConfig,
    pub seed: u64,
}

impl AttackReport {
    pub fn new(
        result: &AttackResult,
        schema: &[FeatureSchema],
        label_names: &[String],
        config: &AttackConfig,
    ) -> Self {
        let class_name = |c: usize| {
            label_names
                .get(c)
                .cloned()
                .unwrap_or_else(|| c.to_string())
        };
        AttackReport {
            success: result.success,
            original_class: class_name(result.original_class),
            target_class: class_name(result.target_class),
            generations_used: result.generations_used,
            changed_features: result
                .changed_features
                .iter()
                .map(|c| ChangedFeatureReport {
                    name: schema[c.index].name.clone(),
                    old: schema[c.index].display_value(c.old),
                    new: schema[c.index].display_value(c.new),
                })
                .collect(),
            counterfactual: result.counterfactual.as_ref().map(|inst| {
                inst.values
                    .iter()
                    .zip(schema)
                    .map(|(v, f)| f.display_value(*v))
                    .collect()
            }),
            original_probs: result.original_probs.probs.clone(),
            final_probs: result.final_probs.probs.clone(),
            l2_distance: result.l2_distance,
            within_budgets: result.within_budgets,
            trace: result.trace.clone(),
            config: config.clone(),
            seed: config.seed,
        }
    }
}

/// Renders changed features with raw level strings for reports.
pub fn describe_changes(changes: &[ChangedFeature], schema: &[FeatureSchema]) -> Vec<String> {
    changes
        .iter()
        .map(|c| {
            let feat = &schema[c.index];
            format!(
                "{}: {} -> {}",
                feat.name,
                feat.display_value(c.old),
                feat.display_value(c.new)
            )
        })
        .collect()
}

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use permute_attack::analysis::{
    cooccurrence, histogram_csv, realism_discriminator, restricted_attack, run_batch,
    summarize, BatchFailure, BatchSummary, DirectionStats, RealismReport,
};
use permute_attack::ga::{
    attack_with_context, AttackConfig, AttackContext, AttackReport, AttackResult,
};
use permute_attack::model::{
    load_forest, save_forest, train_forest, ExternalModel, ForestHyper, ModelHandle,
};
use permute_attack::par::Workers;
use permute_attack::scorecard::{pd_to_score, score_report, ScoreReport};
use permute_attack::tabular::{
    load_csv, onehot_width, save_schema, Dataset, FeatureDomain, FeatureSchema, Instance,
    LoadOptions,
};

use crate::config::{Backend, RunConfig};
use crate::{CliError, CliResult};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

const MODEL_FILE: &str = "model.json";
const SCHEMA_FILE: &str = "schema.json";
const RESULTS_FILE: &str = "results.json";

pub struct Session {
    pub config: RunConfig,
    pub out_dir: PathBuf,
    pub workers: Workers,
}

impl Session {
    pub fn new(config: RunConfig, out_override: Option<PathBuf>, workers: Option<usize>) -> Self {
        let out_dir = out_override.unwrap_or_else(|| config.output.dir.clone());
        let workers = Workers::from_count(workers.unwrap_or(config.output.workers));
        Session {
            config,
            out_dir,
            workers,
        }
    }

    fn load_options(&self) -> LoadOptions {
        LoadOptions {
            delimiter: self.config.data.delimiter.as_bytes()[0],
            ordinal_threshold: self.config.data.ordinal_threshold,
            kind_overrides: self.config.data.kind_overrides.clone(),
        }
    }

    pub fn dataset(&self) -> CliResult<Dataset> {
        Ok(load_csv(
            &self.config.data.csv,
            &self.config.data.target_column,
            &self.load_options(),
        )?)
    }

    pub fn split(&self, dataset: &Dataset) -> (Dataset, Dataset) {
        dataset.train_test_split(self.config.data.split_fraction, self.config.data.split_seed)
    }

    fn model_path(&self) -> PathBuf {
        self.out_dir.join(MODEL_FILE)
    }

    /// Opens the configured backend for prediction.
    pub fn model_handle(&self, schema: &[FeatureSchema]) -> CliResult<ModelHandle> {
        match self.config.model.backend {
            Backend::Builtin => {
                let path = self.model_path();
                if !path.exists() {
                    return Err(CliError::Usage(format!(
                        "no trained model at {}; run `train` first",
                        path.display()
                    )));
                }
                let forest = load_forest(&path)?;
                if forest.feature_width != onehot_width(schema) {
                    return Err(CliError::Usage(format!(
                        "model expects {} one-hot features but the schema expands to {}",
                        forest.feature_width,
                        onehot_width(schema)
                    )));
                }
                Ok(ModelHandle::from_forest(forest))
            }
            Backend::External => {
                let timeout = std::time::Duration::from_secs(self.config.model.timeout_secs);
                let external = ExternalModel::spawn(&self.config.model.command, timeout)?;
                let expected = match external.info.encoding {
                    permute_attack::model::Encoding::Onehot => onehot_width(schema),
                    permute_attack::model::Encoding::Ordinal => schema.len(),
                };
                if external.info.n_features != expected {
                    return Err(CliError::Usage(format!(
                        "external model reports {} features, schema provides {expected}",
                        external.info.n_features
                    )));
                }
                Ok(ModelHandle::from_external(external))
            }
        }
    }

    fn ensure_out_dir(&self) -> CliResult<()> {
        std::fs::create_dir_all(&self.out_dir)
            .map_err(|e| CliError::Usage(format!("cannot create output dir: {e}")))
    }

    fn write_json<T: Serialize>(&self, name: &str, value: &T) -> CliResult<PathBuf> {
        self.ensure_out_dir()?;
        let path = self.out_dir.join(name);
        let json = serde_json::to_string_pretty(value)
            .map_err(|e| CliError::Usage(format!("serialization failed: {e}")))?;
        std::fs::write(&path, json).map_err(|e| CliError::Usage(format!("write failed: {e}")))?;
        Ok(path)
    }

    fn write_text(&self, name: &str, text: &str) -> CliResult<PathBuf> {
        self.ensure_out_dir()?;
        let path = self.out_dir.join(name);
        std::fs::write(&path, text).map_err(|e| CliError::Usage(format!("write failed: {e}")))?;
        Ok(path)
    }
}

fn accuracy(handle: &ModelHandle, data: &Dataset) -> CliResult<f64> {
    let batch: Vec<Instance> = (0..data.n_rows()).map(|i| data.instance(i)).collect();
    let probs = handle.predict_proba(&batch, &data.schema)?;
    let correct = probs
        .iter()
        .zip(&data.labels)
        .filter(|(p, &l)| p.argmax() == l)
        .count();
    Ok(correct as f64 / data.n_rows() as f64)
}

#[derive(Serialize)]
struct TrainSummary<'a> {
    version: &'a str,
    config: &'a RunConfig,
    train_accuracy: f64,
    test_accuracy: f64,
    model_file: PathBuf,
    schema_file: PathBuf,
}

pub fn cmd_train(session: &Session) -> CliResult<()> {
    if session.config.model.backend != Backend::Builtin {
        return Err(CliError::Usage(
            "train applies to the builtin backend; external models are trained elsewhere".into(),
        ));
    }
    let dataset = session.dataset()?;
    let (mut train, test) = session.split(&dataset);

    let forest = train_forest(
        &train,
        session.config.model.n_trees,
        session.config.model.max_depth,
        session.config.model.min_leaf,
        session.config.model.seed,
    )?;
    let handle = ModelHandle::from_forest(forest.clone());
    let train_accuracy = accuracy(&handle, &train)?;
    let test_accuracy = accuracy(&handle, &test)?;

    // Persist the discretization alongside the schema contract.
    train.discretize(session.config.attack.n_bins)?;
    session.ensure_out_dir()?;
    let model_file = session.out_dir.join(MODEL_FILE);
    save_forest(&forest, &model_file)?;
    let schema_file = session.out_dir.join(SCHEMA_FILE);
    save_schema(&train.schema, &schema_file)?;
    session.write_json(
        "train_summary.json",
        &TrainSummary {
            version: VERSION,
            config: &session.config,
            train_accuracy,
            test_accuracy,
            model_file: model_file.clone(),
            schema_file: schema_file.clone(),
        },
    )?;

    println!("trained {} trees on {} rows", forest.trees.len(), train.n_rows());
    println!("train accuracy: {train_accuracy:.3}");
    println!("test accuracy:  {test_accuracy:.3}");
    println!("model:  {}", model_file.display());
    println!("schema: {}", schema_file.display());
    Ok(())
}

/// Resolves --exclude / --allow-only into the attack's mutable-feature set.
pub fn resolve_mutability(
    schema: &[FeatureSchema],
    exclude: &[String],
    allow_only: &[String],
) -> CliResult<Option<BTreeSet<String>>> {
    if !exclude.is_empty() && !allow_only.is_empty() {
        return Err(CliError::Usage(
            "--exclude and --allow-only are mutually exclusive".into(),
        ));
    }
    let known: BTreeSet<&str> = schema.iter().map(|f| f.name.as_str()).collect();
    for name in exclude.iter().chain(allow_only) {
        if !known.contains(name.as_str()) {
            return Err(CliError::Usage(format!("unknown feature '{name}'")));
        }
    }
    if !allow_only.is_empty() {
        return Ok(Some(allow_only.iter().cloned().collect()));
    }
    if !exclude.is_empty() {
        let excluded: BTreeSet<&String> = exclude.iter().collect();
        return Ok(Some(
            schema
                .iter()
                .map(|f| f.name.clone())
                .filter(|n| !excluded.contains(n))
                .collect(),
        ));
    }
    Ok(None)
}

pub fn parse_target(target: &Option<String>, labels: &[String]) -> CliResult<Option<usize>> {
    let Some(raw) = target else {
        return Ok(None);
    };
    if let Some(idx) = labels.iter().position(|l| l == raw) {
        return Ok(Some(idx));
    }
    if let Ok(idx) = raw.parse::<usize>() {
        if idx < labels.len() {
            return Ok(Some(idx));
        }
    }
    Err(CliError::Usage(format!(
        "target '{raw}' is neither a class label ({labels:?}) nor a class index"
    )))
}

fn parse_inline_instance(json: &str, schema: &[FeatureSchema]) -> CliResult<Instance> {
    let map: serde_json::Map<String, serde_json::Value> = serde_json::from_str(json)
        .map_err(|e| CliError::Usage(format!("bad inline instance: {e}")))?;
    let mut values = Vec::with_capacity(schema.len());
    for feat in schema {
        let value = map
            .get(&feat.name)
            .ok_or_else(|| CliError::Usage(format!("inline instance misses '{}'", feat.name)))?;
        let v = match (&feat.domain, value) {
            (FeatureDomain::Categorical { levels }, serde_json::Value::String(s)) => levels
                .iter()
                .position(|l| l == s)
                .ok_or_else(|| {
                    CliError::Usage(format!("'{s}' is not a level of '{}'", feat.name))
                })? as f64,
            (FeatureDomain::Categorical { .. }, other) => {
                return Err(CliError::Usage(format!(
                    "feature '{}' expects a level string, got {other}",
                    feat.name
                )))
            }
            (_, serde_json::Value::Number(n)) => n.as_f64().unwrap(),
            (_, other) => {
                return Err(CliError::Usage(format!(
                    "feature '{}' expects a number, got {other}",
                    feat.name
                )))
            }
        };
        values.push(v);
    }
    Ok(Instance::new(values))
}

fn clamped_probs(probs: &permute_attack::model::ProbabilityVector) -> permute_attack::model::ProbabilityVector {
    // Pure forest leaves can yield exact 0/1; clamp for the log-odds report.
    permute_attack::model::ProbabilityVector {
        probs: probs.probs.iter().map(|p| p.clamp(1e-9, 1.0 - 1e-9)).collect(),
    }
}

fn render_score_table(
    results: &[AttackResult],
    schema: &[FeatureSchema],
    session: &Session,
) -> CliResult<ScoreReport> {
    let sc = session.config.scorecard.to_config();
    let pd_class = session.config.scorecard.pd_class;
    let original = clamped_probs(&results[0].original_probs);
    let cfs: Vec<(permute_attack::model::ProbabilityVector, Vec<String>)> = results
        .iter()
        .map(|r| {
            (
                clamped_probs(&r.final_probs),
                permute_attack::ga::describe_changes(&r.changed_features, schema),
            )
        })
        .collect();
    Ok(score_report(&original, &cfs, pd_class, &sc)?)
}

#[derive(Serialize)]
struct AttackFile<'a> {
    version: &'a str,
    selector: String,
    reports: Vec<AttackReport>,
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_attack(
    session: &Session,
    row: Option<usize>,
    inline: Option<String>,
    target: &Option<String>,
    n_counterfactuals: usize,
    exclude: &[String],
    allow_only: &[String],
    gibbs: Option<bool>,
    seed: Option<u64>,
) -> CliResult<()> {
    let dataset = session.dataset()?;
    let (train, _test) = session.split(&dataset);
    let handle = session.model_handle(&dataset.schema)?;

    let (x_orig, selector) = match (row, inline) {
        (Some(r), None) => {
            if r >= dataset.n_rows() {
                return Err(CliError::Usage(format!(
                    "row {r} out of range ({} rows)",
                    dataset.n_rows()
                )));
            }
            (dataset.instance(r), format!("row {r}"))
        }
        (None, Some(json)) => (
            parse_inline_instance(&json, &dataset.schema)?,
            "inline instance".to_string(),
        ),
        _ => {
            return Err(CliError::Usage(
                "exactly one of --row or --instance is required".into(),
            ))
        }
    };

    let mut cfg = session.config.attack.clone();
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(g) = gibbs {
        cfg.gibbs = g;
    }
    cfg.mutable_features = resolve_mutability(&dataset.schema, exclude, allow_only)?
        .or(cfg.mutable_features);

    let orig_probs = handle.predict_proba(std::slice::from_ref(&x_orig), &dataset.schema)?;
    let target_class = match parse_target(target, &dataset.label_names)? {
        Some(t) => t,
        None => {
            if handle.n_classes() != 2 {
                return Err(CliError::Usage(
                    "--target is required for models with more than 2 classes".into(),
                ));
            }
            1 - orig_probs[0].argmax()
        }
    };

    let ctx = AttackContext::new(&train, &cfg)?;
    let mut kept: Vec<AttackResult> = Vec::new();
    let mut seen_change_sets: BTreeSet<Vec<usize>> = BTreeSet::new();
    let max_attempts = n_counterfactuals.max(1) * 8;
    let mut last_failure: Option<AttackResult> = None;
    for attempt in 0..max_attempts {
        let mut cfg_j = cfg.clone();
        cfg_j.seed = cfg.seed.wrapping_add(attempt as u64);
        let result = attack_with_context(&x_orig, target_class, &handle, &ctx, &cfg_j)?;
        if result.success {
            let key: Vec<usize> = result.changed_features.iter().map(|c| c.index).collect();
            let degenerate = key.is_empty();
            if seen_change_sets.insert(key) {
                kept.push(result);
            }
            if degenerate || kept.len() >= n_counterfactuals.max(1) {
                break;
            }
        } else if last_failure.is_none() {
            last_failure = Some(result);
        }
    }

    let reports: Vec<AttackReport> = kept
        .iter()
        .map(|r| AttackReport::new(r, &dataset.schema, &dataset.label_names, &cfg))
        .collect();
    let path = session.write_json(
        "attack_result.json",
        &AttackFile {
            version: VERSION,
            selector: selector.clone(),
            reports,
        },
    )?;

    if kept.is_empty() {
        if let Some(failure) = &last_failure {
            let last = failure.trace.last();
            eprintln!(
                "no counterfactual found for {selector} within {} generations (best target prob {:.3})",
                failure.generations_used,
                last.map_or(f64::NAN, |t| t.best_target_prob)
            );
        }
        return Err(CliError::NotConverged);
    }

    println!(
        "{selector}: {} distinct counterfactual(s) -> {}",
        kept.len(),
        path.display()
    );
    let table = render_score_table(&kept, &dataset.schema, session)?;
    print!("{}", table.to_text());
    Ok(())
}

#[derive(Serialize, Deserialize)]
pub struct ResultsEntry {
    pub row: usize,
    pub seed: u64,
    pub result: AttackResult,
}

#[derive(Serialize, Deserialize)]
pub struct ResultsFile {
    pub version: String,
    pub config: RunConfig,
    pub schema: Vec<FeatureSchema>,
    pub label_names: Vec<String>,
    pub entries: Vec<ResultsEntry>,
    pub failures: Vec<BatchFailure>,
}

#[derive(Serialize)]
struct SummaryFile<'a> {
    version: &'a str,
    config: &'a RunConfig,
    summary: &'a BatchSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    direction_split:
        Option<&'a std::collections::BTreeMap<String, std::collections::BTreeMap<String, DirectionStats>>>,
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_batch(
    session: &Session,
    limit: Option<usize>,
    target: &Option<String>,
    exclude: &[String],
    allow_only: &[String],
    gibbs: Option<bool>,
    seed: Option<u64>,
) -> CliResult<()> {
    let dataset = session.dataset()?;
    let (train, test) = session.split(&dataset);
    let handle = session.model_handle(&dataset.schema)?;

    let n = limit.unwrap_or(test.n_rows()).min(test.n_rows());
    if n == 0 {
        return Err(CliError::Usage("test set is empty".into()));
    }
    let instances: Vec<Instance> = (0..n).map(|i| test.instance(i)).collect();

    let mut cfg = session.config.attack.clone();
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(g) = gibbs {
        cfg.gibbs = g;
    }
    let target_class = parse_target(target, &dataset.label_names)?;

    let (output, direction_split) = if !allow_only.is_empty() {
        let restricted = restricted_attack(
            &instances,
            &allow_only.to_vec(),
            &handle,
            &train,
            &cfg,
            session.workers,
        )?;
        (restricted.batch, Some(restricted.by_flip_direction))
    } else {
        cfg.mutable_features =
            resolve_mutability(&dataset.schema, exclude, &[])?.or(cfg.mutable_features);
        let out = run_batch(&instances, &handle, &train, &cfg, target_class, session.workers)?;
        (out, None)
    };

    let entries: Vec<ResultsEntry> = output
        .results
        .iter()
        .enumerate()
        .map(|(i, result)| ResultsEntry {
            row: i,
            seed: cfg.seed.wrapping_add(i as u64),
            result: result.clone(),
        })
        .collect();
    let results_file = ResultsFile {
        version: VERSION.to_string(),
        config: session.config.clone(),
        schema: train.schema.clone(),
        label_names: train.label_names.clone(),
        entries,
        failures: output.failures,
    };
    let results_path = session.write_json(RESULTS_FILE, &results_file)?;
    session.write_json(
        "summary.json",
        &SummaryFile {
            version: VERSION,
            config: &session.config,
            summary: &output.summary,
            direction_split: direction_split.as_ref(),
        },
    )?;
    session.write_text("histogram.csv", &histogram_csv(&output.summary))?;

    println!(
        "attacked {} rows: {} flipped ({:.1}%), mean changed features {:.2}",
        output.summary.n_attacked,
        output.summary.n_success,
        100.0 * output.summary.success_rate,
        output.summary.mean_changed_features
    );
    println!("results: {}", results_path.display());
    Ok(())
}

pub fn cmd_analyze(session: &Session, results: Option<PathBuf>) -> CliResult<()> {
    let path = results.unwrap_or_else(|| session.out_dir.join(RESULTS_FILE));
    if !path.exists() {
        return Err(CliError::Usage(format!(
            "no results at {}; run `batch` first",
            path.display()
        )));
    }
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let file: ResultsFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("bad results file: {e}")))?;

    let results: Vec<AttackResult> = file.entries.iter().map(|e| e.result.clone()).collect();
    let summary = summarize(&results, file.entries.len() + file.failures.len(), &file.schema);
    let graph = cooccurrence(&results, &file.schema);

    session.write_json(
        "summary.json",
        &SummaryFile {
            version: VERSION,
            config: &session.config,
            summary: &summary,
            direction_split: None,
        },
    )?;
    session.write_text("histogram.csv", &histogram_csv(&summary))?;
    let tsv = session.write_text("cooccurrence.tsv", &graph.to_edge_list())?;
    let dot = session.write_text("cooccurrence.dot", &graph.to_dot())?;

    println!(
        "{} results: success rate {:.1}%, mean changed {:.2}",
        summary.n_attacked,
        100.0 * summary.success_rate,
        summary.mean_changed_features
    );
    println!(
        "co-occurrence graph: {} nodes, {} edges -> {}, {}",
        graph.nodes.len(),
        graph.edges.len(),
        tsv.display(),
        dot.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct RealismFile<'a> {
    version: &'a str,
    config: &'a RunConfig,
    without_gibbs: RealismReport,
    with_gibbs: RealismReport,
    margin: f64,
}

pub fn cmd_realism(session: &Session, limit: Option<usize>) -> CliResult<()> {
    let dataset = session.dataset()?;
    let (train, mut test) = session.split(&dataset);
    let handle = session.model_handle(&dataset.schema)?;
    if let Some(n) = limit {
        test.rows.truncate(n);
        test.labels.truncate(n);
    }
    if test.n_rows() == 0 {
        return Err(CliError::Usage("test set is empty".into()));
    }

    let hyper = ForestHyper {
        n_trees: session.config.model.n_trees,
        max_depth: session.config.model.max_depth,
        min_leaf: session.config.model.min_leaf,
    };
    let realism = &session.config.realism;
    let mut reports = Vec::new();
    for gibbs in [false, true] {
        let cfg = AttackConfig {
            gibbs,
            ..session.config.attack.clone()
        };
        let report = realism_discriminator(
            &test,
            &handle,
            &train,
            &cfg,
            hyper,
            realism.discriminator_seed,
            realism.seed_a,
            realism.seed_b,
            session.workers,
        )?;
        println!(
            "discriminator fail rate (gibbs={}): {:.3}",
            if gibbs { "on" } else { "off" },
            report.fail_rate
        );
        reports.push(report);
    }
    let margin = reports[1].fail_rate - reports[0].fail_rate;
    println!("margin (on - off): {margin:+.3}");
    session.write_json(
        "realism.json",
        &RealismFile {
            version: VERSION,
            config: &session.config,
            without_gibbs: reports[0].clone(),
            with_gibbs: reports[1].clone(),
            margin,
        },
    )?;
    Ok(())
}

#[derive(Serialize)]
struct ScoreFile<'a> {
    version: &'a str,
    rows: Vec<ScoreRowOut>,
}

#[derive(Serialize)]
struct ScoreRowOut {
    pd: f64,
    score: i64,
}

pub fn cmd_score(session: &Session, pds: &[f64], results: Option<PathBuf>) -> CliResult<()> {
    let sc = session.config.scorecard.to_config();
    if !pds.is_empty() {
        let mut rows = Vec::new();
        for &pd in pds {
            let score = pd_to_score(pd, &sc)?;
            println!("pd {pd:.4} -> score {score}");
            rows.push(ScoreRowOut { pd, score });
        }
        session.write_json(
            "scores.json",
            &ScoreFile {
                version: VERSION,
                rows,
            },
        )?;
        return Ok(());
    }
    let Some(path) = results else {
        return Err(CliError::Usage(
            "score needs --pd values or a --results file".into(),
        ));
    };
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let file: ResultsFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Usage(format!("bad results file: {e}")))?;
    for entry in file.entries.iter().filter(|e| e.result.success).take(10) {
        let table = render_score_table(
            std::slice::from_ref(&entry.result),
            &file.schema,
            session,
        )?;
        println!("row {}:", entry.row);
        print!("{}", table.to_text());
    }
    Ok(())
}

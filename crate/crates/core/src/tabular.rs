//! Dataset ingestion, schema inference, one-hot/ordinal encoding, and
//! quantile discretization.
//!
//! Every other module consumes this representation: rows are stored in
//! "ordinal space" where categorical levels appear as their index into the
//! schema's level list and numeric columns keep their raw values. One-hot
//! expansion happens only at the model boundary.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// How a column is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Continuous,
    Ordinal,
    Categorical,
}

/// Value domain of a single feature. Serialized with `kind` as the tag so
/// the exported schema document reads as name/kind/levels/bin_edges/mutable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureDomain {
    Continuous {
        min: f64,
        max: f64,
        /// Interior quantile-bin boundaries, ascending. Populated by
        /// [`Dataset::discretize`]; empty until then.
        #[serde(default)]
        bin_edges: Vec<f64>,
    },
    Ordinal {
        /// Distinct raw values observed in the column, ascending.
        levels: Vec<f64>,
    },
    Categorical {
        /// Distinct raw strings observed in the column, lexicographic.
        levels: Vec<String>,
    },
}

/// Per-column metadata: the contract between raw data and the optimizer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSchema {
    pub name: String,
    #[serde(flatten)]
    pub domain: FeatureDomain,
    /// May the attack change this feature.
    pub mutable: bool,
}

impl FeatureSchema {
    pub fn kind(&self) -> FeatureKind {
        match self.domain {
            FeatureDomain::Continuous { .. } => FeatureKind::Continuous,
            FeatureDomain::Ordinal { .. } => FeatureKind::Ordinal,
            FeatureDomain::Categorical { .. } => FeatureKind::Categorical,
        }
    }

    /// Width of this feature in the one-hot expansion.
    pub fn onehot_width(&self) -> usize {
        match &self.domain {
            FeatureDomain::Categorical { levels } => levels.len(),
            _ => 1,
        }
    }

    /// Number of discretized bins this feature contributes (level count for
    /// discrete kinds, `bin_edges.len() + 1` for continuous).
    pub fn n_bins(&self) -> usize {
        match &self.domain {
            FeatureDomain::Continuous { bin_edges, .. } => bin_edges.len() + 1,
            FeatureDomain::Ordinal { levels } => levels.len(),
            FeatureDomain::Categorical { levels } => levels.len(),
        }
    }

    /// Bin index for a value of this feature. Continuous values equal to a
    /// bin edge go to the lower bin.
    pub fn bin_of(&self, value: f64) -> usize {
        match &self.domain {
            FeatureDomain::Continuous { bin_edges, .. } => {
                bin_edges.iter().take_while(|e| **e < value).count()
            }
            FeatureDomain::Ordinal { levels } => {
                // Nearest observed level; exact for in-domain values.
                match levels.binary_search_by(|l| l.partial_cmp(&value).unwrap()) {
                    Ok(i) => i,
                    Err(i) => {
                        if i == 0 {
                            0
                        } else if i >= levels.len() {
                            levels.len() - 1
                        } else if (value - levels[i - 1]).abs() <= (levels[i] - value).abs() {
                            i - 1
                        } else {
                            i
                        }
                    }
                }
            }
            FeatureDomain::Categorical { .. } => value as usize,
        }
    }

    /// Renders an ordinal-space cell value back to its raw form.
    pub fn display_value(&self, value: f64) -> String {
        match &self.domain {
            FeatureDomain::Categorical { levels } => levels
                .get(value as usize)
                .cloned()
                .unwrap_or_else(|| format!("<invalid level {value}>")),
            _ => format_number(value),
        }
    }
}

fn format_number(v: f64) -> String {
    if v.fract() == 0.0 && v.abs() < 1e15 {
        format!("{}", v as i64)
    } else {
        format!("{v}")
    }
}

/// One m-length feature vector in ordinal/numeric space; the unit the
/// optimizer perturbs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub values: Vec<f64>,
}

impl Instance {
    pub fn new(values: Vec<f64>) -> Self {
        Instance { values }
    }

    /// Checks conformance: length matches, categorical cells hold a valid
    /// level index, numeric cells are finite.
    pub fn validate(&self, schema: &[FeatureSchema]) -> Result<()> {
        if self.values.len() != schema.len() {
            return Err(Error::Schema(format!(
                "instance has {} values, schema has {} features",
                self.values.len(),
                schema.len()
            )));
        }
        for (v, feat) in self.values.iter().zip(schema) {
            if !v.is_finite() {
                return Err(Error::Schema(format!(
                    "non-finite value in feature '{}'",
                    feat.name
                )));
            }
            if let FeatureDomain::Categorical { levels } = &feat.domain {
                if v.fract() != 0.0 || *v < 0.0 || (*v as usize) >= levels.len() {
                    return Err(Error::Schema(format!(
                        "value {} is not a valid level index for feature '{}' ({} levels)",
                        v,
                        feat.name,
                        levels.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Rows in ordinal space plus class labels.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dataset {
    pub schema: Vec<FeatureSchema>,
    pub rows: Vec<Vec<f64>>,
    /// Class index per row, in `0..n_classes`.
    pub labels: Vec<usize>,
    /// Raw label strings, index-aligned with class indices.
    pub label_names: Vec<String>,
}

impl Dataset {
    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_features(&self) -> usize {
        self.schema.len()
    }

    pub fn n_classes(&self) -> usize {
        self.label_names.len()
    }

    pub fn instance(&self, row: usize) -> Instance {
        Instance::new(self.rows[row].clone())
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.schema.iter().position(|f| f.name == name)
    }

    /// Deterministic shuffled split: first `fraction` of rows (rounded) go to
    /// the train set. Both halves share the schema.
    pub fn train_test_split(&self, fraction: f64, seed: u64) -> (Dataset, Dataset) {
        let d = self.n_rows();
        let mut indices: Vec<usize> = (0..d).collect();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        indices.shuffle(&mut rng);
        let n_train = ((fraction * d as f64).round() as usize).clamp(1, d.saturating_sub(1).max(1));
        let take = |idx: &[usize]| Dataset {
            schema: self.schema.clone(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
            label_names: self.label_names.clone(),
        };
        (take(&indices[..n_train]), take(&indices[n_train..]))
    }

    /// Quantile-discretizes continuous columns into (at most) `n_bins`
    /// equal-population bins, storing the resulting edges back into the
    /// schema. Discrete columns pass through as their level indices.
    pub fn discretize(&mut self, n_bins: usize) -> Result<DiscretizedView> {
        if n_bins < 2 {
            return Err(Error::InvalidConfig(format!(
                "n_bins must be >= 2, got {n_bins}"
            )));
        }
        if self.rows.is_empty() {
            return Err(Error::EmptyDataset());
        }
        for j in 0..self.schema.len() {
            if let FeatureDomain::Continuous { bin_edges, .. } = &mut self.schema[j].domain {
                let column: Vec<f64> = self.rows.iter().map(|r| r[j]).collect();
                *bin_edges = quantile_edges(&column, n_bins);
            }
        }
        Ok(self.discretized_view())
    }

    /// Bins every row with the schema's current edges.
    pub fn discretized_view(&self) -> DiscretizedView {
        let bins_per_feature: Vec<usize> = self.schema.iter().map(|f| f.n_bins()).collect();
        let rows = self
            .rows
            .iter()
            .map(|r| {
                r.iter()
                    .zip(&self.schema)
                    .map(|(v, f)| f.bin_of(*v) as u16)
                    .collect()
            })
            .collect();
        DiscretizedView {
            rows,
            bins_per_feature,
        }
    }
}

/// Bin indices for every row; conditioning contexts for the sampler.
#[derive(Debug, Clone)]
pub struct DiscretizedView {
    pub rows: Vec<Vec<u16>>,
    pub bins_per_feature: Vec<usize>,
}

/// Interior edges for equal-population bins over `column`. Values equal to
/// an edge fall into the lower bin, so each edge is the maximum of the bin
/// below it. Columns with at most `n_bins` distinct values get one bin per
/// distinct value.
pub fn quantile_edges(column: &[f64], n_bins: usize) -> Vec<f64> {
    let mut sorted = column.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let mut distinct = sorted.clone();
    distinct.dedup();
    let d = sorted.len();

    let mut edges = if distinct.len() <= n_bins {
        distinct[..distinct.len().saturating_sub(1)].to_vec()
    } else {
        (1..n_bins)
            .map(|k| sorted[(k * d) / n_bins - 1])
            .collect()
    };
    edges.dedup();
    edges
}

/// Total one-hot width of a schema.
pub fn onehot_width(schema: &[FeatureSchema]) -> usize {
    schema.iter().map(|f| f.onehot_width()).sum()
}

/// Expands categorical features to indicator blocks; continuous and ordinal
/// values pass through.
pub fn to_onehot(instance: &Instance, schema: &[FeatureSchema]) -> Result<Vec<f64>> {
    instance.validate(schema)?;
    let mut out = Vec::with_capacity(onehot_width(schema));
    for (v, feat) in instance.values.iter().zip(schema) {
        match &feat.domain {
            FeatureDomain::Categorical { levels } => {
                let idx = *v as usize;
                for l in 0..levels.len() {
                    out.push(if l == idx { 1.0 } else { 0.0 });
                }
            }
            _ => out.push(*v),
        }
    }
    Ok(out)
}

/// Inverse of [`to_onehot`]. Rejects categorical blocks that do not contain
/// exactly one set indicator; the sampler never produces such vectors, this
/// guards external inputs.
pub fn from_onehot(vector: &[f64], schema: &[FeatureSchema]) -> Result<Instance> {
    let width = onehot_width(schema);
    if vector.len() != width {
        return Err(Error::Schema(format!(
            "one-hot vector has length {}, schema expands to {}",
            vector.len(),
            width
        )));
    }
    let mut values = Vec::with_capacity(schema.len());
    let mut pos = 0usize;
    for feat in schema {
        match &feat.domain {
            FeatureDomain::Categorical { levels } => {
                let block = &vector[pos..pos + levels.len()];
                let mut set = None;
                let mut set_count = 0usize;
                for (l, x) in block.iter().enumerate() {
                    if (*x - 1.0).abs() < 1e-9 {
                        set = Some(l);
                        set_count += 1;
                    } else if x.abs() > 1e-9 {
                        return Err(Error::MalformedOneHot {
                            feature: feat.name.clone(),
                            set_count: usize::MAX,
                        });
                    }
                }
                if set_count != 1 {
                    return Err(Error::MalformedOneHot {
                        feature: feat.name.clone(),
                        set_count,
                    });
                }
                values.push(set.unwrap() as f64);
                pos += levels.len();
            }
            _ => {
                values.push(vector[pos]);
                pos += 1;
            }
        }
    }
    Ok(Instance::new(values))
}

/// Options for CSV ingestion.
#[derive(Debug, Clone)]
pub struct LoadOptions {
    pub delimiter: u8,
    /// Numeric columns with at most this many distinct values become ordinal.
    pub ordinal_threshold: usize,
    /// Per-column kind overrides; these win over inference.
    pub kind_overrides: BTreeMap<String, FeatureKind>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions {
            delimiter: b',',
            ordinal_threshold: 12,
            kind_overrides: BTreeMap::new(),
        }
    }
}

/// Loads a delimited text file with a header row and infers the schema.
pub fn load_csv(path: &Path, target_column: &str, options: &LoadOptions) -> Result<Dataset> {
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let file = std::fs::File::open(path)?;
    load_csv_reader(file, target_column, options)
}

/// Same as [`load_csv`] but over any reader; used by tests and the synthetic
/// data generator.
pub fn load_csv_reader<R: Read>(
    reader: R,
    target_column: &str,
    options: &LoadOptions,
) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(options.delimiter)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.to_string()).collect();
    let target_idx = headers
        .iter()
        .position(|h| h == target_column)
        .ok_or_else(|| Error::MissingTargetColumn(target_column.to_string()))?;

    let mut raw_columns: Vec<Vec<String>> = vec![Vec::new(); headers.len()];
    for (row_idx, record) in rdr.records().enumerate() {
        let record = record?;
        if record.len() != headers.len() {
            return Err(Error::Schema(format!(
                "row {} has {} fields, header has {}",
                row_idx,
                record.len(),
                headers.len()
            )));
        }
        for (col, value) in record.iter().enumerate() {
            if value.is_empty() {
                return Err(Error::MissingValue {
                    column: headers[col].clone(),
                    row: row_idx,
                });
            }
            raw_columns[col].push(value.to_string());
        }
    }
    let n_rows = raw_columns[0].len();
    if n_rows == 0 {
        return Err(Error::EmptyDataset());
    }

    // Label encoding: distinct raw strings, lexicographic.
    let label_names: Vec<String> = {
        let set: BTreeSet<&String> = raw_columns[target_idx].iter().collect();
        set.into_iter().cloned().collect()
    };
    let labels: Vec<usize> = raw_columns[target_idx]
        .iter()
        .map(|v| label_names.binary_search(v).unwrap())
        .collect();

    let mut schema = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (col, name) in headers.iter().enumerate() {
        if col == target_idx {
            continue;
        }
        let raw = &raw_columns[col];
        let parsed: Option<Vec<f64>> = raw
            .iter()
            .map(|v| v.parse::<f64>().ok().filter(|x| x.is_finite()))
            .collect();
        let inferred = match &parsed {
            Some(nums) => {
                let mut distinct = nums.clone();
                distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
                distinct.dedup();
                if distinct.len() > options.ordinal_threshold {
                    FeatureKind::Continuous
                } else {
                    FeatureKind::Ordinal
                }
            }
            None => FeatureKind::Categorical,
        };
        let kind = options.kind_overrides.get(name).copied().unwrap_or(inferred);

        match kind {
            FeatureKind::Categorical => {
                let levels: Vec<String> = {
                    let set: BTreeSet<&String> = raw.iter().collect();
                    set.into_iter().cloned().collect()
                };
                let column: Vec<f64> = raw
                    .iter()
                    .map(|v| levels.binary_search(v).unwrap() as f64)
                    .collect();
                schema.push(FeatureSchema {
                    name: name.clone(),
                    domain: FeatureDomain::Categorical { levels },
                    mutable: true,
                });
                columns.push(column);
            }
            FeatureKind::Ordinal | FeatureKind::Continuous => {
                let nums = match &parsed {
                    Some(nums) => nums.clone(),
                    None => {
                        let (row, value) = raw
                            .iter()
                            .enumerate()
                            .find(|(_, v)| v.parse::<f64>().is_err())
                            .map(|(i, v)| (i, v.clone()))
                            .unwrap();
                        return Err(Error::NonNumericValue {
                            column: name.clone(),
                            row,
                            value,
                        });
                    }
                };
                let domain = if kind == FeatureKind::Ordinal {
                    let mut levels = nums.clone();
                    levels.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    levels.dedup();
                    FeatureDomain::Ordinal { levels }
                } else {
                    let min = nums.iter().cloned().fold(f64::INFINITY, f64::min);
                    let max = nums.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                    FeatureDomain::Continuous {
                        min,
                        max,
                        bin_edges: Vec::new(),
                    }
                };
                schema.push(FeatureSchema {
                    name: name.clone(),
                    domain,
                    mutable: true,
                });
                columns.push(nums);
            }
        }
    }

    let rows: Vec<Vec<f64>> = (0..n_rows)
        .map(|r| columns.iter().map(|c| c[r]).collect())
        .collect();
    Ok(Dataset {
        schema,
        rows,
        labels,
        label_names,
    })
}

/// Writes the schema contract file.
pub fn save_schema(schema: &[FeatureSchema], path: &Path) -> Result<()> {
    let json = serde_json::to_string_pretty(schema)?;
    std::fs::write(path, json)?;
    Ok(())
}

pub fn load_schema(path: &Path) -> Result<Vec<FeatureSchema>> {
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let json = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&json)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn toy_csv() -> &'static str {
        "age,job,label\n24,clerk,0\n31,painter,1\n59,clerk,0\n"
    }

    #[test]
    fn schema_inference_from_toy_csv() {
        let ds = load_csv_reader(toy_csv().as_bytes(), "label", &LoadOptions::default()).unwrap();
        assert_eq!(ds.n_features(), 2);
        assert_eq!(ds.schema[0].name, "age");
        // 3 distinct numeric values <= threshold 12 -> ordinal
        assert_eq!(ds.schema[0].kind(), FeatureKind::Ordinal);
        assert_eq!(ds.schema[1].kind(), FeatureKind::Categorical);
        match &ds.schema[1].domain {
            FeatureDomain::Categorical { levels } => {
                assert_eq!(levels, &["clerk".to_string(), "painter".to_string()]);
            }
            _ => panic!("job should be categorical"),
        }
        assert_eq!(ds.labels, vec![0, 1, 0]);
        assert_eq!(ds.rows[1], vec![31.0, 1.0]);
    }

    #[test]
    fn numeric_column_above_threshold_is_continuous() {
        let mut csv = String::from("x,label\n");
        for i in 0..20 {
            csv.push_str(&format!("{}.5,{}\n", i, i % 2));
        }
        let ds = load_csv_reader(csv.as_bytes(), "label", &LoadOptions::default()).unwrap();
        assert_eq!(ds.schema[0].kind(), FeatureKind::Continuous);
    }

    #[test]
    fn constant_column_infers_degenerate_schema() {
        let csv = "x,y,label\n5,a,0\n5,a,1\n5,a,0\n";
        let ds = load_csv_reader(csv.as_bytes(), "label", &LoadOptions::default()).unwrap();
        match &ds.schema[0].domain {
            FeatureDomain::Ordinal { levels } => assert_eq!(levels, &[5.0]),
            _ => panic!("constant numeric column should be ordinal"),
        }
        match &ds.schema[1].domain {
            FeatureDomain::Categorical { levels } => assert_eq!(levels.len(), 1),
            _ => panic!(),
        }
    }

    #[test]
    fn load_errors() {
        let err = load_csv(
            Path::new("/definitely/not/here.csv"),
            "label",
            &LoadOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::FileNotFound(_)));

        let err =
            load_csv_reader(toy_csv().as_bytes(), "missing", &LoadOptions::default()).unwrap_err();
        assert!(matches!(err, Error::MissingTargetColumn(_)));

        let err = load_csv_reader("a,label\n".as_bytes(), "label", &LoadOptions::default())
            .unwrap_err();
        assert!(matches!(err, Error::EmptyDataset()));

        let err = load_csv_reader(
            "a,label\n1,0\n,1\n".as_bytes(),
            "label",
            &LoadOptions::default(),
        )
        .unwrap_err();
        assert!(matches!(err, Error::MissingValue { row: 1, .. }));

        // Forcing a text column numeric surfaces the offending value.
        let mut opts = LoadOptions::default();
        opts.kind_overrides
            .insert("job".to_string(), FeatureKind::Continuous);
        let err = load_csv_reader(toy_csv().as_bytes(), "label", &opts).unwrap_err();
        assert!(matches!(err, Error::NonNumericValue { .. }));
    }

    #[test]
    fn schema_inference_is_deterministic() {
        let a = load_csv_reader(toy_csv().as_bytes(), "label", &LoadOptions::default()).unwrap();
        let b = load_csv_reader(toy_csv().as_bytes(), "label", &LoadOptions::default()).unwrap();
        assert_eq!(a.schema, b.schema);
        assert_eq!(
            serde_json::to_string(&a.schema).unwrap(),
            serde_json::to_string(&b.schema).unwrap()
        );
    }

    fn cat3_schema() -> Vec<FeatureSchema> {
        vec![FeatureSchema {
            name: "c".into(),
            domain: FeatureDomain::Categorical {
                levels: vec!["a".into(), "b".into(), "c".into()],
            },
            mutable: true,
        }]
    }

    #[test]
    fn onehot_basic_indicator() {
        let schema = cat3_schema();
        let v = to_onehot(&Instance::new(vec![1.0]), &schema).unwrap();
        assert_eq!(v, vec![0.0, 1.0, 0.0]);
        let back = from_onehot(&v, &schema).unwrap();
        assert_eq!(back.values, vec![1.0]);
    }

    #[test]
    fn onehot_all_continuous_is_identity() {
        let schema = vec![
            FeatureSchema {
                name: "x".into(),
                domain: FeatureDomain::Continuous {
                    min: 0.0,
                    max: 10.0,
                    bin_edges: vec![],
                },
                mutable: true,
            },
            FeatureSchema {
                name: "y".into(),
                domain: FeatureDomain::Continuous {
                    min: -1.0,
                    max: 1.0,
                    bin_edges: vec![],
                },
                mutable: true,
            },
        ];
        let inst = Instance::new(vec![3.25, -0.5]);
        let v = to_onehot(&inst, &schema).unwrap();
        assert_eq!(v, inst.values);
    }

    #[test]
    fn malformed_onehot_block_rejected() {
        let schema = cat3_schema();
        let err = from_onehot(&[1.0, 1.0, 0.0], &schema).unwrap_err();
        assert!(matches!(err, Error::MalformedOneHot { set_count: 2, .. }));
        let err = from_onehot(&[0.0, 0.0, 0.0], &schema).unwrap_err();
        assert!(matches!(err, Error::MalformedOneHot { set_count: 0, .. }));
    }

    #[test]
    fn quantile_bins_ten_values_five_bins() {
        let column: Vec<f64> = (1..=10).map(|v| v as f64).collect();
        let edges = quantile_edges(&column, 5);
        assert_eq!(edges, vec![2.0, 4.0, 6.0, 8.0]);
        let feat = FeatureSchema {
            name: "x".into(),
            domain: FeatureDomain::Continuous {
                min: 1.0,
                max: 10.0,
                bin_edges: edges,
            },
            mutable: true,
        };
        let bins: Vec<usize> = column.iter().map(|v| feat.bin_of(*v)).collect();
        assert_eq!(bins, vec![0, 0, 1, 1, 2, 2, 3, 3, 4, 4]);
    }

    #[test]
    fn quantile_bins_degenerate_column() {
        let column = vec![7.0; 20];
        let edges = quantile_edges(&column, 5);
        assert!(edges.is_empty());
    }

    #[test]
    fn quantile_bins_fewer_distinct_than_bins() {
        let column = vec![1.0, 1.0, 2.0, 2.0, 3.0];
        let edges = quantile_edges(&column, 5);
        assert_eq!(edges, vec![1.0, 2.0]);
        let feat = FeatureSchema {
            name: "x".into(),
            domain: FeatureDomain::Continuous {
                min: 1.0,
                max: 3.0,
                bin_edges: edges,
            },
            mutable: true,
        };
        assert_eq!(feat.bin_of(1.0), 0);
        assert_eq!(feat.bin_of(2.0), 1);
        assert_eq!(feat.bin_of(3.0), 2);
    }

    #[test]
    fn discretize_rejects_bad_input() {
        let mut ds =
            load_csv_reader(toy_csv().as_bytes(), "label", &LoadOptions::default()).unwrap();
        assert!(ds.discretize(1).is_err());
        assert!(ds.discretize(5).is_ok());
    }

    #[test]
    fn split_is_deterministic_and_disjoint() {
        let mut csv = String::from("x,label\n");
        for i in 0..100 {
            csv.push_str(&format!("{},{}\n", i, i % 2));
        }
        let ds = load_csv_reader(csv.as_bytes(), "label", &LoadOptions::default()).unwrap();
        let (tr1, te1) = ds.train_test_split(0.6, 42);
        let (tr2, te2) = ds.train_test_split(0.6, 42);
        assert_eq!(tr1.rows, tr2.rows);
        assert_eq!(te1.rows, te2.rows);
        assert_eq!(tr1.n_rows(), 60);
        assert_eq!(te1.n_rows(), 40);
        let mut all: Vec<f64> = tr1.rows.iter().chain(&te1.rows).map(|r| r[0]).collect();
        all.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(all, (0..100).map(|v| v as f64).collect::<Vec<_>>());
    }

    proptest! {
        #[test]
        fn quantile_bins_are_monotone(mut column in proptest::collection::vec(-1e6..1e6f64, 2..200), n_bins in 2usize..8) {
            let edges = quantile_edges(&column, n_bins);
            prop_assert!(edges.windows(2).all(|w| w[0] < w[1]));
            let feat = FeatureSchema {
                name: "x".into(),
                domain: FeatureDomain::Continuous { min: 0.0, max: 0.0, bin_edges: edges },
                mutable: true,
            };
            column.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let bins: Vec<usize> = column.iter().map(|v| feat.bin_of(*v)).collect();
            prop_assert!(bins.windows(2).all(|w| w[0] <= w[1]));
        }

        #[test]
        fn quantile_bins_balanced_on_distinct_values(n in 10usize..300, n_bins in 2usize..8) {
            // Distinct values: bin populations must differ by at most one.
            let column: Vec<f64> = (0..n).map(|i| i as f64 * 1.5 + 3.0).collect();
            let edges = quantile_edges(&column, n_bins);
            let feat = FeatureSchema {
                name: "x".into(),
                domain: FeatureDomain::Continuous { min: 0.0, max: 0.0, bin_edges: edges },
                mutable: true,
            };
            let mut counts = vec![0usize; feat.n_bins()];
            for v in &column {
                counts[feat.bin_of(*v)] += 1;
            }
            let min = counts.iter().min().unwrap();
            let max = counts.iter().max().unwrap();
            prop_assert!(max - min <= 1, "counts {:?}", counts);
        }
    }

    // Random schema + conforming instance for the round-trip property.
    fn arb_schema_and_instance() -> impl Strategy<Value = (Vec<FeatureSchema>, Instance)> {
        let feature = prop_oneof![
            (2usize..6).prop_map(|n| FeatureDomain::Categorical {
                levels: (0..n).map(|i| format!("l{i}")).collect(),
            }),
            Just(FeatureDomain::Continuous {
                min: -10.0,
                max: 10.0,
                bin_edges: vec![],
            }),
            Just(FeatureDomain::Ordinal {
                levels: vec![1.0, 2.0, 3.0, 4.0],
            }),
        ];
        proptest::collection::vec(feature, 1..8).prop_flat_map(|domains| {
            let schema: Vec<FeatureSchema> = domains
                .into_iter()
                .enumerate()
                .map(|(i, domain)| FeatureSchema {
                    name: format!("f{i}"),
                    domain,
                    mutable: true,
                })
                .collect();
            let value_strats: Vec<BoxedStrategy<f64>> = schema
                .iter()
                .map(|f| match &f.domain {
                    FeatureDomain::Categorical { levels } => {
                        (0..levels.len()).prop_map(|i| i as f64).boxed()
                    }
                    FeatureDomain::Ordinal { levels } => {
                        proptest::sample::select(levels.clone()).boxed()
                    }
                    FeatureDomain::Continuous { .. } => (-10.0..10.0f64).boxed(),
                })
                .collect();
            (Just(schema), value_strats).prop_map(|(s, v)| (s, Instance::new(v)))
        })
    }

    proptest! {
        #[test]
        fn onehot_roundtrip_identity((schema, inst) in arb_schema_and_instance()) {
            let v = to_onehot(&inst, &schema).unwrap();
            let back = from_onehot(&v, &schema).unwrap();
            prop_assert_eq!(back, inst);
        }
    }
}

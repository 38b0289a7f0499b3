//! The TOML run configuration. Command-line flags override config fields,
//! which override the built-in defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use permute_attack::ga::AttackConfig;
use permute_attack::scorecard::{Rounding, ScorecardConfig};
use permute_attack::tabular::FeatureKind;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    pub csv: PathBuf,
    pub target_column: String,
    pub delimiter: String,
    pub ordinal_threshold: usize,
    pub kind_overrides: BTreeMap<String, FeatureKind>,
    pub split_fraction: f64,
    pub split_seed: u64,
}

impl Default for DataConfig {
    fn default() -> Self {
        DataConfig {
            csv: PathBuf::from("data/german_credit_synth.csv"),
            target_column: "default".into(),
            delimiter: ",".into(),
            ordinal_threshold: 12,
            kind_overrides: BTreeMap::new(),
            split_fraction: 0.6,
            split_seed: 42,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Backend {
    Builtin,
    External,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    pub backend: Backend,
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
    pub seed: u64,
    /// Command line launching an external model process.
    pub command: Vec<String>,
    pub timeout_secs: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            backend: Backend::Builtin,
            n_trees: 10,
            max_depth: 12,
            min_leaf: 2,
            seed: 9,
            command: Vec::new(),
            timeout_secs: 30,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScorecardSection {
    pub base_score: f64,
    pub pdo: f64,
    pub base_odds: f64,
    pub rounding: Rounding,
    /// Probability coordinate read as the probability of default.
    pub pd_class: usize,
}

impl Default for ScorecardSection {
    fn default() -> Self {
        ScorecardSection {
            base_score: 600.0,
            pdo: 15.0,
            base_odds: 20.0,
            rounding: Rounding::Floor,
            pd_class: 1,
        }
    }
}

impl ScorecardSection {
    pub fn to_config(&self) -> ScorecardConfig {
        ScorecardConfig {
            base_score: self.base_score,
            pdo: self.pdo,
            base_odds: self.base_odds,
            rounding: self.rounding,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RealismConfig {
    pub seed_a: u64,
    pub seed_b: u64,
    pub discriminator_seed: u64,
}

impl Default for RealismConfig {
    fn default() -> Self {
        RealismConfig {
            seed_a: 1,
            seed_b: 2,
            discriminator_seed: 99,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: PathBuf,
    /// 0 = all cores, 1 = sequential, n = fixed pool.
    pub workers: usize,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            dir: PathBuf::from("out"),
            workers: 0,
        }
    }
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub data: DataConfig,
    pub model: ModelConfig,
    pub attack: AttackConfig,
    pub scorecard: ScorecardSection,
    pub realism: RealismConfig,
    pub output: OutputConfig,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let config: RunConfig =
            toml::from_str(&text).map_err(|e| format!("bad config {}: {e}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.data.split_fraction > 0.0 && self.data.split_fraction < 1.0) {
            return Err("data.split_fraction must lie in (0, 1)".into());
        }
        if self.data.delimiter.len() != 1 {
            return Err("data.delimiter must be a single character".into());
        }
        match self.model.backend {
            Backend::Builtin => {}
            Backend::External => {
                if self.model.command.is_empty() {
                    return Err("model.command required for the external backend".into());
                }
            }
        }
        Ok(())
    }
}

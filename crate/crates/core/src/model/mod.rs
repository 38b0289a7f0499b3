//! Black-box classifier abstraction: a built-in reference forest plus an
//! adapter for external models over a line-oriented wire protocol. The
//! optimizer only ever sees [`ModelHandle::predict_proba`].

mod external;
mod forest;

pub use external::{
    Direction, ExternalModel, PredictResponse, SchemaResponse, DEFAULT_TIMEOUT,
    PROB_SUM_TOLERANCE,
};
pub use forest::{
    load_forest, save_forest, train_forest, ForestFile, ForestHyper, ForestModel, Node, Tree,
    FOREST_FORMAT_VERSION,
};

use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::tabular::{to_onehot, FeatureSchema, Instance};

/// Length-K vector of class probabilities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityVector {
    pub probs: Vec<f64>,
}

impl ProbabilityVector {
    /// Hard class: index of the largest probability, lowest index on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, p) in self.probs.iter().enumerate() {
            if *p > self.probs[best] {
                best = i;
            }
        }
        best
    }

    pub fn validate(&self, n_classes: usize, sum_tolerance: f64) -> Result<()> {
        if self.probs.len() != n_classes {
            return Err(Error::Domain(format!(
                "expected {n_classes} probabilities, got {}",
                self.probs.len()
            )));
        }
        if self
            .probs
            .iter()
            .any(|p| !p.is_finite() || *p < 0.0 || *p > 1.0)
        {
            return Err(Error::Domain(format!(
                "probability outside [0,1]: {:?}",
                self.probs
            )));
        }
        let sum: f64 = self.probs.iter().sum();
        if (sum - 1.0).abs() > sum_tolerance {
            return Err(Error::Domain(format!("probabilities sum to {sum}")));
        }
        Ok(())
    }
}

/// Input encoding a backend expects at the predict boundary.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    Onehot,
    Ordinal,
}

pub enum ModelBackend {
    BuiltinForest(ForestModel),
    /// Serialized behind a mutex: the wire protocol allows one request in
    /// flight at a time.
    ExternalProcess(Mutex<ExternalModel>),
}

pub struct ModelHandle {
    pub backend: ModelBackend,
    pub encoding: Encoding,
    n_classes: usize,
}

impl ModelHandle {
    /// The builtin forest consumes one-hot input; the optimizer operates
    /// ordinal-side and encodes at this boundary.
    pub fn from_forest(model: ForestModel) -> Self {
        let n_classes = model.n_classes;
        ModelHandle {
            backend: ModelBackend::BuiltinForest(model),
            encoding: Encoding::Onehot,
            n_classes,
        }
    }

    pub fn from_external(model: ExternalModel) -> Self {
        let encoding = model.info.encoding;
        let n_classes = model.info.n_classes;
        ModelHandle {
            backend: ModelBackend::ExternalProcess(Mutex::new(model)),
            encoding,
            n_classes,
        }
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    /// One probability vector per instance. Pure for the builtin forest;
    /// backend failures surface as errors, never as substituted values.
    pub fn predict_proba(
        &self,
        batch: &[Instance],
        schema: &[FeatureSchema],
    ) -> Result<Vec<ProbabilityVector>> {
        if batch.is_empty() {
            return Err(Error::Domain("empty prediction batch".into()));
        }
        let encoded: Vec<Vec<f64>> = match self.encoding {
            Encoding::Onehot => batch
                .iter()
                .map(|inst| to_onehot(inst, schema))
                .collect::<Result<_>>()?,
            Encoding::Ordinal => {
                for inst in batch {
                    inst.validate(schema)?;
                }
                batch.iter().map(|inst| inst.values.clone()).collect()
            }
        };
        match &self.backend {
            ModelBackend::BuiltinForest(forest) => {
                Ok(par::map_indexed(&encoded, par::Workers::Auto, |_, x| {
                    forest.predict_onehot(x)
                }))
            }
            ModelBackend::ExternalProcess(external) => {
                let mut guard = external.lock().map_err(|_| {
                    Error::Backend("external model poisoned by earlier panic".into())
                })?;
                guard.predict(&encoded)
            }
        }
    }
}

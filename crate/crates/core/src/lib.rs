//! Counterfactual example generation for black-box tabular classifiers.
//!
//! The optimizer perturbs an instance by permuting feature values drawn from
//! the training data — never by adding noise — so every candidate stays
//! inside the observed value domains. A genetic loop (softmax selection with
//! elitism, feature-swap crossover, importance-weighted mutation, adaptive
//! penalty relaxation) searches for the sparsest change set that flips the
//! model's decision. Conditional sampling over a quantile-discretized view
//! of the training data keeps multi-feature perturbations jointly realistic.
//!
//! Modules:
//! - [`tabular`]: schema inference, CSV ingestion, one-hot codec, binning.
//! - [`model`]: builtin random forest and the external-process protocol.
//! - [`sampler`]: marginal/conditional/Gibbs perturbation values.
//! - [`ga`]: the attack loop itself.
//! - [`scorecard`]: probability-of-default to credit-score transform.
//! - [`analysis`]: batch harness, change statistics, co-occurrence graphs,
//!   restricted attacks, realism discriminator.
//! - [`synth`]: deterministic credit-scoring demo dataset.

pub mod analysis;
pub mod error;
pub mod ga;
pub mod model;
pub mod par;
pub mod sampler;
pub mod scorecard;
mod seeding;
pub mod synth;
pub mod tabular;

pub use error::{Error, Result};

//! Reference random forest: bagged CART trees with Gini splits over
//! one-hot-encoded input. Deterministic given a seed, including tie-breaks,
//! so trained models and everything downstream reproduce bit-for-bit.

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ProbabilityVector;
use crate::par;
use crate::seeding::derive_rng;
use crate::tabular::{to_onehot, Dataset};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        /// Class counts of the training rows that reached this leaf.
        counts: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    /// Leaf class frequencies for one one-hot row.
    pub fn predict(&self, x: &[f64]) -> Vec<f64> {
        let mut idx = 0usize;
        loop {
            match &self.nodes[idx] {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    idx = if x[*feature] <= *threshold {
                        *left
                    } else {
                        *right
                    };
                }
                Node::Leaf { counts } => {
                    let total: f64 = counts.iter().sum();
                    return counts.iter().map(|c| c / total).collect();
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestHyper {
    pub n_trees: usize,
    pub max_depth: usize,
    pub min_leaf: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub trees: Vec<Tree>,
    pub feature_width: usize,
    pub n_classes: usize,
    pub hyper: ForestHyper,
    pub rng_seed: u64,
}

impl ForestModel {
    /// Soft vote: average of per-tree leaf frequencies.
    pub fn predict_onehot(&self, x: &[f64]) -> ProbabilityVector {
        let mut acc = vec![0.0; self.n_classes];
        for tree in &self.trees {
            for (a, p) in acc.iter_mut().zip(tree.predict(x)) {
                *a += p;
            }
        }
        let n = self.trees.len() as f64;
        ProbabilityVector {
            probs: acc.into_iter().map(|v| v / n).collect(),
        }
    }
}

fn gini(counts: &[f64]) -> f64 {
    let total: f64 = counts.iter().sum();
    if total == 0.0 {
        return 0.0;
    }
    1.0 - counts
        .iter()
        .map(|c| {
            let p = c / total;
            p * p
        })
        .sum::<f64>()
}

struct TreeBuilder<'a> {
    x: &'a [Vec<f64>],
    y: &'a [usize],
    n_classes: usize,
    hyper: ForestHyper,
    n_candidates: usize,
    nodes: Vec<Node>,
}

impl TreeBuilder<'_> {
    fn class_counts(&self, rows: &[usize]) -> Vec<f64> {
        let mut counts = vec![0.0; self.n_classes];
        for &r in rows {
            counts[self.y[r]] += 1.0;
        }
        counts
    }

    fn grow(&mut self, rows: Vec<usize>, depth: usize, rng: &mut impl Rng) -> usize {
        let counts = self.class_counts(&rows);
        let parent_gini = gini(&counts);
        let can_split = depth < self.hyper.max_depth
            && rows.len() >= 2 * self.hyper.min_leaf
            && parent_gini > 0.0;

        let split = if can_split {
            self.best_split(&rows, parent_gini, rng)
        } else {
            None
        };

        match split {
            None => {
                self.nodes.push(Node::Leaf { counts });
                self.nodes.len() - 1
            }
            Some((feature, threshold)) => {
                let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
                    rows.into_iter().partition(|&r| self.x[r][feature] <= threshold);
                let idx = self.nodes.len();
                self.nodes.push(Node::Split {
                    feature,
                    threshold,
                    left: 0,
                    right: 0,
                });
                let left = self.grow(left_rows, depth + 1, rng);
                let right = self.grow(right_rows, depth + 1, rng);
                if let Node::Split {
                    left: l, right: r, ..
                } = &mut self.nodes[idx]
                {
                    *l = left;
                    *r = right;
                }
                idx
            }
        }
    }

    /// Best Gini-reduction split over a random candidate-feature subset.
    /// Ties break to the lowest feature index, then the lowest threshold:
    /// candidates are scanned in ascending order with strict improvement.
    fn best_split(
        &self,
        rows: &[usize],
        parent_gini: f64,
        rng: &mut impl Rng,
    ) -> Option<(usize, f64)> {
        let width = self.x[0].len();
        let mut candidates: Vec<usize> =
            sample(rng, width, self.n_candidates.min(width)).into_vec();
        candidates.sort_unstable();

        let n = rows.len() as f64;
        let total_counts = self.class_counts(rows);
        let mut best: Option<(f64, usize, f64)> = None;

        for &feature in &candidates {
            let mut pairs: Vec<(f64, usize)> =
                rows.iter().map(|&r| (self.x[r][feature], self.y[r])).collect();
            pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

            let mut left_counts = vec![0.0; self.n_classes];
            let mut n_left = 0usize;
            for w in 0..pairs.len() - 1 {
                left_counts[pairs[w].1] += 1.0;
                n_left += 1;
                if pairs[w].0 == pairs[w + 1].0 {
                    continue;
                }
                let n_right = rows.len() - n_left;
                if n_left < self.hyper.min_leaf || n_right < self.hyper.min_leaf {
                    continue;
                }
                let right_counts: Vec<f64> = total_counts
                    .iter()
                    .zip(&left_counts)
                    .map(|(t, l)| t - l)
                    .collect();
                let weighted = (n_left as f64 * gini(&left_counts)
                    + n_right as f64 * gini(&right_counts))
                    / n;
                let gain = parent_gini - weighted;
                if gain > 1e-12 && best.map_or(true, |(g, _, _)| gain > g) {
                    let threshold = (pairs[w].0 + pairs[w + 1].0) / 2.0;
                    best = Some((gain, feature, threshold));
                }
            }
        }
        best.map(|(_, f, t)| (f, t))
    }
}

/// Trains a forest on the dataset's one-hot expansion. Bootstrap sampling
/// and per-split feature subsets are drawn from streams derived from `seed`
/// and the tree index, so training parallelizes without changing the model.
pub fn train_forest(
    dataset: &Dataset,
    n_trees: usize,
    max_depth: usize,
    min_leaf: usize,
    seed: u64,
) -> Result<ForestModel> {
    if n_trees == 0 || max_depth == 0 || min_leaf == 0 {
        return Err(Error::InvalidConfig(
            "n_trees, max_depth and min_leaf must be positive".into(),
        ));
    }
    if dataset.n_rows() == 0 {
        return Err(Error::EmptyDataset());
    }
    {
        let first = dataset.labels[0];
        if dataset.labels.iter().all(|&l| l == first) {
            return Err(Error::SingleClass);
        }
    }

    let x: Vec<Vec<f64>> = dataset
        .rows
        .iter()
        .map(|r| to_onehot(&crate::tabular::Instance::new(r.clone()), &dataset.schema))
        .collect::<Result<_>>()?;
    let y = &dataset.labels;
    let n_classes = dataset.n_classes();
    let width = x[0].len();
    let hyper = ForestHyper {
        n_trees,
        max_depth,
        min_leaf,
    };
    let n_candidates = (width as f64).sqrt().floor().max(1.0) as usize;

    let trees: Vec<Tree> = par::map_range(n_trees, |t| {
        let mut rng = derive_rng(seed, &[0x7265, t as u64]);
        let rows: Vec<usize> = (0..x.len()).map(|_| rng.random_range(0..x.len())).collect();
        let mut builder = TreeBuilder {
            x: &x,
            y,
            n_classes,
            hyper,
            n_candidates,
            nodes: Vec::new(),
        };
        builder.grow(rows, 0, &mut rng);
        Tree {
            nodes: builder.nodes,
        }
    });

    Ok(ForestModel {
        trees,
        feature_width: width,
        n_classes,
        hyper,
        rng_seed: seed,
    })
}

/// Versioned on-disk form of the builtin forest.
#[derive(Debug, Serialize, Deserialize)]
pub struct ForestFile {
    pub format_version: u32,
    pub model: ForestModel,
}

pub const FOREST_FORMAT_VERSION: u32 = 1;

pub fn save_forest(model: &ForestModel, path: &std::path::Path) -> Result<()> {
    let file = ForestFile {
        format_version: FOREST_FORMAT_VERSION,
        model: model.clone(),
    };
    std::fs::write(path, serde_json::to_string(&file)?)?;
    Ok(())
}

pub fn load_forest(path: &std::path::Path) -> Result<ForestModel> {
    if !path.exists() {
        return Err(Error::FileNotFound(path.to_path_buf()));
    }
    let file: ForestFile = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    if file.format_version != FOREST_FORMAT_VERSION {
        return Err(Error::Schema(format!(
            "unsupported forest format version {}",
            file.format_version
        )));
    }
    Ok(file.model)
}

// SPDX-License-Identifier: Apache-2.0

//! Random forest of unpruned CART trees (Gini impurity).

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForestParams {
    pub n_trees: usize,
    /// Features examined per split (clamped to the data dimension).
    pub max_features: usize,
    pub min_leaf: usize,
    pub seed: u64,
}

impl Default for ForestParams {
    fn default() -> Self {
        Self { n_trees: 1024, max_features: 2, min_leaf: 1, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Node {
    Split {
        feature: u32,
        /// Rows with `x[feature] <= threshold` go left.
        threshold: f64,
        left: u32,
        right: u32,
    },
    Leaf {
        /// Fraction of bursty training rows reaching the leaf.
        fraction: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf_fraction(&self, x: &[f64]) -> f64 {
        let mut i = 0usize;
        loop {
            match &self.nodes[i] {
                Node::Leaf { fraction } => return *fraction,
                Node::Split { feature, threshold, left, right } => {
                    i = if x[*feature as usize] <= *threshold { *left as usize } else { *right as usize };
                }
            }
        }
    }

    pub fn votes_bursty(&self, x: &[f64]) -> bool {
        self.leaf_fraction(x) >= 0.5
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestModel {
    pub params: ForestParams,
    pub trees: Vec<Tree>,
}

impl ForestModel {
    /// Fraction of trees voting bursty.
    pub fn predict_score(&self, x: &[f64]) -> f64 {
        if self.trees.is_empty() {
            return 0.0;
        }
        let votes = self.trees.iter().filter(|t| t.votes_bursty(x)).count();
        votes as f64 / self.trees.len() as f64
    }
}

/// Trains `params.n_trees` trees, each on a bootstrap resample. With
/// `weights`, the resample is drawn proportionally to them.
pub fn train_forest(data: &Dataset, params: &ForestParams, weights: Option<&[f64]>) -> Result<ForestModel> {
    data.require_both_classes()?;
    if params.n_trees == 0 {
        return Err(Error::Config("forest needs at least one tree".into()));
    }
    let sampler = match weights {
        Some(w) => Some(WeightedIndex::new(w).map_err(|e| Error::Training(format!("bad sample weights: {e}")))?),
        None => None,
    };
    let max_features = params.max_features.clamp(1, data.dim().max(1));
    let trees = (0..params.n_trees)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
            rng.set_stream(i as u64);
            let n = data.len();
            let mut idx: Vec<usize> = match &sampler {
                Some(s) => (0..n).map(|_| s.sample(&mut rng)).collect(),
                None => (0..n).map(|_| rng.random_range(0..n)).collect(),
            };
            grow_tree(data, &mut idx, max_features, params.min_leaf.max(1), &mut rng)
        })
        .collect();
    Ok(ForestModel { params: *params, trees })
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    /// Rows in the left child.
    left_len: usize,
}

fn grow_tree(data: &Dataset, idx: &mut [usize], max_features: usize, min_leaf: usize, rng: &mut ChaCha8Rng) -> Tree {
    let mut nodes = vec![Node::Leaf { fraction: 0.0 }];
    // (node id, start, end) ranges into `idx`.
    let mut stack = vec![(0usize, 0usize, idx.len())];
    let mut features: Vec<usize> = (0..data.dim()).collect();
    let mut scratch: Vec<(f64, bool)> = Vec::with_capacity(idx.len());

    while let Some((node, start, end)) = stack.pop() {
        let rows = &mut idx[start..end];
        let pos = rows.iter().filter(|&&i| data.label(i)).count();
        let n = rows.len();
        let fraction = pos as f64 / n as f64;
        if pos == 0 || pos == n || n < 2 * min_leaf {
            nodes[node] = Node::Leaf { fraction };
            continue;
        }
        let Some(split) = best_split(data, rows, &mut features, max_features, min_leaf, rng, &mut scratch) else {
            nodes[node] = Node::Leaf { fraction };
            continue;
        };
        // Partition rows so the left child comes first.
        rows.sort_by(|&a, &b| {
            let la = data.row(a)[split.feature] <= split.threshold;
            let lb = data.row(b)[split.feature] <= split.threshold;
            lb.cmp(&la)
        });
        debug_assert_eq!(
            rows.iter().filter(|&&i| data.row(i)[split.feature] <= split.threshold).count(),
            split.left_len
        );
        let left = nodes.len();
        nodes.push(Node::Leaf { fraction: 0.0 });
        let right = nodes.len();
        nodes.push(Node::Leaf { fraction: 0.0 });
        nodes[node] = Node::Split {
            feature: split.feature as u32,
            threshold: split.threshold,
            left: left as u32,
            right: right as u32,
        };
        stack.push((right, start + split.left_len, end));
        stack.push((left, start, start + split.left_len));
    }
    Tree { nodes }
}

/// Best Gini split among randomly ordered features. At least `max_features`
/// features are inspected; inspection continues past that only until some
/// valid split is found.
fn best_split(
    data: &Dataset,
    rows: &[usize],
    features: &mut [usize],
    max_features: usize,
    min_leaf: usize,
    rng: &mut ChaCha8Rng,
    scratch: &mut Vec<(f64, bool)>,
) -> Option<SplitChoice> {
    let d = features.len();
    let total_pos = rows.iter().filter(|&&i| data.label(i)).count() as f64;
    let n = rows.len();
    let mut best: Option<(f64, SplitChoice)> = None;

    for k in 0..d {
        let j = rng.random_range(k..d);
        features.swap(k, j);
        if k >= max_features && best.is_some() {
            break;
        }
        let f = features[k];
        scratch.clear();
        scratch.extend(rows.iter().map(|&i| (data.row(i)[f], data.label(i))));
        scratch.sort_by(|a, b| a.0.total_cmp(&b.0));
        if scratch[0].0 == scratch[n - 1].0 {
            continue;
        }
        let mut left_pos = 0.0;
        for i in 1..n {
            if scratch[i - 1].1 {
                left_pos += 1.0;
            }
            if scratch[i - 1].0 == scratch[i].0 || i < min_leaf || n - i < min_leaf {
                continue;
            }
            let nl = i as f64;
            let nr = (n - i) as f64;
            let right_pos = total_pos - left_pos;
            let left_neg = nl - left_pos;
            let right_neg = nr - right_pos;
            // Weighted child impurity, up to a constant factor.
            let impurity = nl - (left_pos * left_pos + left_neg * left_neg) / nl + nr
                - (right_pos * right_pos + right_neg * right_neg) / nr;
            if best.as_ref().is_none_or(|(b, _)| impurity < *b) {
                let lo = scratch[i - 1].0;
                let hi = scratch[i].0;
                let mut threshold = lo + (hi - lo) / 2.0;
                if !(threshold >= lo && threshold < hi) {
                    threshold = lo;
                }
                best = Some((impurity, SplitChoice { feature: f, threshold, left_len: i }));
            }
        }
    }
    best.map(|(_, s)| s)
}

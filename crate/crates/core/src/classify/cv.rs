// SPDX-License-Identifier: Apache-2.0

//! Stratified k-fold cross-validation and hyperparameter grid search scored
//! by AUC.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::boost::{train_adaboost, BoostParams};
use super::forest::{train_forest, ForestParams};
use super::svm::{train_svm_rbf, SvmParams};
use super::Dataset;
use crate::error::{Error, Result};
use crate::eval::auc;

/// Fold id per row. Each class is shuffled and dealt round-robin, so every
/// fold receives `⌊n_class / k⌋` or `⌈n_class / k⌉` rows of each class.
pub fn stratified_folds(labels: &[bool], k: usize, seed: u64) -> Vec<usize> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut folds = vec![0; labels.len()];
    let mut offset = 0;
    for class in [true, false] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        for (r, i) in idx.into_iter().enumerate() {
            folds[i] = (r + offset) % k;
        }
        // Continue dealing where the previous class stopped.
        offset = (offset + labels.iter().filter(|&&l| l == class).count()) % k;
    }
    folds
}

/// Fold count to use for `data`: `requested`, reduced to the size of the
/// smaller class when that is smaller.
pub fn effective_folds(data: &Dataset, requested: usize) -> Result<usize> {
    let minority = data.positives().min(data.negatives());
    if minority < 2 {
        return Err(Error::Training(format!(
            "cross-validation needs >= 2 rows per class, smaller class has {minority}"
        )));
    }
    if minority < requested {
        log::warn!("only {minority} rows in the smaller class; using {minority} folds instead of {requested}");
        Ok(minority)
    } else {
        Ok(requested)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub fold_aucs: Vec<f64>,
    pub mean_auc: f64,
    /// Hyperparameters as `name=value` pairs.
    pub params: Vec<(String, f64)>,
}

/// Held-out AUC per fold for a model trained by `fit`, which returns a
/// scoring function.
pub fn cross_val_auc<F, S>(data: &Dataset, folds: &[usize], k: usize, fit: F) -> Result<Vec<f64>>
where
    F: Fn(&Dataset) -> Result<S> + Sync,
    S: Fn(&[f64]) -> f64,
{
    (0..k)
        .into_par_iter()
        .map(|f| {
            let train_idx: Vec<usize> = (0..data.len()).filter(|&i| folds[i] != f).collect();
            let test_idx: Vec<usize> = (0..data.len()).filter(|&i| folds[i] == f).collect();
            let scorer = fit(&data.subset(&train_idx))?;
            let scores: Vec<f64> = test_idx.iter().map(|&i| scorer(data.row(i))).collect();
            let labels: Vec<bool> = test_idx.iter().map(|&i| data.label(i)).collect();
            auc(&scores, &labels)
        })
        .collect()
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn cv_forest(data: &Dataset, params: &ForestParams, folds: &[usize], k: usize) -> Result<CvResult> {
    let fold_aucs = cross_val_auc(data, folds, k, |d| {
        let m = train_forest(d, params, None)?;
        Ok(move |x: &[f64]| m.predict_score(x))
    })?;
    Ok(CvResult {
        mean_auc: mean(&fold_aucs),
        fold_aucs,
        params: vec![("n_trees".into(), params.n_trees as f64), ("max_features".into(), params.max_features as f64)],
    })
}

pub fn cv_svm(data: &Dataset, params: &SvmParams, folds: &[usize], k: usize) -> Result<CvResult> {
    let fold_aucs = cross_val_auc(data, folds, k, |d| {
        let m = train_svm_rbf(d, params, None)?;
        Ok(move |x: &[f64]| m.predict_score(x))
    })?;
    Ok(CvResult {
        mean_auc: mean(&fold_aucs),
        fold_aucs,
        params: vec![("c".into(), params.c), ("gamma".into(), params.gamma)],
    })
}

pub fn cv_ensemble(data: &Dataset, params: &BoostParams, folds: &[usize], k: usize) -> Result<CvResult> {
    let fold_aucs = cross_val_auc(data, folds, k, |d| {
        let m = train_adaboost(d, params)?;
        Ok(move |x: &[f64]| m.predict_score(x))
    })?;
    Ok(CvResult { mean_auc: mean(&fold_aucs), fold_aucs, params: vec![("n_stages".into(), params.n_stages as f64)] })
}

/// Hyperparameter grids: powers of two.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub svm_c: Vec<f64>,
    pub svm_gamma: Vec<f64>,
    pub forest_trees: Vec<usize>,
    pub forest_features: Vec<usize>,
}

impl Default for GridSpec {
    fn default() -> Self {
        let pow2 = |lo: i32, hi: i32| (lo..=hi).map(|x| 2f64.powi(x)).collect::<Vec<f64>>();
        Self {
            svm_c: pow2(-2, 10),
            svm_gamma: pow2(-2, 10),
            forest_trees: (0..=10).map(|x| 1usize << x).collect(),
            forest_features: (1..=12).map(|y| 1usize << y).collect(),
        }
    }
}

impl GridSpec {
    pub fn svm_cells(&self) -> usize {
        self.svm_c.len() * self.svm_gamma.len()
    }

    pub fn forest_cells(&self) -> usize {
        self.forest_trees.len() * self.forest_features.len()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub svm: CvResult,
    pub forest: CvResult,
    /// Every evaluated cell, in grid order.
    pub svm_cells: Vec<CvResult>,
    pub forest_cells: Vec<CvResult>,
}

impl GridSearchResult {
    /// Ensemble parameters built from the best cell of each family.
    pub fn best_params(&self, base: &BoostParams) -> BoostParams {
        let get = |r: &CvResult, name: &str| r.params.iter().find(|(n, _)| n == name).map(|(_, v)| *v);
        let mut p = *base;
        p.svm.c = get(&self.svm, "c").unwrap_or(p.svm.c);
        p.svm.gamma = get(&self.svm, "gamma").unwrap_or(p.svm.gamma);
        p.forest.n_trees = get(&self.forest, "n_trees").map_or(p.forest.n_trees, |v| v as usize);
        p.forest.max_features = get(&self.forest, "max_features").map_or(p.forest.max_features, |v| v as usize);
        p
    }
}

/// First cell with the highest mean AUC.
fn best_of(cells: &[CvResult]) -> CvResult {
    cells
        .iter()
        .fold(None::<&CvResult>, |best, c| match best {
            Some(b) if b.mean_auc >= c.mean_auc => Some(b),
            _ => Some(c),
        })
        .expect("non-empty grid")
        .clone()
}

/// Exhaustive grid search for both families on shared stratified folds.
pub fn grid_search(
    grid: &GridSpec,
    data: &Dataset,
    folds: usize,
    base: &BoostParams,
    seed: u64,
) -> Result<GridSearchResult> {
    if grid.svm_cells() == 0 || grid.forest_cells() == 0 {
        return Err(Error::Config("empty hyperparameter grid".into()));
    }
    let k = effective_folds(data, folds)?;
    let fold_ids = stratified_folds(data.labels(), k, seed);

    let svm_grid: Vec<(f64, f64)> =
        grid.svm_c.iter().flat_map(|&c| grid.svm_gamma.iter().map(move |&g| (c, g))).collect();
    let svm_cells = svm_grid
        .par_iter()
        .map(|&(c, gamma)| cv_svm(data, &SvmParams { c, gamma, ..base.svm }, &fold_ids, k))
        .collect::<Result<Vec<_>>>()?;

    let forest_grid: Vec<(usize, usize)> =
        grid.forest_trees.iter().flat_map(|&n| grid.forest_features.iter().map(move |&f| (n, f))).collect();
    let forest_cells = forest_grid
        .par_iter()
        .map(|&(n_trees, max_features)| {
            let p = ForestParams { n_trees, max_features, ..base.forest };
            cv_forest(data, &p, &fold_ids, k)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(GridSearchResult { svm: best_of(&svm_cells), forest: best_of(&forest_cells), svm_cells, forest_cells })
}

#[cfg(test)]
mod tests {
    use rand::Rng;

    use super::*;

    fn blobs(n: usize, spread: f64, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut d = Dataset::new(2);
        for i in 0..n {
            let pos = i % 3 == 0;
            let c = if pos { 0.7 } else { 0.3 };
            d.push(&[c + rng.random_range(-spread..spread), rng.random_range(0.0..1.0)], pos).unwrap();
        }
        d
    }

    #[test]
    fn default_grid_sizes() {
        let g = GridSpec::default();
        assert_eq!(g.svm_cells(), 169);
        assert_eq!(g.forest_cells(), 132);
        assert_eq!(g.svm_c[0], 0.25);
        assert_eq!(g.svm_c[12], 1024.0);
        assert_eq!(g.forest_trees[10], 1024);
        assert_eq!(g.forest_features, vec![2, 4, 8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096]);
    }

    #[test]
    fn folds_partition_and_stratify() {
        let labels: Vec<bool> = (0..103).map(|i| i % 4 == 0).collect();
        let f = stratified_folds(&labels, 10, 1);
        for fold in 0..10 {
            let pos = (0..103).filter(|&i| f[i] == fold && labels[i]).count();
            let neg = (0..103).filter(|&i| f[i] == fold && !labels[i]).count();
            assert!((2..=3).contains(&pos), "fold {fold}: {pos} positives");
            assert!((7..=8).contains(&neg), "fold {fold}: {neg} negatives");
        }
        assert_eq!(stratified_folds(&labels, 10, 1), f);
    }

    #[test]
    fn mean_is_mean_of_folds() {
        let d = blobs(90, 0.25, 3);
        let folds = stratified_folds(d.labels(), 10, 0);
        let r = cv_forest(&d, &ForestParams { n_trees: 16, ..Default::default() }, &folds, 10).unwrap();
        assert_eq!(r.fold_aucs.len(), 10);
        let m: f64 = r.fold_aucs.iter().sum::<f64>() / 10.0;
        assert!((m - r.mean_auc).abs() < 1e-15);
        assert!(r.fold_aucs.iter().all(|a| (0.0..=1.0).contains(a)));
    }

    #[test]
    fn grid_search_prefers_dominant_cell() {
        // XOR quadrants: no linear ranking separates them.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut d = Dataset::new(2);
        for _ in 0..120 {
            let (a, b): (f64, f64) = (rng.random_range(0.0..1.0), rng.random_range(0.0..1.0));
            d.push(&[a, b], (a > 0.5) == (b > 0.5)).unwrap();
        }
        let grid = GridSpec {
            svm_c: vec![4.0],
            // A vanishing gamma leaves an almost linear decision function.
            svm_gamma: vec![1e-6, 8.0],
            forest_trees: vec![1, 32],
            forest_features: vec![2],
        };
        let base = BoostParams::default();
        let r = grid_search(&grid, &d, 10, &base, 7).unwrap();
        assert_eq!(r.svm.params[1].1, 8.0);
        assert_eq!(r.svm_cells.len(), 2);
        assert_eq!(r.forest_cells.len(), 2);
        let best = r.best_params(&base);
        assert_eq!(best.svm.gamma, 8.0);
    }

    #[test]
    fn folds_reduced_for_small_minority() {
        let d = blobs(12, 0.1, 1);
        assert_eq!(effective_folds(&d, 10).unwrap(), 4);
    }
}

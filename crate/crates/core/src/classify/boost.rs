// SPDX-License-Identifier: Apache-2.0

//! Two-stage heterogeneous AdaBoost (SAMME weighting): a random forest on
//! uniform weights, then an RBF-SVM on the reweighted data.

use serde::{Deserialize, Serialize};

use super::forest::{train_forest, ForestModel, ForestParams};
use super::svm::{train_svm_rbf, SvmModel, SvmParams};
use super::{logistic, Dataset};
use crate::error::{Error, Result};

const ERR_CLAMP: f64 = 1e-10;
/// Stage probabilities are clamped to `[P_CLAMP, 1 - P_CLAMP]` before
/// taking log-odds.
const P_CLAMP: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoostParams {
    pub forest: ForestParams,
    pub svm: SvmParams,
    /// Stages alternate forest, SVM, forest, ...
    pub n_stages: usize,
}

impl Default for BoostParams {
    fn default() -> Self {
        Self { forest: ForestParams::default(), svm: SvmParams::default(), n_stages: 2 }
    }
}

impl BoostParams {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.forest.seed = seed;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BaseModel {
    Forest(ForestModel),
    Svm(SvmModel),
}

impl BaseModel {
    pub fn predict_score(&self, x: &[f64]) -> f64 {
        match self {
            BaseModel::Forest(m) => m.predict_score(x),
            BaseModel::Svm(m) => m.predict_score(x),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            BaseModel::Forest(_) => "forest",
            BaseModel::Svm(_) => "svm",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    pub model: BaseModel,
    /// `ln((1 - err) / err)`, or 0 for a stage no better than chance.
    pub weight: f64,
    /// Weighted training error of the stage.
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub params: BoostParams,
    pub stages: Vec<Stage>,
}

fn logit(p: f64) -> f64 {
    let p = p.clamp(P_CLAMP, 1.0 - P_CLAMP);
    (p / (1.0 - p)).ln()
}

impl EnsembleModel {
    /// Logistic of the stage-weighted mean log-odds vote. Two identical
    /// stages reproduce the base score.
    pub fn predict_score(&self, x: &[f64]) -> f64 {
        let total: f64 = self.stages.iter().map(|s| s.weight).sum();
        if total <= 0.0 {
            return self.stages.first().map_or(0.0, |s| s.model.predict_score(x));
        }
        let vote: f64 =
            self.stages.iter().filter(|s| s.weight > 0.0).map(|s| s.weight * logit(s.model.predict_score(x))).sum();
        logistic(vote / total)
    }

    /// Ensemble formed from the first `n` stages only.
    pub fn truncated(&self, n: usize) -> Self {
        Self { params: self.params, stages: self.stages[..n.min(self.stages.len())].to_vec() }
    }
}

/// Boosts `params.n_stages` base models over `data`.
pub fn train_adaboost(data: &Dataset, params: &BoostParams) -> Result<EnsembleModel> {
    data.require_both_classes()?;
    if params.n_stages == 0 {
        return Err(Error::Config("ensemble needs at least one stage".into()));
    }
    let n = data.len();
    let mut weights = vec![1.0 / n as f64; n];
    let mut stages = Vec::with_capacity(params.n_stages);

    for s in 0..params.n_stages {
        let uniform = weights.iter().all(|&w| w == weights[0]);
        let model = if s % 2 == 0 {
            let mut fp = params.forest;
            fp.seed = params.forest.seed.wrapping_add(s as u64);
            BaseModel::Forest(train_forest(data, &fp, (!uniform).then_some(&weights[..]))?)
        } else {
            BaseModel::Svm(train_svm_rbf(data, &params.svm, (!uniform).then_some(&weights[..]))?)
        };
        let wrong: Vec<bool> = (0..n).map(|i| (model.predict_score(data.row(i)) >= 0.5) != data.label(i)).collect();
        let err_raw: f64 =
            weights.iter().zip(&wrong).filter(|(_, &w)| w).map(|(x, _)| x).sum::<f64>() / weights.iter().sum::<f64>();
        let err = err_raw.clamp(ERR_CLAMP, 1.0 - ERR_CLAMP);
        if err >= 0.5 {
            log::warn!("boosting stage {s} ({}) has error {err:.4} >= 0.5; skipped", model.kind());
            stages.push(Stage { model, weight: 0.0, error: err_raw });
            continue;
        }
        let weight = ((1.0 - err) / err).ln();
        let boost = weight.exp();
        for (w, &bad) in weights.iter_mut().zip(&wrong) {
            if bad {
                *w *= boost;
            }
        }
        let total: f64 = weights.iter().sum();
        weights.iter_mut().for_each(|w| *w /= total);
        stages.push(Stage { model, weight, error: err_raw });
    }
    Ok(EnsembleModel { params: *params, stages })
}

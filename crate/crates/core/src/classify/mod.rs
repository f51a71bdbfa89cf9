// SPDX-License-Identifier: Apache-2.0

//! Bursty-token classification: random forest, RBF-SVM, their boosted
//! ensemble, cross-validation and training-set construction.

pub mod boost;
pub mod cv;
mod dataset;
pub mod forest;
pub mod svm;
pub mod training;

pub use boost::{train_adaboost, BaseModel, BoostParams, EnsembleModel, Stage};
pub use cv::{grid_search, CvResult, GridSearchResult, GridSpec};
pub use dataset::Dataset;
pub use forest::{train_forest, ForestModel, ForestParams};
pub use svm::{train_svm_rbf, SvmModel, SvmParams};
pub use training::{
    build_training_set, self_train, LabeledExample, ModelFile, Provenance, StopWords, TrainingConfig, TrainingSet,
    TrainingStream, MODEL_SCHEMA_VERSION,
};

pub fn logistic(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Any trained model that maps a feature row to a bursty probability.
pub trait Scorer: Send + Sync {
    fn predict_score(&self, x: &[f64]) -> f64;
}

impl Scorer for ForestModel {
    fn predict_score(&self, x: &[f64]) -> f64 {
        ForestModel::predict_score(self, x)
    }
}

impl Scorer for SvmModel {
    fn predict_score(&self, x: &[f64]) -> f64 {
        SvmModel::predict_score(self, x)
    }
}

impl Scorer for EnsembleModel {
    fn predict_score(&self, x: &[f64]) -> f64 {
        EnsembleModel::predict_score(self, x)
    }
}

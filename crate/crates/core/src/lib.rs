// SPDX-License-Identifier: Apache-2.0

//! Key-moment discovery in timestamped message streams.
//!
//! The pipeline cuts a stream into slices, aggregates overlapping windows,
//! computes per-token temporal features, classifies tokens as bursty with a
//! boosted forest + RBF-SVM ensemble and flags a window when enough tokens
//! burst together. Two volume-differencing baselines and a ROC/AUC
//! evaluator are included for comparison.

pub mod baselines;
pub mod classify;
pub mod detect;
pub mod error;
pub mod eval;
pub mod features;
pub mod ingest;
pub mod synth;
pub mod windowing;

pub use baselines::{collapse_runs, AverageMode, BaselineMethod, DeltaSeries, SeedLexicon};
pub use classify::{BoostParams, Dataset, EnsembleModel, ModelFile, StopWords, TrainingConfig, TrainingSet};
pub use detect::{BurstySet, MomentDetection, SeriesEntry};
pub use error::{Error, Result};
pub use eval::{EvaluationReport, ExpandedTruth, GroundTruth, Method, RocCurve, ScorePoint};
pub use features::{CandidateSet, FeatureConfig, FeatureFamily, NormalizedFeatureVector, RawFeatureVector};
pub use ingest::Message;
pub use synth::{BurstSpec, SynthConfig};
pub use windowing::{History, StreamConfig, WindowStats, Windower};

// SPDX-License-Identifier: Apache-2.0

//! Labelled training data, self-training and the model file.
//!
//! Positives are seed tokens observed within `[t, t + tau]` of a known
//! moment `t`. Negatives are stop words (English and Spanish lists shipped
//! in `data/`) sampled from windows drawn uniformly over the stream.

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use super::boost::{train_adaboost, BoostParams, EnsembleModel};
use super::Dataset;
use crate::error::{Error, Result};
use crate::eval::GroundTruth;
use crate::features::{
    feature_csv_header, scan_windows, FeatureConfig, NormalizedFeatureVector, RawFeatureVector, FEATURE_COUNT,
};
use crate::ingest::Message;
use crate::windowing::StreamConfig;

const STOPWORDS_EN: &str = include_str!("../../data/stopwords_en.txt");
const STOPWORDS_ES: &str = include_str!("../../data/stopwords_es.txt");

/// Stop-word set used for negative samples.
#[derive(Debug, Clone, Default)]
pub struct StopWords {
    words: FxHashSet<String>,
}

impl StopWords {
    /// Parses one word per line; `#` starts a comment line.
    pub fn parse(text: &str) -> Self {
        Self { words: parse_word_list(text).into_iter().collect() }
    }

    pub fn english() -> Self {
        Self::parse(STOPWORDS_EN)
    }

    pub fn spanish() -> Self {
        Self::parse(STOPWORDS_ES)
    }

    /// Union of the shipped English and Spanish lists.
    pub fn english_spanish() -> Self {
        let mut s = Self::english();
        s.words.extend(Self::spanish().words);
        s
    }

    pub fn contains(&self, w: &str) -> bool {
        self.words.contains(w)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Words in a stable order.
    pub fn sorted(&self) -> Vec<&str> {
        let mut v: Vec<&str> = self.words.iter().map(String::as_str).collect();
        v.sort_unstable();
        v
    }
}

/// Shipped word lists in file order, English then Spanish, without
/// duplicates.
pub fn shipped_stopwords_ordered() -> Vec<String> {
    let mut seen = FxHashSet::default();
    parse_word_list(STOPWORDS_EN)
        .into_iter()
        .chain(parse_word_list(STOPWORDS_ES))
        .filter(|w| seen.insert(w.clone()))
        .collect()
}

fn parse_word_list(text: &str) -> Vec<String> {
    text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')).map(str::to_string).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Seed,
    Stopword,
    SelfTrain,
}

impl Provenance {
    fn as_str(self) -> &'static str {
        match self {
            Provenance::Seed => "seed",
            Provenance::Stopword => "stopword",
            Provenance::SelfTrain => "self_train",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        match s {
            "seed" => Some(Provenance::Seed),
            "stopword" => Some(Provenance::Stopword),
            "self_train" => Some(Provenance::SelfTrain),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub token: String,
    pub end_time: i64,
    pub raw: RawFeatureVector,
    pub features: NormalizedFeatureVector,
    /// `true` = bursty.
    pub label: bool,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub stream: StreamConfig,
    pub features: FeatureConfig,
    pub tau: i64,
    /// Windows sampled per stream for stop-word negatives.
    pub negative_windows: usize,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        let stream = StreamConfig::default();
        Self { stream, features: FeatureConfig::for_stream(&stream), tau: 2, negative_windows: 100, seed: 0 }
    }
}

/// A stream with its known key moments.
#[derive(Debug, Clone, Copy)]
pub struct TrainingStream<'a> {
    pub messages: &'a [Message],
    pub truth: &'a GroundTruth,
}

#[derive(Debug, Clone, Default)]
pub struct TrainingSet {
    pub examples: Vec<LabeledExample>,
}

impl TrainingSet {
    pub fn positives(&self) -> usize {
        self.examples.iter().filter(|e| e.label).count()
    }

    pub fn negatives(&self) -> usize {
        self.examples.len() - self.positives()
    }

    pub fn dataset(&self) -> Dataset {
        let mut d = Dataset::new(FEATURE_COUNT);
        for e in &self.examples {
            d.push(&e.features.0, e.label).expect("fixed width");
        }
        d
    }

    /// Feature-dump columns plus `label` and `provenance`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let wrap = |e: csv::Error| Error::InvalidInput(e.to_string());
        let mut header = feature_csv_header();
        header.push("label".into());
        header.push("provenance".into());
        w.write_record(&header).map_err(wrap)?;
        for e in &self.examples {
            let mut row = vec![e.end_time.to_string(), e.token.clone()];
            row.extend(e.raw.to_array().iter().map(|v| v.to_string()));
            row.extend(e.features.0.iter().map(|v| v.to_string()));
            row.push(u8::from(e.label).to_string());
            row.push(e.provenance.as_str().to_string());
            w.write_record(&row).map_err(wrap)?;
        }
        w.flush().map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let bad = |row: usize, what: &str| Error::InvalidInput(format!("training set row {row}: {what}"));
        let mut examples = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let row = i + 1;
            let rec = rec.map_err(|e| bad(row, &e.to_string()))?;
            if rec.len() != 2 + 2 * FEATURE_COUNT + 2 {
                return Err(bad(row, "wrong column count"));
            }
            let num = |j: usize| -> Result<f64> { rec[j].parse::<f64>().map_err(|_| bad(row, "bad number")) };
            let mut raw = [0.0; FEATURE_COUNT];
            let mut norm = [0.0; FEATURE_COUNT];
            for j in 0..FEATURE_COUNT {
                raw[j] = num(2 + j)?;
                norm[j] = num(2 + FEATURE_COUNT + j)?;
            }
            let label = match &rec[2 + 2 * FEATURE_COUNT] {
                "1" => true,
                "0" => false,
                _ => return Err(bad(row, "label must be 0 or 1")),
            };
            let provenance =
                Provenance::parse(&rec[3 + 2 * FEATURE_COUNT]).ok_or_else(|| bad(row, "unknown provenance"))?;
            examples.push(LabeledExample {
                token: rec[1].to_string(),
                end_time: rec[0].parse().map_err(|_| bad(row, "bad window"))?,
                raw: RawFeatureVector::from_array(raw),
                features: NormalizedFeatureVector(norm),
                label,
                provenance,
            });
        }
        Ok(Self { examples })
    }
}

/// Window end times eligible for features (history of at least two windows).
fn warm_window_range(messages: &[Message], stream: &StreamConfig) -> Option<(i64, i64)> {
    let first = messages.first()?.timestamp;
    let last = messages.last()?.timestamp;
    let t0 = stream.resolve_t0(first);
    let last_slice = (last - t0).div_euclid(stream.delta);
    let first_warm = stream.slices_per_window() as i64;
    (last_slice >= first_warm).then_some((first_warm, last_slice))
}

/// Labels seed-token positives around known moments and stop-word negatives
/// at uniformly sampled windows.
pub fn build_training_set(
    streams: &[TrainingStream<'_>],
    seeds: &[String],
    stopwords: &StopWords,
    cfg: &TrainingConfig,
) -> Result<TrainingSet> {
    let seed_set: FxHashSet<&str> = seeds.iter().map(String::as_str).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut examples = Vec::new();

    for stream in streams {
        let Some(first) = stream.messages.first() else {
            continue;
        };
        let t0 = cfg.stream.resolve_t0(first.timestamp);
        let moments = stream.truth.slices(t0, cfg.stream.delta);
        let positive_windows: BTreeSet<i64> = moments.iter().flat_map(|&m| m..=m + cfg.tau).collect();
        let negative_windows: BTreeSet<i64> = match warm_window_range(stream.messages, &cfg.stream) {
            Some((lo, hi)) => {
                let n = (hi - lo + 1) as usize;
                rand::seq::index::sample(&mut rng, n, cfg.negative_windows.min(n))
                    .into_iter()
                    .map(|i| lo + i as i64)
                    .collect()
            }
            None => BTreeSet::new(),
        };

        let stream_cfg = StreamConfig { t0: Some(t0), ..cfg.stream };
        scan_windows(stream.messages, stream_cfg, &cfg.features, |_, cands, normalized| {
            let t = cands.end_time;
            let want_pos = positive_windows.contains(&t);
            let want_neg = negative_windows.contains(&t);
            if !(want_pos || want_neg) {
                return Ok(());
            }
            for ((tok, raw), norm) in cands.tokens.iter().zip(normalized) {
                let (label, provenance) = if want_pos && seed_set.contains(&**tok) {
                    (true, Provenance::Seed)
                } else if want_neg && stopwords.contains(tok) {
                    (false, Provenance::Stopword)
                } else {
                    continue;
                };
                examples.push(LabeledExample {
                    token: tok.to_string(),
                    end_time: t,
                    raw: *raw,
                    features: *norm,
                    label,
                    provenance,
                });
            }
            Ok(())
        })?;
    }

    let set = TrainingSet { examples };
    if set.positives() == 0 {
        return Err(Error::Training(
            "no positive examples: no seed token passed the candidate filter near a moment".into(),
        ));
    }
    log::info!("training set: {} positive, {} negative", set.positives(), set.negatives());
    Ok(set)
}

/// A scored but unlabelled token.
#[derive(Debug, Clone, PartialEq)]
pub struct Unlabeled {
    pub token: String,
    pub end_time: i64,
    pub raw: RawFeatureVector,
    pub features: NormalizedFeatureVector,
}

/// Every candidate of every warm window.
pub fn collect_unlabeled(
    messages: &[Message],
    stream: StreamConfig,
    features: &FeatureConfig,
) -> Result<Vec<Unlabeled>> {
    let mut out = Vec::new();
    scan_windows(messages, stream, features, |_, cands, normalized| {
        for ((tok, raw), norm) in cands.tokens.iter().zip(normalized) {
            out.push(Unlabeled { token: tok.to_string(), end_time: cands.end_time, raw: *raw, features: *norm });
        }
        Ok(())
    })?;
    Ok(out)
}

/// One round of self-training: unlabelled vectors scoring at least `theta`
/// become positives and the ensemble is retrained once. Returns the model
/// unchanged when nothing qualifies.
pub fn self_train(
    model: &EnsembleModel,
    examples: &[LabeledExample],
    unlabeled: &[Unlabeled],
    theta: f64,
    params: &BoostParams,
) -> Result<(Vec<LabeledExample>, EnsembleModel)> {
    let labelled: FxHashSet<(&str, i64)> = examples.iter().map(|e| (e.token.as_str(), e.end_time)).collect();
    let added: Vec<LabeledExample> = unlabeled
        .iter()
        .filter(|u| !labelled.contains(&(u.token.as_str(), u.end_time)))
        .filter(|u| model.predict_score(&u.features.0) >= theta)
        .map(|u| LabeledExample {
            token: u.token.clone(),
            end_time: u.end_time,
            raw: u.raw,
            features: u.features,
            label: true,
            provenance: Provenance::SelfTrain,
        })
        .collect();
    if added.is_empty() {
        return Ok((examples.to_vec(), model.clone()));
    }
    log::info!("self-training added {} positives", added.len());
    let mut expanded = examples.to_vec();
    expanded.extend(added);
    let retrained = train_adaboost(&TrainingSet { examples: expanded.clone() }.dataset(), params)?;
    Ok((expanded, retrained))
}

pub const MODEL_SCHEMA_VERSION: u32 = 1;

/// Serialized trained detector: the ensemble plus the window and feature
/// settings it was trained under.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema_version: u32,
    pub stream: StreamConfig,
    pub features: FeatureConfig,
    /// Feature columns the ensemble consumes, in order.
    pub columns: Vec<usize>,
    pub ensemble: EnsembleModel,
}

impl ModelFile {
    pub fn new(stream: StreamConfig, features: FeatureConfig, columns: Vec<usize>, ensemble: EnsembleModel) -> Self {
        Self {
            schema_version: MODEL_SCHEMA_VERSION,
            stream: StreamConfig { t0: None, ..stream },
            features,
            columns,
            ensemble,
        }
    }

    /// Scores a full normalized vector, selecting the model's columns.
    pub fn predict_score(&self, v: &NormalizedFeatureVector) -> f64 {
        if self.columns.len() == FEATURE_COUNT && self.columns.iter().enumerate().all(|(i, &c)| i == c) {
            return self.ensemble.predict_score(&v.0);
        }
        let x: Vec<f64> = self.columns.iter().map(|&c| v.0[c]).collect();
        self.ensemble.predict_score(&x)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let m: Self = serde_json::from_str(s).map_err(|e| Error::Model(e.to_string()))?;
        if m.schema_version != MODEL_SCHEMA_VERSION {
            return Err(Error::Model(format!(
                "schema version {} unsupported (expected {MODEL_SCHEMA_VERSION})",
                m.schema_version
            )));
        }
        if m.columns.iter().any(|&c| c >= FEATURE_COUNT) {
            return Err(Error::Model("feature column out of range".into()));
        }
        Ok(m)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let s = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&s)
    }
}

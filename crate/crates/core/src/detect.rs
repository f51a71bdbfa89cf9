// SPDX-License-Identifier: Apache-2.0

//! Window classification: score every candidate token, keep the bursty ones
//! and flag the window when at least `rho` tokens burst together.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::classify::ModelFile;
use crate::error::{Error, Result};
use crate::eval::ScorePoint;
use crate::features::{extract, normalize, scan_windows, FeatureConfig, NormalizedFeatureVector, RawFeatureVector};
use crate::ingest::Message;
use crate::windowing::{History, StreamConfig, Token};

/// Minimum ensemble score for a token to count as bursty.
pub const CLASSIFICATION_CUTOFF: f64 = 0.5;

/// Bursty tokens of one window with their scores, sorted by token.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct BurstySet {
    /// Slice index of the newest slice in the window.
    pub t: i64,
    pub tokens: Vec<(String, f64)>,
    /// Candidates scored in this window.
    pub candidates: usize,
    /// History too short for features; the set is empty.
    pub warm_up: bool,
}

impl BurstySet {
    pub fn count(&self) -> usize {
        self.tokens.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentDetection {
    pub t: i64,
    pub detected: bool,
    pub rho: usize,
    /// Descriptive tokens; empty unless detected.
    pub tokens: Vec<String>,
}

/// Scores the candidates of the newest window in `history`.
pub fn classify_window(model: &ModelFile, history: &History, cfg: &FeatureConfig) -> Result<BurstySet> {
    let cands = extract(history, cfg)?;
    let t = cands.end_time;
    if history.len() < 2 {
        return Ok(BurstySet { t, warm_up: true, ..Default::default() });
    }
    let normalized = normalize(&cands);
    Ok(bursty_from(model, t, &cands.tokens, &normalized))
}

fn bursty_from(
    model: &ModelFile,
    t: i64,
    tokens: &[(Token, RawFeatureVector)],
    normalized: &[NormalizedFeatureVector],
) -> BurstySet {
    let bursty = tokens
        .iter()
        .zip(normalized)
        .filter_map(|((tok, _), v)| {
            let s = model.predict_score(v);
            (s >= CLASSIFICATION_CUTOFF).then(|| (tok.to_string(), s))
        })
        .collect();
    BurstySet { t, tokens: bursty, candidates: tokens.len(), warm_up: false }
}

/// Applies the moment threshold to a bursty set.
pub fn indicate(bursty: &BurstySet, rho: usize) -> Result<MomentDetection> {
    if rho < 1 {
        return Err(Error::Config("rho must be >= 1".into()));
    }
    let detected = bursty.count() >= rho;
    Ok(MomentDetection {
        t: bursty.t,
        detected,
        rho,
        tokens: if detected { bursty.tokens.iter().map(|(tok, _)| tok.clone()).collect() } else { Vec::new() },
    })
}

/// One window of a detection run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesEntry {
    pub t: i64,
    /// Epoch seconds of the start of slice `t`.
    pub time: i64,
    pub bursty: BurstySet,
}

impl SeriesEntry {
    pub fn score_point(&self) -> ScorePoint {
        ScorePoint { t: self.t, time: self.time, score: self.bursty.count() as f64, warm_up: self.bursty.warm_up }
    }
}

/// Classifies every window of `messages` in one pass with the model's own
/// window and feature settings. `t0`, when given, overrides the epoch.
pub fn score_series(model: &ModelFile, messages: &[Message], t0: Option<i64>) -> Result<Vec<SeriesEntry>> {
    let Some(first) = messages.first() else {
        return Ok(Vec::new());
    };
    let stream =
        StreamConfig { t0: Some(t0.unwrap_or_else(|| model.stream.resolve_t0(first.timestamp))), ..model.stream };
    let origin = stream.t0.expect("epoch set");
    let mut out = Vec::new();
    scan_windows(messages, stream, &model.features, |history, cands, normalized| {
        let t = cands.end_time;
        let bursty = if history.len() < 2 {
            BurstySet { t, warm_up: true, ..Default::default() }
        } else {
            bursty_from(model, t, &cands.tokens, normalized)
        };
        out.push(SeriesEntry { t, time: origin + t * stream.delta, bursty });
        Ok(())
    })?;
    Ok(out)
}

/// One line of the detection log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogRecord {
    pub t: i64,
    pub time: i64,
    pub count: usize,
    pub detected: bool,
    pub rho: usize,
    pub tokens: Vec<String>,
    #[serde(default)]
    pub warm_up: bool,
}

/// Writes one JSON line per window at threshold `rho`.
pub fn write_detection_log<W: Write>(series: &[SeriesEntry], rho: usize, mut out: W) -> Result<()> {
    for e in series {
        let d = indicate(&e.bursty, rho)?;
        let rec = LogRecord {
            t: e.t,
            time: e.time,
            count: e.bursty.count(),
            detected: d.detected,
            rho,
            tokens: d.tokens,
            warm_up: e.bursty.warm_up,
        };
        let line = serde_json::to_string(&rec).expect("record serializes");
        writeln!(out, "{line}").map_err(|e| Error::InvalidInput(e.to_string()))?;
    }
    Ok(())
}

/// Reads a detection log back as a score series (score = bursty count).
pub fn read_detection_log<R: BufRead>(reader: R) -> Result<Vec<ScorePoint>> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::InvalidInput(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: LogRecord = serde_json::from_str(&line)
            .map_err(|e| Error::InvalidInput(format!("detection log line {}: {e}", i + 1)))?;
        out.push(ScorePoint { t: rec.t, time: rec.time, score: rec.count as f64, warm_up: rec.warm_up });
    }
    Ok(out)
}

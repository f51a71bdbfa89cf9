// SPDX-License-Identifier: Apache-2.0

//! Ground truth, τ-relaxation, confusion counts and ROC/AUC scoring.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::baselines::{delta_series, AverageMode, BaselineMethod, SeedLexicon, SliceCounts};
use crate::classify::cv::{cv_ensemble, effective_folds, stratified_folds};
use crate::classify::{BoostParams, Dataset, ModelFile};
use crate::detect::{score_series, SeriesEntry};
use crate::error::{Error, Result};
use crate::features::FeatureFamily;
use crate::ingest::Message;
use crate::windowing::StreamConfig;

/// One labelled key moment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Moment {
    pub event: String,
    /// Epoch seconds of the slice the moment falls in.
    pub time: i64,
    pub label: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub moments: Vec<Moment>,
}

impl GroundTruth {
    /// Reads `event_name,time,label` rows. `time` is epoch seconds or an
    /// RFC 3339 timestamp.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr =
            csv::ReaderBuilder::new().has_headers(true).flexible(true).trim(csv::Trim::All).from_reader(reader);
        let mut moments = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::InvalidInput(format!("ground truth row {}: {e}", i + 1)))?;
            let field = |j: usize| rec.get(j).unwrap_or("").to_string();
            let raw_time = field(1);
            let time = parse_time(&raw_time)
                .ok_or_else(|| Error::InvalidInput(format!("ground truth row {}: bad time {raw_time:?}", i + 1)))?;
            moments.push(Moment { event: field(0), time, label: field(2) });
        }
        Ok(Self { moments })
    }

    pub fn read_csv_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let f = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(f)
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let wrap = |e: csv::Error| Error::InvalidInput(e.to_string());
        w.write_record(["event_name", "time", "label"]).map_err(wrap)?;
        for m in &self.moments {
            w.write_record([m.event.as_str(), &m.time.to_string(), m.label.as_str()]).map_err(wrap)?;
        }
        w.flush().map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(())
    }

    /// Slice indices of the moments for a stream with epoch `t0`.
    pub fn slices(&self, t0: i64, delta: i64) -> BTreeSet<i64> {
        self.moments.iter().filter(|m| m.time >= t0).map(|m| (m.time - t0).div_euclid(delta)).collect()
    }
}

fn parse_time(s: &str) -> Option<i64> {
    s.parse::<i64>().ok().or_else(|| chrono::DateTime::parse_from_rfc3339(s).ok().map(|d| d.timestamp()))
}

/// E′: every moment slice plus the τ slices after it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpandedTruth {
    pub slices: BTreeSet<i64>,
    pub tau: i64,
}

impl ExpandedTruth {
    pub fn contains(&self, t: i64) -> bool {
        self.slices.contains(&t)
    }
}

/// `∪_{t∈E} {t..=t+τ}`, clipped to the inclusive `span` when given.
pub fn expand_truth(moments: &BTreeSet<i64>, tau: i64, span: Option<(i64, i64)>) -> ExpandedTruth {
    let tau = tau.max(0);
    let slices = moments
        .iter()
        .flat_map(|&t| t..=t + tau)
        .filter(|t| span.is_none_or(|(lo, hi)| (lo..=hi).contains(t)))
        .collect();
    ExpandedTruth { slices, tau }
}

/// One scored window of a detector's output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScorePoint {
    /// Slice index.
    pub t: i64,
    /// Epoch seconds of the slice start.
    pub time: i64,
    pub score: f64,
    /// Warm-up points carry no valid score and are excluded from evaluation.
    pub warm_up: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionCounts {
    pub tp: u64,
    pub fp: u64,
    pub tn: u64,
    pub fn_: u64,
}

impl ConfusionCounts {
    pub fn total(&self) -> u64 {
        self.tp + self.fp + self.tn + self.fn_
    }

    pub fn tpr(&self) -> f64 {
        ratio(self.tp, self.tp + self.fn_)
    }

    pub fn fpr(&self) -> f64 {
        ratio(self.fp, self.fp + self.tn)
    }
}

fn ratio(a: u64, b: u64) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

/// Tallies `score >= threshold` against membership in E′ for every
/// non-warm-up point.
pub fn confusion(series: &[ScorePoint], truth: &ExpandedTruth, threshold: f64) -> ConfusionCounts {
    let mut c = ConfusionCounts::default();
    for p in series.iter().filter(|p| !p.warm_up) {
        match (p.score >= threshold, truth.contains(p.t)) {
            (true, true) => c.tp += 1,
            (true, false) => c.fp += 1,
            (false, false) => c.tn += 1,
            (false, true) => c.fn_ += 1,
        }
    }
    c
}

/// `(score, is_positive)` pairs for the scored points of a series.
pub fn label_series(series: &[ScorePoint], truth: &ExpandedTruth) -> Vec<(f64, bool)> {
    series.iter().filter(|p| !p.warm_up).map(|p| (p.score, truth.contains(p.t))).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    /// Ordered by threshold descending, from `+inf` to `-inf`.
    pub points: Vec<RocPoint>,
    pub auc: f64,
    pub positives: u64,
    pub negatives: u64,
}

/// Operating point maximizing `tpr - fpr`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub threshold: f64,
    pub tpr: f64,
    pub fpr: f64,
}

impl RocCurve {
    pub fn youden(&self) -> OperatingPoint {
        let best = self
            .points
            .iter()
            .filter(|p| p.threshold.is_finite())
            .fold(None::<&RocPoint>, |best, p| match best {
                Some(b) if b.tpr - b.fpr >= p.tpr - p.fpr => Some(b),
                _ => Some(p),
            })
            .unwrap_or(&self.points[0]);
        OperatingPoint { threshold: best.threshold, tpr: best.tpr, fpr: best.fpr }
    }

    /// `threshold,fpr,tpr` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let wrap = |e: csv::Error| Error::InvalidInput(e.to_string());
        w.write_record(["threshold", "fpr", "tpr"]).map_err(wrap)?;
        for p in &self.points {
            w.write_record([p.threshold.to_string(), p.fpr.to_string(), p.tpr.to_string()]).map_err(wrap)?;
        }
        w.flush().map_err(|e| Error::InvalidInput(e.to_string()))?;
        Ok(())
    }
}

/// ROC over every distinct score as a threshold, with `±inf` sentinels;
/// AUC by the trapezoidal rule. Equal scores form one threshold step.
pub fn roc(scored: &[(f64, bool)]) -> Result<RocCurve> {
    let positives = scored.iter().filter(|(_, y)| *y).count() as u64;
    let negatives = scored.len() as u64 - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::Evaluation(format!(
            "ROC needs both classes (positives={positives}, negatives={negatives})"
        )));
    }
    if scored.iter().any(|(s, _)| s.is_nan()) {
        return Err(Error::Evaluation("NaN score".into()));
    }
    let mut sorted: Vec<(f64, bool)> = scored.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));

    let p = positives as f64;
    let n = negatives as f64;
    let mut points = vec![RocPoint { threshold: f64::INFINITY, fpr: 0.0, tpr: 0.0 }];
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut i = 0;
    while i < sorted.len() {
        let s = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == s {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        points.push(RocPoint { threshold: s, fpr: fp as f64 / n, tpr: tp as f64 / p });
    }
    points.push(RocPoint { threshold: f64::NEG_INFINITY, fpr: 1.0, tpr: 1.0 });

    let auc =
        points.windows(2).map(|w| (w[1].fpr - w[0].fpr) * (w[1].tpr + w[0].tpr) / 2.0).sum::<f64>().clamp(0.0, 1.0);
    Ok(RocCurve { points, auc, positives, negatives })
}

/// AUC of scores against boolean labels.
pub fn auc(scores: &[f64], labels: &[bool]) -> Result<f64> {
    let pairs: Vec<(f64, bool)> = scores.iter().copied().zip(labels.iter().copied()).collect();
    roc(&pairs).map(|r| r.auc)
}

/// One named event: its score series and the epoch used to align ground
/// truth to slice indices.
#[derive(Debug, Clone)]
pub struct EventSeries {
    pub name: String,
    pub series: Vec<ScorePoint>,
    pub truth: ExpandedTruth,
}

impl EventSeries {
    /// Aligns `truth` with `series` (slice `t` starts at `time`) and expands
    /// it by `tau`, clipped to the series span.
    pub fn new(name: impl Into<String>, series: Vec<ScorePoint>, truth: &GroundTruth, delta: i64, tau: i64) -> Self {
        let (t0, span) = match (series.first(), series.last()) {
            (Some(first), Some(last)) => (first.time - first.t * delta, Some((first.t, last.t))),
            _ => (0, None),
        };
        let moments = truth.slices(t0, delta);
        Self { name: name.into(), truth: expand_truth(&moments, tau, span), series }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EventResult {
    pub name: String,
    /// `None` when the event has a single class and AUC is undefined.
    pub roc: Option<RocCurve>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub method: String,
    pub events: Vec<EventResult>,
    pub composite: RocCurve,
    pub operating_point: OperatingPoint,
}

/// Per-event curves plus a composite over the pooled `(score, label)` pairs
/// of every event.
pub fn evaluate_series(method: &str, events: &[EventSeries]) -> Result<EvaluationReport> {
    let mut pooled = Vec::new();
    let mut results = Vec::new();
    for e in events {
        let scored = label_series(&e.series, &e.truth);
        results.push(EventResult { name: e.name.clone(), roc: roc(&scored).ok() });
        pooled.extend(scored);
    }
    let composite = roc(&pooled)?;
    Ok(EvaluationReport { method: method.to_string(), events: results, operating_point: composite.youden(), composite })
}

/// Summary JSON: AUC per event and composite, plus the operating point.
pub fn summary_json(reports: &[EvaluationReport]) -> serde_json::Value {
    let methods: BTreeMap<&str, serde_json::Value> = reports
        .iter()
        .map(|r| {
            let events: BTreeMap<&str, Option<f64>> =
                r.events.iter().map(|e| (e.name.as_str(), e.roc.as_ref().map(|c| c.auc))).collect();
            (
                r.method.as_str(),
                serde_json::json!({
                    "composite_auc": r.composite.auc,
                    "positives": r.composite.positives,
                    "negatives": r.composite.negatives,
                    "events": events,
                    "operating_point": r.operating_point,
                }),
            )
        })
        .collect();
    serde_json::json!({ "methods": methods })
}

/// Detector compared by [`evaluate_method`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    LaBurst,
    RawBurst,
    TokenBurst,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::LaBurst => "laburst",
            Method::RawBurst => "rawburst",
            Method::TokenBurst => "tokenburst",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().as_str() {
            "laburst" => Some(Method::LaBurst),
            "rawburst" => Some(Method::RawBurst),
            "tokenburst" => Some(Method::TokenBurst),
            _ => None,
        }
    }
}

/// A message stream with its ground truth.
#[derive(Debug, Clone, Copy)]
pub struct LabeledStream<'a> {
    pub name: &'a str,
    pub messages: &'a [Message],
    pub truth: &'a GroundTruth,
}

/// Settings shared by every method in a comparison.
#[derive(Debug, Clone, Copy)]
pub struct MethodConfig<'a> {
    /// Required for [`Method::LaBurst`].
    pub model: Option<&'a ModelFile>,
    /// Required for [`Method::TokenBurst`].
    pub lexicon: Option<&'a SeedLexicon>,
    /// Slice length and `k` for the baselines.
    pub stream: StreamConfig,
    pub tau: i64,
    pub average: AverageMode,
}

/// Score series of one method on one stream: `|B_t|` for LABurst, `Δ` for
/// the baselines.
pub fn method_series(method: Method, messages: &[Message], cfg: &MethodConfig<'_>) -> Result<(Vec<ScorePoint>, i64)> {
    match method {
        Method::LaBurst => {
            let model = cfg.model.ok_or_else(|| Error::Config("laburst needs a model".into()))?;
            let series = score_series(model, messages, cfg.stream.t0)?;
            Ok((series.iter().map(SeriesEntry::score_point).collect(), model.stream.delta))
        }
        Method::RawBurst | Method::TokenBurst => {
            let empty;
            let lexicon = match (method, cfg.lexicon) {
                (_, Some(l)) => l,
                (Method::TokenBurst, None) => return Err(Error::Config("tokenburst needs a seed lexicon".into())),
                _ => {
                    empty = SeedLexicon::combined();
                    &empty
                }
            };
            let counts = SliceCounts::tally(messages, &cfg.stream, lexicon);
            let kind = if method == Method::RawBurst { BaselineMethod::RawBurst } else { BaselineMethod::TokenBurst };
            let series = delta_series(kind, &counts, cfg.stream.k, cfg.average);
            Ok((series.score_points(), cfg.stream.delta))
        }
    }
}

/// Per-event and composite ROC for one method over labelled streams.
pub fn evaluate_method(
    method: Method,
    streams: &[LabeledStream<'_>],
    cfg: &MethodConfig<'_>,
) -> Result<EvaluationReport> {
    let events = streams
        .iter()
        .map(|s| {
            let (series, delta) = method_series(method, s.messages, cfg)?;
            Ok(EventSeries::new(s.name, series, s.truth, delta, cfg.tau))
        })
        .collect::<Result<Vec<_>>>()?;
    evaluate_series(method.name(), &events)
}

/// One row of an ablation table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationRow {
    /// `None` for the full model.
    pub excluded: Option<String>,
    pub columns: Vec<usize>,
    pub fold_aucs: Vec<f64>,
    pub mean_auc: f64,
    /// `mean_auc` minus the full model's.
    pub difference: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationReport {
    /// Full model first, then one row per excluded group.
    pub rows: Vec<AblationRow>,
    pub folds: usize,
}

impl AblationReport {
    pub fn row(&self, excluded: &str) -> Option<&AblationRow> {
        self.rows.iter().find(|r| r.excluded.as_deref() == Some(excluded))
    }

    /// The configuration without the average-difference family.
    pub fn laburst_star(&self) -> Option<&AblationRow> {
        self.row(FeatureFamily::AverageDifference.name())
    }

    /// `excluded,mean_auc,difference` rows.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let wrap = |e: csv::Error| Error::InvalidInput(e.to_string());
        w.write_record(["excluded", "mean_auc", "difference"]).map_err(wrap)?;
        for r in &self.rows {
            w.write_record([
                r.excluded.clone().unwrap_or_else(|| "none".into()),
                r.mean_auc.to_string(),
                r.difference.to_string(),
            ])
            .map_err(wrap)?;
        }
        w.flush().map_err(|e| Error::InvalidInput(e.to_string()))
    }
}

/// Cross-validated ensemble AUC with all columns and with each named column
/// group removed. Every row uses the same folds and training seeds.
pub fn ablate_groups(
    groups: &[(String, Vec<usize>)],
    data: &Dataset,
    params: &BoostParams,
    folds: usize,
    seed: u64,
) -> Result<AblationReport> {
    let k = effective_folds(data, folds)?;
    let fold_ids = stratified_folds(data.labels(), k, seed);
    let all: Vec<usize> = (0..data.dim()).collect();
    let mut configs: Vec<(Option<String>, Vec<usize>)> = vec![(None, all.clone())];
    for (name, cols) in groups {
        let keep: Vec<usize> = all.iter().copied().filter(|c| !cols.contains(c)).collect();
        if keep.is_empty() {
            return Err(Error::Config(format!("excluding {name} leaves no columns")));
        }
        configs.push((Some(name.clone()), keep));
    }
    let mut rows = Vec::with_capacity(configs.len());
    for (excluded, columns) in configs {
        let r = cv_ensemble(&data.select_columns(&columns), params, &fold_ids, k)?;
        rows.push(AblationRow { excluded, columns, fold_aucs: r.fold_aucs, mean_auc: r.mean_auc, difference: 0.0 });
    }
    let full = rows[0].mean_auc;
    for r in &mut rows {
        r.difference = r.mean_auc - full;
    }
    Ok(AblationReport { rows, folds: k })
}

/// [`ablate_groups`] over the eight feature families.
pub fn ablate(data: &Dataset, params: &BoostParams, folds: usize, seed: u64) -> Result<AblationReport> {
    let groups: Vec<(String, Vec<usize>)> =
        FeatureFamily::ALL.iter().map(|f| (f.name().to_string(), f.columns().to_vec())).collect();
    ablate_groups(&groups, data, params, folds, seed)
}

// SPDX-License-Identifier: Apache-2.0

//! Per-token temporal and graph features.
//!
//! Twelve values are computed for every candidate token of the newest window:
//! log-frequency regression slopes and average-frequency differences (each
//! over token, message and user frequency), mean inter-arrival time, message
//! entropy, mention-network density, TF-IDF, TF-PDF and a burst weight.
//! Raw values are min-max scaled per window before classification.

use std::io::Write;
use std::sync::Arc;

use rayon::prelude::*;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::Message;
use crate::windowing::{run_windows, Edge, History, StreamConfig, Token, WindowStats, Windower};

pub const FEATURE_COUNT: usize = 12;

pub const FEATURE_NAMES: [&str; FEATURE_COUNT] = [
    "slope_token",
    "slope_message",
    "slope_user",
    "avgdiff_token",
    "avgdiff_message",
    "avgdiff_user",
    "inter_arrival_mean",
    "entropy",
    "mention_density",
    "tf_idf",
    "tf_pdf",
    "burst_weight",
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawFeatureVector {
    pub slope_token: f64,
    pub slope_message: f64,
    pub slope_user: f64,
    pub avgdiff_token: f64,
    pub avgdiff_message: f64,
    pub avgdiff_user: f64,
    /// Seconds.
    pub inter_arrival_mean: f64,
    /// Nats.
    pub entropy: f64,
    pub mention_density: f64,
    pub tf_idf: f64,
    pub tf_pdf: f64,
    pub burst_weight: f64,
}

impl RawFeatureVector {
    pub fn to_array(&self) -> [f64; FEATURE_COUNT] {
        [
            self.slope_token,
            self.slope_message,
            self.slope_user,
            self.avgdiff_token,
            self.avgdiff_message,
            self.avgdiff_user,
            self.inter_arrival_mean,
            self.entropy,
            self.mention_density,
            self.tf_idf,
            self.tf_pdf,
            self.burst_weight,
        ]
    }

    pub fn from_array(v: [f64; FEATURE_COUNT]) -> Self {
        Self {
            slope_token: v[0],
            slope_message: v[1],
            slope_user: v[2],
            avgdiff_token: v[3],
            avgdiff_message: v[4],
            avgdiff_user: v[5],
            inter_arrival_mean: v[6],
            entropy: v[7],
            mention_density: v[8],
            tf_idf: v[9],
            tf_pdf: v[10],
            burst_weight: v[11],
        }
    }
}

/// Feature values scaled into `[0, 1]`, ordered as [`FEATURE_NAMES`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedFeatureVector(pub [f64; FEATURE_COUNT]);

/// Groups of columns that are ablated together.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureFamily {
    Regression,
    AverageDifference,
    InterArrival,
    Entropy,
    Density,
    TfIdf,
    TfPdf,
    BursT,
}

impl FeatureFamily {
    pub const ALL: [FeatureFamily; 8] = [
        FeatureFamily::Regression,
        FeatureFamily::AverageDifference,
        FeatureFamily::InterArrival,
        FeatureFamily::Entropy,
        FeatureFamily::Density,
        FeatureFamily::TfIdf,
        FeatureFamily::TfPdf,
        FeatureFamily::BursT,
    ];

    pub fn columns(self) -> &'static [usize] {
        match self {
            FeatureFamily::Regression => &[0, 1, 2],
            FeatureFamily::AverageDifference => &[3, 4, 5],
            FeatureFamily::InterArrival => &[6],
            FeatureFamily::Entropy => &[7],
            FeatureFamily::Density => &[8],
            FeatureFamily::TfIdf => &[9],
            FeatureFamily::TfPdf => &[10],
            FeatureFamily::BursT => &[11],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            FeatureFamily::Regression => "regression",
            FeatureFamily::AverageDifference => "average_difference",
            FeatureFamily::InterArrival => "inter_arrival",
            FeatureFamily::Entropy => "entropy",
            FeatureFamily::Density => "density",
            FeatureFamily::TfIdf => "tf_idf",
            FeatureFamily::TfPdf => "tf_pdf",
            FeatureFamily::BursT => "burst_weight",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureConfig {
    /// Minimum occurrences in the newest window for a token to be scored.
    pub min_count: u64,
    /// Maximum token length in characters.
    pub max_len: usize,
    /// Exclude tokens starting with `http`.
    pub drop_urls: bool,
    /// Inter-arrival value for tokens seen fewer than twice: `k * omega`.
    pub inter_arrival_ceiling: f64,
}

impl FeatureConfig {
    pub fn for_stream(cfg: &StreamConfig) -> Self {
        Self { inter_arrival_ceiling: (cfg.k as i64 * cfg.omega) as f64, ..Self::default() }
    }
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self { min_count: 5, max_len: 64, drop_urls: true, inter_arrival_ceiling: 1800.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FreqKind {
    Token,
    Message,
    User,
}

/// Per-window frequency of `token`, oldest window first.
pub fn freq_series(token: &str, history: &History, kind: FreqKind) -> Vec<f64> {
    history
        .windows()
        .map(|w| {
            let t = w.get(token);
            (match kind {
                FreqKind::Token => t.count,
                FreqKind::Message => t.messages,
                FreqKind::User => t.users,
            }) as f64
        })
        .collect()
}

/// OLS slope of `ln(1 + series[i])` against `i`.
pub fn slope_log(series: &[f64]) -> Result<f64> {
    let n = series.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!("slope needs >= 2 points, got {n}")));
    }
    let ys: Vec<f64> = series.iter().map(|&f| f.ln_1p()).collect();
    if ys.iter().all(|&y| y == ys[0]) {
        return Ok(0.0);
    }
    let nf = n as f64;
    let x_mean = (nf - 1.0) / 2.0;
    let y_mean = ys.iter().sum::<f64>() / nf;
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    for (i, y) in ys.iter().enumerate() {
        let dx = i as f64 - x_mean;
        sxy += dx * (y - y_mean);
        sxx += dx * dx;
    }
    Ok(sxy / sxx)
}

/// Newest value minus the mean of all earlier values.
pub fn avg_diff(series: &[f64]) -> Result<f64> {
    let n = series.len();
    if n < 2 {
        return Err(Error::InvalidInput(format!("avg_diff needs >= 2 points, got {n}")));
    }
    let prev = &series[..n - 1];
    Ok(series[n - 1] - prev.iter().sum::<f64>() / prev.len() as f64)
}

/// Mean gap between consecutive sorted occurrence times, or `ceiling` when
/// there are fewer than two occurrences.
pub fn inter_arrival(timestamps: &[i64], ceiling: f64) -> Result<f64> {
    if timestamps.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidInput("timestamps are not sorted".into()));
    }
    if timestamps.len() < 2 {
        return Ok(ceiling);
    }
    let span = timestamps[timestamps.len() - 1] - timestamps[0];
    Ok(span as f64 / (timestamps.len() - 1) as f64)
}

/// Shannon entropy in nats of a multiset given by its multiplicities.
pub fn message_entropy(multiplicities: &[u64]) -> Result<f64> {
    let total: u64 = multiplicities.iter().sum();
    if total == 0 {
        return Err(Error::InvalidInput("entropy of an empty multiset".into()));
    }
    let mut counts: Vec<u64> = multiplicities.iter().copied().filter(|&c| c > 0).collect();
    counts.sort_unstable();
    let total = total as f64;
    let h = -counts
        .iter()
        .map(|&c| {
            let p = c as f64 / total;
            p * p.ln()
        })
        .sum::<f64>();
    Ok(h.max(0.0))
}

/// Edge density `2|E| / (n (n - 1))` of the graph on `users` plus every edge
/// endpoint.
pub fn mention_density(users: &FxHashSet<Arc<str>>, edges: &FxHashSet<Edge>) -> f64 {
    let mut nodes: FxHashSet<&str> = users.iter().map(|u| &**u).collect();
    for (a, b) in edges {
        nodes.insert(a);
        nodes.insert(b);
    }
    let n = nodes.len() as f64;
    if n < 2.0 {
        return 0.0;
    }
    (2.0 * edges.len() as f64 / (n * (n - 1.0))).min(1.0)
}

/// Mention subgraph of a token in `window`: its users (lowercased) and every
/// mention edge touching one of them.
pub fn token_mention_subgraph(
    window: &WindowStats,
    token: &str,
    adjacency: &FxHashMap<&str, Vec<&Edge>>,
) -> (FxHashSet<Arc<str>>, FxHashSet<Edge>) {
    let users: FxHashSet<Arc<str>> =
        window.token_users(token).into_iter().map(|u| Arc::from(u.to_lowercase())).collect();
    let mut edges = FxHashSet::default();
    for u in &users {
        if let Some(incident) = adjacency.get(&**u) {
            edges.extend(incident.iter().map(|&e| e.clone()));
        }
    }
    (users, edges)
}

/// Node → incident edges for the window's mention graph.
pub fn mention_adjacency(window: &WindowStats) -> FxHashMap<&str, Vec<&Edge>> {
    let mut adj: FxHashMap<&str, Vec<&Edge>> = FxHashMap::default();
    for e in &window.mention_edges {
        adj.entry(&*e.0).or_default().push(e);
        adj.entry(&*e.1).or_default().push(e);
    }
    adj
}

/// Newest-window count times `ln(h / (1 + windows containing the token))`,
/// floored at zero.
pub fn tf_idf(token: &str, history: &History) -> f64 {
    let Some(newest) = history.newest() else {
        return 0.0;
    };
    let tf = newest.token_count(token) as f64;
    let h = history.len() as f64;
    let dfw = history.windows().filter(|w| w.token_count(token) > 0).count() as f64;
    let v = tf * (h / (1.0 + dfw)).ln();
    if v > 0.0 {
        v
    } else {
        0.0
    }
}

/// Sum over history windows of `F_c * exp(n_c / N_c)`, where `F_c` is the
/// token count divided by the window's count norm, `n_c` the messages
/// containing the token and `N_c` all messages in the window.
pub fn tf_pdf(token: &str, history: &History) -> f64 {
    history
        .windows()
        .map(|w| {
            let t = w.get(token);
            if w.total_messages == 0 || t.count == 0 {
                return 0.0;
            }
            let f = t.count as f64 / w.count_norm();
            f * (t.messages as f64 / w.total_messages as f64).exp()
        })
        .sum()
}

fn relative_freq(w: &WindowStats, token: &str) -> f64 {
    if w.total_occurrences == 0 {
        0.0
    } else {
        w.token_count(token) as f64 / w.total_occurrences as f64
    }
}

/// Burstiness times actual relative frequency, where burstiness is the
/// positive excess of the newest relative frequency over its mean across the
/// earlier windows.
pub fn burst_weight(token: &str, history: &History) -> f64 {
    let n = history.len();
    if n < 2 {
        return 0.0;
    }
    let rel: Vec<f64> = history.windows().map(|w| relative_freq(w, token)).collect();
    let actual = rel[n - 1];
    if actual <= 0.0 {
        return 0.0;
    }
    let expected = rel[..n - 1].iter().sum::<f64>() / (n - 1) as f64;
    let burstiness = (actual - expected).max(0.0) / actual;
    burstiness * actual
}

/// Tokens of `window` eligible for scoring, sorted.
pub fn candidate_tokens(window: &WindowStats, cfg: &FeatureConfig) -> Vec<Token> {
    let mut out: Vec<Token> = window
        .tokens
        .iter()
        .filter(|(tok, t)| {
            t.count >= cfg.min_count
                && tok.chars().count() <= cfg.max_len
                && !(cfg.drop_urls && tok.starts_with("http"))
        })
        .map(|(tok, _)| tok.clone())
        .collect();
    out.sort();
    out
}

/// Raw feature vectors for the candidates of one window.
#[derive(Debug, Clone, Default)]
pub struct CandidateSet {
    pub end_time: i64,
    /// Sorted by token.
    pub tokens: Vec<(Token, RawFeatureVector)>,
}

impl CandidateSet {
    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }
}

/// Features of one token against the full history.
pub fn token_features(
    token: &str,
    history: &History,
    adjacency: &FxHashMap<&str, Vec<&Edge>>,
    cfg: &FeatureConfig,
) -> Result<RawFeatureVector> {
    let newest = history.newest().ok_or_else(|| Error::InvalidInput("empty history".into()))?;
    let tok_series = freq_series(token, history, FreqKind::Token);
    let msg_series = freq_series(token, history, FreqKind::Message);
    let user_series = freq_series(token, history, FreqKind::User);

    let texts = newest.message_texts(token);
    let multiplicities: Vec<u64> = texts.values().copied().collect();
    let entropy = if multiplicities.is_empty() { 0.0 } else { message_entropy(&multiplicities)? };
    let (users, edges) = token_mention_subgraph(newest, token, adjacency);

    Ok(RawFeatureVector {
        slope_token: slope_log(&tok_series)?,
        slope_message: slope_log(&msg_series)?,
        slope_user: slope_log(&user_series)?,
        avgdiff_token: avg_diff(&tok_series)?,
        avgdiff_message: avg_diff(&msg_series)?,
        avgdiff_user: avg_diff(&user_series)?,
        inter_arrival_mean: inter_arrival(&history.token_timestamps(token), cfg.inter_arrival_ceiling)?,
        entropy,
        mention_density: mention_density(&users, &edges),
        tf_idf: tf_idf(token, history),
        tf_pdf: tf_pdf(token, history),
        burst_weight: burst_weight(token, history),
    })
}

/// Feature vectors for every candidate of the newest window. Histories
/// shorter than two windows yield an empty set.
pub fn extract(history: &History, cfg: &FeatureConfig) -> Result<CandidateSet> {
    let Some(newest) = history.newest() else {
        return Ok(CandidateSet::default());
    };
    if history.len() < 2 {
        return Ok(CandidateSet { end_time: newest.end_time, tokens: Vec::new() });
    }
    let candidates = candidate_tokens(newest, cfg);
    let adjacency = mention_adjacency(newest);
    let tokens = candidates
        .into_par_iter()
        .map(|tok| token_features(&tok, history, &adjacency, cfg).map(|f| (tok, f)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CandidateSet { end_time: newest.end_time, tokens })
}

/// Per-feature min-max scaling across one candidate set. Constant features
/// map to 0.
pub fn normalize(cands: &CandidateSet) -> Vec<NormalizedFeatureVector> {
    if cands.is_empty() {
        return Vec::new();
    }
    let rows: Vec<[f64; FEATURE_COUNT]> = cands.tokens.iter().map(|(_, f)| f.to_array()).collect();
    let mut lo = [f64::INFINITY; FEATURE_COUNT];
    let mut hi = [f64::NEG_INFINITY; FEATURE_COUNT];
    for r in &rows {
        for j in 0..FEATURE_COUNT {
            lo[j] = lo[j].min(r[j]);
            hi[j] = hi[j].max(r[j]);
        }
    }
    rows.iter()
        .map(|r| {
            let mut out = [0.0; FEATURE_COUNT];
            for j in 0..FEATURE_COUNT {
                let range = hi[j] - lo[j];
                out[j] = if range > 0.0 { ((r[j] - lo[j]) / range).clamp(0.0, 1.0) } else { 0.0 };
            }
            NormalizedFeatureVector(out)
        })
        .collect()
}

/// Runs windowing and feature extraction over a message sequence, calling
/// `on_window` with the history, raw candidates and their normalized form
/// for every completed window.
pub fn scan_windows<F>(
    messages: &[Message],
    stream: StreamConfig,
    cfg: &FeatureConfig,
    mut on_window: F,
) -> Result<Windower>
where
    F: FnMut(&History, &CandidateSet, &[NormalizedFeatureVector]) -> Result<()>,
{
    run_windows(messages, stream, |history| {
        let cands = extract(history, cfg)?;
        let normalized = normalize(&cands);
        on_window(history, &cands, &normalized)
    })
}

/// Header of the feature dump: window, token, raw columns, normalized columns.
pub fn feature_csv_header() -> Vec<String> {
    let mut h = vec!["window_end_time".to_string(), "token".to_string()];
    h.extend(FEATURE_NAMES.iter().map(|n| format!("raw_{n}")));
    h.extend(FEATURE_NAMES.iter().map(|n| format!("norm_{n}")));
    h
}

/// Appends one window's candidates to a feature dump.
pub fn write_feature_rows<W: Write>(
    out: &mut csv::Writer<W>,
    cands: &CandidateSet,
    normalized: &[NormalizedFeatureVector],
) -> csv::Result<()> {
    for ((tok, raw), norm) in cands.tokens.iter().zip(normalized) {
        let mut row = vec![cands.end_time.to_string(), tok.to_string()];
        row.extend(raw.to_array().iter().map(|v| v.to_string()));
        row.extend(norm.0.iter().map(|v| v.to_string()));
        out.write_record(&row)?;
    }
    Ok(())
}

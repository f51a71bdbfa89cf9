// SPDX-License-Identifier: Apache-2.0

//! Brute-force feature recomputation straight from a message list. Every
//! window is rebuilt from the raw messages; nothing is shared with the
//! streaming implementation beyond the `Message` type.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use momentburst::Message;

#[derive(Debug, Clone, Copy)]
pub struct OracleParams {
    pub delta: i64,
    pub omega: i64,
    pub k: usize,
    pub min_count: u64,
    pub max_len: usize,
    pub drop_urls: bool,
    pub ceiling: f64,
}

impl Default for OracleParams {
    fn default() -> Self {
        Self { delta: 60, omega: 180, k: 10, min_count: 5, max_len: 64, drop_urls: true, ceiling: 1800.0 }
    }
}

#[derive(Default)]
struct Win {
    count: HashMap<String, u64>,
    msgs: HashMap<String, u64>,
    users: HashMap<String, HashSet<String>>,
    n_messages: u64,
    occurrences: u64,
}

fn handle(tok: &str) -> Option<String> {
    let rest = tok.strip_prefix('@')?;
    let mut end = rest.len();
    for (i, c) in rest.char_indices().rev() {
        if c.is_alphanumeric() || c == '_' {
            break;
        }
        end = i;
    }
    let h = &rest[..end];
    if h.is_empty() {
        None
    } else {
        Some(h.to_lowercase())
    }
}

fn in_slices(messages: &[Message], t0: i64, delta: i64, lo: i64, hi: i64) -> Vec<&Message> {
    messages
        .iter()
        .filter(|m| m.timestamp >= t0)
        .filter(|m| {
            let s = (m.timestamp - t0) / delta;
            s >= lo && s <= hi
        })
        .collect()
}

fn build(msgs: &[&Message]) -> Win {
    let mut w = Win::default();
    for m in msgs {
        w.n_messages += 1;
        let toks: Vec<&str> = m.text.split_whitespace().collect();
        let distinct: BTreeSet<&str> = toks.iter().copied().collect();
        for t in &toks {
            *w.count.entry(t.to_string()).or_default() += 1;
            w.occurrences += 1;
        }
        for t in distinct {
            *w.msgs.entry(t.to_string()).or_default() += 1;
            w.users.entry(t.to_string()).or_default().insert(m.author_id.clone());
        }
    }
    w
}

fn ols_slope(ys: &[f64]) -> f64 {
    if ys.iter().all(|y| *y == ys[0]) {
        return 0.0;
    }
    let n = ys.len() as f64;
    let (mut sx, mut sy, mut sxy, mut sxx) = (0.0, 0.0, 0.0, 0.0);
    for (i, y) in ys.iter().enumerate() {
        let x = i as f64;
        sx += x;
        sy += y;
        sxy += x * y;
        sxx += x * x;
    }
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

fn avg_diff(xs: &[f64]) -> f64 {
    let (last, prev) = xs.split_last().unwrap();
    last - prev.iter().sum::<f64>() / prev.len() as f64
}

/// `(window end slice, token) -> 12 raw feature values` for every candidate
/// of every window with a history of at least two windows.
pub fn oracle_features(messages: &[Message], p: &OracleParams) -> BTreeMap<(i64, String), [f64; 12]> {
    let mut out = BTreeMap::new();
    let Some(first) = messages.first() else {
        return out;
    };
    let t0 = first.timestamp.div_euclid(p.delta) * p.delta;
    let last_slice = messages.iter().map(|m| (m.timestamp - t0) / p.delta).max().unwrap();
    let spw = p.omega / p.delta;

    let mut windows: BTreeMap<i64, Win> = BTreeMap::new();
    for e in (spw - 1)..=last_slice {
        windows.insert(e, build(&in_slices(messages, t0, p.delta, e - spw + 1, e)));
    }

    for e in spw..=last_slice {
        let first_end = (e - p.k as i64 + 1).max(spw - 1);
        let hist: Vec<&Win> = (first_end..=e).map(|x| &windows[&x]).collect();
        let h = hist.len();
        let newest = hist[h - 1];
        let newest_msgs = in_slices(messages, t0, p.delta, e - spw + 1, e);
        let span_msgs = in_slices(messages, t0, p.delta, first_end - spw + 1, e);

        let mut edges: BTreeSet<(String, String)> = BTreeSet::new();
        for m in &newest_msgs {
            let author = m.author_id.to_lowercase();
            for t in m.text.split_whitespace() {
                if let Some(hd) = handle(t) {
                    if hd != author {
                        let pair = if author <= hd { (author.clone(), hd) } else { (hd, author.clone()) };
                        edges.insert(pair);
                    }
                }
            }
        }

        for (tok, &c) in &newest.count {
            if c < p.min_count || tok.chars().count() > p.max_len || (p.drop_urls && tok.starts_with("http")) {
                continue;
            }
            let series = |f: &dyn Fn(&Win) -> f64| -> Vec<f64> { hist.iter().map(|w| f(w)).collect() };
            let tokc = series(&|w| *w.count.get(tok).unwrap_or(&0) as f64);
            let msgc = series(&|w| *w.msgs.get(tok).unwrap_or(&0) as f64);
            let userc = series(&|w| w.users.get(tok).map_or(0, |u| u.len()) as f64);
            let ln1p = |v: &[f64]| -> Vec<f64> { v.iter().map(|x| (1.0 + x).ln()).collect() };

            let mut stamps: Vec<i64> = Vec::new();
            for m in &span_msgs {
                for t in m.text.split_whitespace() {
                    if t == tok {
                        stamps.push(m.timestamp);
                    }
                }
            }
            stamps.sort();
            let inter = if stamps.len() < 2 {
                p.ceiling
            } else {
                let gaps: Vec<f64> = stamps.windows(2).map(|g| (g[1] - g[0]) as f64).collect();
                gaps.iter().sum::<f64>() / gaps.len() as f64
            };

            let mut texts: HashMap<&str, u64> = HashMap::new();
            for m in &newest_msgs {
                if m.text.split_whitespace().any(|t| t == tok) {
                    *texts.entry(m.text.as_str()).or_default() += 1;
                }
            }
            let total: u64 = texts.values().sum();
            let mut probs: Vec<f64> = texts.values().map(|&v| v as f64 / total as f64).collect();
            probs.sort_by(f64::total_cmp);
            let entropy = probs.iter().map(|q| -q * q.ln()).sum::<f64>().max(0.0);

            let users: HashSet<String> = newest_msgs
                .iter()
                .filter(|m| m.text.split_whitespace().any(|t| t == tok))
                .map(|m| m.author_id.to_lowercase())
                .collect();
            let sub: Vec<&(String, String)> =
                edges.iter().filter(|(a, b)| users.contains(a) || users.contains(b)).collect();
            let mut nodes: HashSet<&str> = users.iter().map(String::as_str).collect();
            for (a, b) in &sub {
                nodes.insert(a);
                nodes.insert(b);
            }
            let n = nodes.len() as f64;
            let density = if n < 2.0 { 0.0 } else { (2.0 * sub.len() as f64 / (n * (n - 1.0))).min(1.0) };

            let dfw = hist.iter().filter(|w| w.count.get(tok).is_some_and(|&c| c > 0)).count() as f64;
            let tf_idf = (c as f64 * (h as f64 / (1.0 + dfw)).ln()).max(0.0);

            let mut tf_pdf = 0.0;
            for w in &hist {
                let cc = *w.count.get(tok).unwrap_or(&0);
                if cc == 0 || w.n_messages == 0 {
                    continue;
                }
                let norm = w.count.values().map(|&v| (v * v) as f64).sum::<f64>().sqrt();
                tf_pdf += cc as f64 / norm * (*w.msgs.get(tok).unwrap_or(&0) as f64 / w.n_messages as f64).exp();
            }

            let rel: Vec<f64> = hist
                .iter()
                .map(|w| {
                    if w.occurrences == 0 {
                        0.0
                    } else {
                        *w.count.get(tok).unwrap_or(&0) as f64 / w.occurrences as f64
                    }
                })
                .collect();
            let fa = rel[h - 1];
            let fe = rel[..h - 1].iter().sum::<f64>() / (h - 1) as f64;
            let burst = if fa > 0.0 { (fa - fe).max(0.0) / fa * fa } else { 0.0 };

            out.insert(
                (e, tok.clone()),
                [
                    ols_slope(&ln1p(&tokc)),
                    ols_slope(&ln1p(&msgc)),
                    ols_slope(&ln1p(&userc)),
                    avg_diff(&tokc),
                    avg_diff(&msgc),
                    avg_diff(&userc),
                    inter,
                    entropy,
                    density,
                    tf_idf,
                    tf_pdf,
                    burst,
                ],
            );
        }
    }
    out
}

/// `|a - b| <= rel * max(|a|, |b|)`, with an absolute floor of `1e-12` for
/// values that cancel to (near) zero.
pub fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()) + 1e-12
}

/// Synthetic stream of roughly `rate * duration` messages, roughened with
/// mixed-case authors, punctuated mentions, URLs, repeated tokens and
/// empty texts so every feature path is exercised.
pub fn rough_stream(seed: u64, rate: u32, duration: i64) -> Vec<Message> {
    use momentburst::{BurstSpec, SynthConfig};
    let cfg = SynthConfig {
        duration,
        rate,
        vocab_size: 600,
        user_pool: 400,
        mention_prob: 0.3,
        seed,
        bursts: vec![BurstSpec {
            start: duration / 2,
            length: 120,
            tokens: vec!["goal".into(), "gol".into()],
            intensity: 80.0,
            volume_boost: 1.5,
        }],
        ..Default::default()
    };
    let (mut messages, _) = momentburst::synth::generate(&cfg).expect("valid config");
    for (i, m) in messages.iter_mut().enumerate() {
        match i % 11 {
            0 => m.author_id = m.author_id.to_uppercase(),
            1 => m.text.push_str(&format!(" @U{}!! @{}", i % 37, m.author_id)),
            2 => m.text.push_str(" http://x.co/a goal goal"),
            3 => m.text.clear(),
            4 => m.text.push_str(" @ @_"),
            _ => {}
        }
    }
    messages
}

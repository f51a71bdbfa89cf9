// SPDX-License-Identifier: Apache-2.0

//! Slice, window and history bookkeeping.
//!
//! The stream is cut into slices of `delta` seconds. Each window aggregates
//! the `omega / delta` most recent slices and advances one slice at a time,
//! so consecutive windows share all but one slice. The last `k` windows form
//! the history that temporal features are computed from.

use std::collections::VecDeque;
use std::io::Write;
use std::sync::Arc;

use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{tokenize, Message};

pub type Token = Arc<str>;

/// Undirected mention edge, endpoints ordered lexicographically.
pub type Edge = (Arc<str>, Arc<str>);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct StreamConfig {
    /// Slice length in seconds.
    pub delta: i64,
    /// Window length in seconds; a positive multiple of `delta`.
    pub omega: i64,
    /// History depth in windows.
    pub k: usize,
    /// Stream epoch. `None` aligns to the first message, rounded down to a
    /// slice boundary.
    pub t0: Option<i64>,
}

impl Default for StreamConfig {
    fn default() -> Self {
        Self { delta: 60, omega: 180, k: 10, t0: None }
    }
}

impl StreamConfig {
    pub fn validate(&self) -> Result<()> {
        if self.delta < 1 {
            return Err(Error::Config(format!("delta must be >= 1, got {}", self.delta)));
        }
        if self.omega < self.delta || self.omega % self.delta != 0 {
            return Err(Error::Config(format!(
                "omega ({}) must be a positive multiple of delta ({})",
                self.omega, self.delta
            )));
        }
        if self.k < 2 {
            return Err(Error::Config(format!("k must be >= 2, got {}", self.k)));
        }
        Ok(())
    }

    pub fn slices_per_window(&self) -> usize {
        (self.omega / self.delta) as usize
    }

    /// Epoch used for a stream whose first message has `first_timestamp`.
    pub fn resolve_t0(&self, first_timestamp: i64) -> i64 {
        self.t0.unwrap_or_else(|| first_timestamp.div_euclid(self.delta) * self.delta)
    }
}

/// `floor((timestamp - t0) / delta)`, or `None` for messages before the epoch.
pub fn slice_index(msg: &Message, delta: i64, t0: i64) -> Option<i64> {
    (msg.timestamp >= t0).then(|| (msg.timestamp - t0).div_euclid(delta))
}

/// Normalized identity for the mention graph: lowercased, `@` stripped,
/// trailing punctuation removed.
pub fn mention_handle(token: &str) -> Option<String> {
    let rest = token.strip_prefix('@')?;
    let handle = rest.trim_end_matches(|c: char| !(c.is_alphanumeric() || c == '_'));
    (!handle.is_empty()).then(|| handle.to_lowercase())
}

fn edge(a: Arc<str>, b: Arc<str>) -> Edge {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

#[derive(Debug, Clone, Default)]
pub struct SliceToken {
    pub count: u64,
    /// Indices into [`SliceTable::texts`], one per message containing the
    /// token.
    pub messages: Vec<u32>,
    pub users: FxHashSet<Arc<str>>,
    /// Occurrence timestamps, sorted.
    pub timestamps: Vec<i64>,
}

/// Per-token tables for one slice.
#[derive(Debug, Clone, Default)]
pub struct SliceTable {
    pub slice_index: i64,
    pub tokens: FxHashMap<Token, SliceToken>,
    pub mention_edges: FxHashSet<Edge>,
    /// Text of every message accumulated into this slice.
    pub texts: Vec<Arc<str>>,
    pub total_messages: u64,
}

impl SliceTable {
    pub fn new(slice_index: i64) -> Self {
        Self { slice_index, ..Default::default() }
    }

    /// Adds one message. The caller guarantees the message belongs to this
    /// slice.
    pub fn accumulate(&mut self, msg: &Message) {
        let msg_idx = self.texts.len() as u32;
        self.total_messages += 1;
        let tokens = tokenize(&msg.text);
        if tokens.is_empty() {
            self.texts.push(Arc::from(""));
            return;
        }
        self.texts.push(Arc::from(msg.text.as_str()));
        let author: Arc<str> = Arc::from(msg.author_id.as_str());
        let author_node: Arc<str> = Arc::from(msg.author_id.to_lowercase());

        for tok in tokens {
            let entry = match self.tokens.get_mut(tok) {
                Some(e) => e,
                None => self.tokens.entry(Arc::from(tok)).or_default(),
            };
            entry.count += 1;
            if entry.messages.last() != Some(&msg_idx) {
                entry.messages.push(msg_idx);
                entry.users.insert(author.clone());
            }
            match entry.timestamps.last() {
                Some(&last) if last > msg.timestamp => {
                    let pos = entry.timestamps.partition_point(|&t| t <= msg.timestamp);
                    entry.timestamps.insert(pos, msg.timestamp);
                }
                _ => entry.timestamps.push(msg.timestamp),
            }
            if let Some(handle) = mention_handle(tok) {
                if *handle != *author_node {
                    self.mention_edges.insert(edge(author_node.clone(), Arc::from(handle)));
                }
            }
        }
    }

    pub fn token_count(&self, token: &str) -> u64 {
        self.tokens.get(token).map_or(0, |t| t.count)
    }

    pub fn token_messages(&self, token: &str) -> u64 {
        self.tokens.get(token).map_or(0, |t| t.messages.len() as u64)
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WindowToken {
    pub count: u64,
    pub messages: u64,
    pub users: u64,
}

/// Aggregate over `omega / delta` consecutive slices, ending at slice
/// `end_time`.
#[derive(Debug, Clone)]
pub struct WindowStats {
    pub end_time: i64,
    /// Constituent slices, oldest first.
    pub slices: Vec<Arc<SliceTable>>,
    pub tokens: FxHashMap<Token, WindowToken>,
    pub mention_edges: FxHashSet<Edge>,
    pub total_messages: u64,
    /// Total token occurrences.
    pub total_occurrences: u64,
    /// Sum over tokens of squared occurrence counts.
    pub sum_sq_counts: u128,
}

impl WindowStats {
    pub fn get(&self, token: &str) -> WindowToken {
        self.tokens.get(token).copied().unwrap_or_default()
    }

    pub fn token_count(&self, token: &str) -> u64 {
        self.get(token).count
    }

    /// Distinct authors using `token` in this window.
    pub fn token_users(&self, token: &str) -> FxHashSet<Arc<str>> {
        let mut users = FxHashSet::default();
        for s in &self.slices {
            if let Some(t) = s.tokens.get(token) {
                users.extend(t.users.iter().cloned());
            }
        }
        users
    }

    /// Sorted occurrence timestamps of `token` in this window.
    pub fn token_timestamps(&self, token: &str) -> Vec<i64> {
        self.slices.iter().filter_map(|s| s.tokens.get(token)).flat_map(|t| t.timestamps.iter().copied()).collect()
    }

    /// Multiset of exact texts of messages containing `token`.
    pub fn message_texts(&self, token: &str) -> FxHashMap<&str, u64> {
        let mut texts: FxHashMap<&str, u64> = FxHashMap::default();
        for s in &self.slices {
            if let Some(t) = s.tokens.get(token) {
                for &i in &t.messages {
                    *texts.entry(&*s.texts[i as usize]).or_default() += 1;
                }
            }
        }
        texts
    }

    /// Euclidean norm of the token-count vector.
    pub fn count_norm(&self) -> f64 {
        (self.sum_sq_counts as f64).sqrt()
    }

    /// Writes `(window_end_time, token, count, message_count, user_count)`
    /// rows sorted by token.
    pub fn write_csv<W: Write>(&self, out: &mut csv::Writer<W>) -> csv::Result<()> {
        let mut tokens: Vec<_> = self.tokens.iter().collect();
        tokens.sort_by(|a, b| a.0.cmp(b.0));
        for (tok, t) in tokens {
            out.write_record([
                self.end_time.to_string(),
                tok.to_string(),
                t.count.to_string(),
                t.messages.to_string(),
                t.users.to_string(),
            ])?;
        }
        Ok(())
    }
}

/// Aggregates consecutive slices into a window. `expected` is `omega / delta`.
pub fn build_window(slices: &[Arc<SliceTable>], expected: usize) -> Result<WindowStats> {
    if slices.len() != expected || expected == 0 {
        return Err(Error::Sequence(format!("window needs {expected} slices, got {}", slices.len())));
    }
    for pair in slices.windows(2) {
        if pair[1].slice_index != pair[0].slice_index + 1 {
            return Err(Error::Sequence(format!(
                "slices {} and {} are not consecutive",
                pair[0].slice_index, pair[1].slice_index
            )));
        }
    }

    let mut tokens: FxHashMap<Token, WindowToken> = FxHashMap::default();
    let mut seen_in: FxHashMap<Token, usize> = FxHashMap::default();
    for s in slices {
        for (tok, st) in &s.tokens {
            let w = tokens.entry(tok.clone()).or_default();
            w.count += st.count;
            w.messages += st.messages.len() as u64;
            w.users += st.users.len() as u64;
            *seen_in.entry(tok.clone()).or_default() += 1;
        }
    }
    // Users seen in more than one slice need a true union.
    for (tok, n) in seen_in {
        if n > 1 {
            let mut users: FxHashSet<&Arc<str>> = FxHashSet::default();
            for s in slices {
                if let Some(st) = s.tokens.get(&tok) {
                    users.extend(st.users.iter());
                }
            }
            tokens.get_mut(&tok).expect("token present").users = users.len() as u64;
        }
    }

    let mut mention_edges = FxHashSet::default();
    for s in slices {
        mention_edges.extend(s.mention_edges.iter().cloned());
    }
    let total_occurrences = tokens.values().map(|t| t.count).sum();
    let sum_sq_counts = tokens.values().map(|t| (t.count as u128) * (t.count as u128)).sum();

    Ok(WindowStats {
        end_time: slices[slices.len() - 1].slice_index,
        slices: slices.to_vec(),
        tokens,
        mention_edges,
        total_messages: slices.iter().map(|s| s.total_messages).sum(),
        total_occurrences,
        sum_sq_counts,
    })
}

/// The most recent `k` windows, oldest first.
#[derive(Debug, Clone)]
pub struct History {
    k: usize,
    windows: VecDeque<Arc<WindowStats>>,
}

impl History {
    pub fn new(k: usize) -> Self {
        Self { k, windows: VecDeque::with_capacity(k + 1) }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.windows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }

    pub fn windows(&self) -> impl ExactSizeIterator<Item = &Arc<WindowStats>> + DoubleEndedIterator {
        self.windows.iter()
    }

    pub fn newest(&self) -> Option<&Arc<WindowStats>> {
        self.windows.back()
    }

    /// Appends `w`, evicting the oldest window beyond `k`.
    pub fn advance(&mut self, w: Arc<WindowStats>) -> Result<()> {
        if let Some(last) = self.windows.back() {
            if w.end_time <= last.end_time {
                return Err(Error::Sequence(format!(
                    "window end_time {} does not follow {}",
                    w.end_time, last.end_time
                )));
            }
        }
        self.windows.push_back(w);
        while self.windows.len() > self.k {
            self.windows.pop_front();
        }
        Ok(())
    }

    /// Distinct slices spanned by the history, oldest first.
    pub fn span_slices(&self) -> Vec<&Arc<SliceTable>> {
        let mut out: Vec<&Arc<SliceTable>> = Vec::new();
        for w in &self.windows {
            for s in &w.slices {
                if out.last().is_none_or(|l| l.slice_index < s.slice_index) {
                    out.push(s);
                }
            }
        }
        out
    }

    /// Sorted occurrence timestamps of `token` over every slice in the
    /// history span, each occurrence counted once.
    pub fn token_timestamps(&self, token: &str) -> Vec<i64> {
        self.span_slices()
            .into_iter()
            .filter_map(|s| s.tokens.get(token))
            .flat_map(|t| t.timestamps.iter().copied())
            .collect()
    }
}

/// Counters for messages the windower refused.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct WindowerStats {
    pub accepted: u64,
    pub before_epoch: u64,
    pub out_of_order: u64,
}

/// Single-pass driver turning a time-ordered message sequence into windows.
///
/// A window is produced for every slice index from the first full window
/// (`omega / delta - 1` slices after the epoch) onward, including slices
/// without messages.
pub struct Windower {
    cfg: StreamConfig,
    t0: Option<i64>,
    current: Option<SliceTable>,
    recent: VecDeque<Arc<SliceTable>>,
    history: History,
    stats: WindowerStats,
}

impl Windower {
    pub fn new(cfg: StreamConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            t0: cfg.t0,
            history: History::new(cfg.k),
            cfg,
            current: None,
            recent: VecDeque::new(),
            stats: WindowerStats::default(),
        })
    }

    pub fn config(&self) -> &StreamConfig {
        &self.cfg
    }

    /// Epoch once known.
    pub fn t0(&self) -> Option<i64> {
        self.t0
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    pub fn stats(&self) -> WindowerStats {
        self.stats
    }

    /// Feeds one message; `on_window` runs with the updated history each
    /// time a window completes.
    pub fn push<F>(&mut self, msg: &Message, mut on_window: F) -> Result<()>
    where
        F: FnMut(&History) -> Result<()>,
    {
        let t0 = *self.t0.get_or_insert_with(|| self.cfg.resolve_t0(msg.timestamp));
        let Some(idx) = slice_index(msg, self.cfg.delta, t0) else {
            self.stats.before_epoch += 1;
            log::warn!("message {} precedes stream epoch {t0}", msg.id);
            return Ok(());
        };
        match &self.current {
            Some(cur) if idx < cur.slice_index => {
                self.stats.out_of_order += 1;
                log::warn!("message {} arrived after its slice closed", msg.id);
                return Ok(());
            }
            Some(cur) if idx > cur.slice_index => {
                let next = cur.slice_index + 1;
                self.close_current(&mut on_window)?;
                for empty in next..idx {
                    self.current = Some(SliceTable::new(empty));
                    self.close_current(&mut on_window)?;
                }
                self.current = Some(SliceTable::new(idx));
            }
            Some(_) => {}
            None => {
                // Leading empty slices between the epoch and the first message.
                for empty in 0..idx {
                    self.current = Some(SliceTable::new(empty));
                    self.close_current(&mut on_window)?;
                }
                self.current = Some(SliceTable::new(idx));
            }
        }
        self.current.as_mut().expect("current slice exists").accumulate(msg);
        self.stats.accepted += 1;
        Ok(())
    }

    /// Closes the open slice at end of stream.
    pub fn finish<F>(&mut self, mut on_window: F) -> Result<()>
    where
        F: FnMut(&History) -> Result<()>,
    {
        if self.current.is_some() {
            self.close_current(&mut on_window)?;
        }
        Ok(())
    }

    fn close_current<F>(&mut self, on_window: &mut F) -> Result<()>
    where
        F: FnMut(&History) -> Result<()>,
    {
        let Some(slice) = self.current.take() else {
            return Ok(());
        };
        let per_window = self.cfg.slices_per_window();
        self.recent.push_back(Arc::new(slice));
        while self.recent.len() > per_window {
            self.recent.pop_front();
        }
        if self.recent.len() == per_window {
            let slices: Vec<Arc<SliceTable>> = self.recent.iter().cloned().collect();
            let window = build_window(&slices, per_window)?;
            self.history.advance(Arc::new(window))?;
            on_window(&self.history)?;
        }
        Ok(())
    }
}

/// Runs a whole message sequence through a [`Windower`].
pub fn run_windows<F>(messages: &[Message], cfg: StreamConfig, mut on_window: F) -> Result<Windower>
where
    F: FnMut(&History) -> Result<()>,
{
    let mut w = Windower::new(cfg)?;
    for m in messages {
        w.push(m, &mut on_window)?;
    }
    w.finish(&mut on_window)?;
    Ok(w)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn msg(ts: i64, author: &str, text: &str) -> Message {
        Message {
            id: format!("{ts}-{author}"),
            timestamp: ts,
            author_id: author.into(),
            text: text.into(),
            is_retweet: false,
        }
    }

    #[test]
    fn slice_index_boundaries() {
        assert_eq!(slice_index(&msg(0, "a", ""), 60, 0), Some(0));
        assert_eq!(slice_index(&msg(59, "a", ""), 60, 0), Some(0));
        assert_eq!(slice_index(&msg(60, "a", ""), 60, 0), Some(1));
        assert_eq!(slice_index(&msg(219, "a", ""), 60, 100), Some(1));
        assert_eq!(slice_index(&msg(99, "a", ""), 60, 100), None);
    }

    #[test]
    fn config_validation() {
        assert!(StreamConfig::default().validate().is_ok());
        let bad = |delta, omega, k| StreamConfig { delta, omega, k, t0: None }.validate().is_err();
        assert!(bad(0, 60, 10));
        assert!(bad(60, 90, 10));
        assert!(bad(60, 0, 10));
        assert!(bad(60, 180, 1));
        assert_eq!(StreamConfig::default().slices_per_window(), 3);
        assert_eq!(StreamConfig::default().resolve_t0(125), 120);
    }

    #[test]
    fn accumulate_counts() {
        let mut s = SliceTable::new(0);
        s.accumulate(&msg(1, "A", "go go"));
        assert_eq!(s.token_count("go"), 2);
        assert_eq!(s.token_messages("go"), 1);
        assert_eq!(s.tokens["go"].timestamps, vec![1, 1]);

        s.accumulate(&msg(2, "A", "hi @b"));
        assert!(s.mention_edges.contains(&(Arc::from("a"), Arc::from("b"))));

        let before = s.tokens.len();
        s.accumulate(&msg(3, "C", ""));
        assert_eq!(s.tokens.len(), before);
        assert_eq!(s.total_messages, 3);
    }

    #[test]
    fn mention_handles() {
        assert_eq!(mention_handle("@Bob:"), Some("bob".into()));
        assert_eq!(mention_handle("@"), None);
        assert_eq!(mention_handle("bob"), None);
        assert_eq!(mention_handle("@a_b!!"), Some("a_b".into()));
    }

    fn slice_with(idx: i64, texts: &[&str]) -> Arc<SliceTable> {
        let mut s = SliceTable::new(idx);
        for (i, t) in texts.iter().enumerate() {
            s.accumulate(&msg(idx * 60 + i as i64, &format!("u{i}"), t));
        }
        Arc::new(s)
    }

    #[test]
    fn window_sums_slices() {
        let slices = vec![slice_with(0, &["x x"]), slice_with(1, &[]), slice_with(2, &["x", "x", "x"])];
        let w = build_window(&slices, 3).unwrap();
        assert_eq!(w.end_time, 2);
        assert_eq!(w.token_count("x"), 5);
        assert_eq!(w.get("x").messages, 4);
        // u0 authored in slices 0 and 2.
        assert_eq!(w.get("x").users, 3);
        assert_eq!(w.total_messages, 4);
        assert_eq!(w.sum_sq_counts, 25);
    }

    #[test]
    fn window_rejects_bad_slices() {
        let s = vec![slice_with(0, &[]), slice_with(2, &[])];
        assert!(build_window(&s, 2).is_err());
        assert!(build_window(&s[..1], 2).is_err());
    }

    #[test]
    fn single_slice_window_is_the_slice() {
        let s = slice_with(4, &["a b", "b"]);
        let w = build_window(std::slice::from_ref(&s), 1).unwrap();
        for (tok, st) in &s.tokens {
            assert_eq!(w.token_count(tok), st.count);
            assert_eq!(w.get(tok).messages, st.messages.len() as u64);
        }
    }

    fn window_at(t: i64) -> Arc<WindowStats> {
        Arc::new(build_window(&[slice_with(t, &[])], 1).unwrap())
    }

    #[test]
    fn history_eviction() {
        let mut h = History::new(10);
        h.advance(window_at(0)).unwrap();
        assert_eq!(h.len(), 1);
        for t in 1..11 {
            h.advance(window_at(t)).unwrap();
        }
        assert_eq!(h.len(), 10);
        assert_eq!(h.windows().next().unwrap().end_time, 1);

        let mut h = History::new(2);
        for t in 1..=3 {
            h.advance(window_at(t)).unwrap();
        }
        let ends: Vec<i64> = h.windows().map(|w| w.end_time).collect();
        assert_eq!(ends, vec![2, 3]);
        assert!(h.advance(window_at(3)).is_err());
    }

    #[test]
    fn windower_emits_one_window_per_slice() {
        let msgs = vec![msg(0, "a", "x"), msg(130, "b", "x"), msg(400, "c", "y")];
        let mut ends = Vec::new();
        let cfg = StreamConfig { delta: 60, omega: 180, k: 4, t0: None };
        let w = run_windows(&msgs, cfg, |h| {
            ends.push(h.newest().unwrap().end_time);
            Ok(())
        })
        .unwrap();
        // Slices 0..=6; first full window ends at slice 2.
        assert_eq!(ends, vec![2, 3, 4, 5, 6]);
        assert_eq!(w.history().len(), 4);
    }

    #[test]
    fn windower_skips_messages_before_epoch() {
        let msgs = vec![msg(10, "a", "x"), msg(200, "b", "x")];
        let cfg = StreamConfig { delta: 60, omega: 60, k: 2, t0: Some(100) };
        let w = run_windows(&msgs, cfg, |_| Ok(())).unwrap();
        assert_eq!(w.stats().before_epoch, 1);
        assert_eq!(w.stats().accepted, 1);
    }

    #[test]
    fn history_span_timestamps() {
        let msgs: Vec<Message> = (0..10).map(|i| msg(i * 30, "a", "x")).collect();
        let cfg = StreamConfig { delta: 60, omega: 120, k: 3, t0: Some(0) };
        let w = run_windows(&msgs, cfg, |_| Ok(())).unwrap();
        // Windows end at slices 2,3,4 -> span slices 1..=4, timestamps 60..=270.
        assert_eq!(w.history().token_timestamps("x"), (2..10).map(|i| i * 30).collect::<Vec<_>>());
    }

    fn arb_stream() -> impl Strategy<Value = Vec<Message>> {
        proptest::collection::vec((0i64..600, 0usize..4, proptest::collection::vec(0usize..5, 0..5)), 0..60).prop_map(
            |rows| {
                let vocab = ["a", "b", "c", "@u1", "@u2"];
                let mut msgs: Vec<Message> = rows
                    .into_iter()
                    .map(|(ts, user, toks)| {
                        let text = toks.iter().map(|&i| vocab[i]).collect::<Vec<_>>().join(" ");
                        msg(ts, &format!("u{user}"), &text)
                    })
                    .collect();
                msgs.sort_by_key(|m| m.timestamp);
                msgs
            },
        )
    }

    proptest! {
        #[test]
        fn window_counts_match_recount(msgs in arb_stream()) {
            let cfg = StreamConfig { delta: 60, omega: 180, k: 5, t0: Some(0) };
            let mut prev_slices: Option<Vec<i64>> = None;
            run_windows(&msgs, cfg, |h| {
                let w = h.newest().unwrap();
                let lo = (w.end_time - 2) * 60;
                let hi = (w.end_time + 1) * 60;
                let inside: Vec<&Message> =
                    msgs.iter().filter(|m| m.timestamp >= lo && m.timestamp < hi).collect();
                for tok in ["a", "b", "c", "@u1"] {
                    let count: u64 = inside.iter()
                        .map(|m| tokenize(&m.text).iter().filter(|t| **t == tok).count() as u64)
                        .sum();
                    let mcount = inside.iter().filter(|m| tokenize(&m.text).contains(&tok)).count() as u64;
                    let users: FxHashSet<&str> = inside.iter()
                        .filter(|m| tokenize(&m.text).contains(&tok))
                        .map(|m| m.author_id.as_str())
                        .collect();
                    let got = w.get(tok);
                    assert_eq!(got.count, count);
                    assert_eq!(got.messages, mcount);
                    assert_eq!(got.users, users.len() as u64);
                    assert!(got.users <= got.messages && got.messages <= got.count);
                }
                assert_eq!(w.total_messages, inside.len() as u64);
                let ids: Vec<i64> = w.slices.iter().map(|s| s.slice_index).collect();
                if let Some(prev) = &prev_slices {
                    let shared = ids.iter().filter(|i| prev.contains(i)).count();
                    assert_eq!(shared, 2);
                }
                prev_slices = Some(ids);
                assert!(h.len() <= 5);
                Ok(())
            }).unwrap();
        }
    }
}

// SPDX-License-Identifier: Apache-2.0

//! Volume-differencing baselines. RawBurst differences per-slice message
//! counts against their k-slice moving average; TokenBurst does the same
//! with the summed frequency of a seed lexicon after letter-run collapse.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::ScorePoint;
use crate::ingest::{tokenize, Message};
use crate::windowing::StreamConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sport {
    WorldSeries,
    SuperBowl,
    WorldCup,
}

impl Sport {
    pub const ALL: [Sport; 3] = [Sport::WorldSeries, Sport::SuperBowl, Sport::WorldCup];

    pub fn seeds(self) -> &'static [&'static str] {
        match self {
            Sport::WorldSeries => &["run", "home", "homerun"],
            Sport::SuperBowl => &["score", "touchdown", "td", "fieldgoal", "points"],
            Sport::WorldCup => {
                &["goal", "gol", "golazo", "score", "foul", "penalty", "card", "red", "yellow", "points"]
            }
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "worldseries" => Some(Sport::WorldSeries),
            "superbowl" => Some(Sport::SuperBowl),
            "worldcup" => Some(Sport::WorldCup),
            _ => None,
        }
    }
}

/// Seed tokens, stored in collapsed form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedLexicon {
    canonical: BTreeSet<String>,
}

impl SeedLexicon {
    pub fn new<I, S>(tokens: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let canonical: BTreeSet<String> =
            tokens.into_iter().map(|t| collapse_runs(t.as_ref())).filter(|t| !t.is_empty()).collect();
        if canonical.is_empty() {
            return Err(Error::Config("seed lexicon is empty".into()));
        }
        Ok(Self { canonical })
    }

    /// Union of the given sports' seeds.
    pub fn for_sports(sports: &[Sport]) -> Result<Self> {
        Self::new(sports.iter().flat_map(|s| s.seeds().iter().copied()))
    }

    /// All three sports combined.
    pub fn combined() -> Self {
        Self::for_sports(&Sport::ALL).expect("built-in seeds")
    }

    /// One token per line; blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        Self::new(text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#')))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    pub fn contains_canonical(&self, canonical: &str) -> bool {
        self.canonical.contains(canonical)
    }

    /// Whether `token` collapses onto a seed.
    pub fn matches(&self, token: &str) -> bool {
        self.canonical.contains(&collapse_runs(token))
    }

    pub fn canonical(&self) -> impl Iterator<Item = &str> {
        self.canonical.iter().map(String::as_str)
    }
}

/// Lowercases, trims non-alphanumeric characters from both ends and
/// squeezes every run of a repeated letter to one letter.
pub fn collapse_runs(token: &str) -> String {
    let lower = token.to_lowercase();
    let trimmed = lower.trim_matches(|c: char| !c.is_alphanumeric());
    let mut out = String::with_capacity(trimmed.len());
    let mut prev: Option<char> = None;
    for c in trimmed.chars() {
        if c.is_alphabetic() && prev == Some(c) {
            continue;
        }
        out.push(c);
        prev = Some(c);
    }
    out
}

/// Per-slice tallies of a message stream, starting at slice 0.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceCounts {
    pub t0: i64,
    pub delta: i64,
    /// Non-retweet messages per slice.
    pub messages: Vec<u64>,
    /// Seed-token occurrences per slice.
    pub seed_tokens: Vec<u64>,
    /// All token occurrences per slice.
    pub tokens: Vec<u64>,
}

impl SliceCounts {
    /// Tallies `messages` (sorted by time) into slices of `stream.delta`
    /// seconds from the configured or inferred epoch.
    pub fn tally(messages: &[Message], stream: &StreamConfig, lexicon: &SeedLexicon) -> Self {
        let t0 = messages.first().map_or(0, |m| stream.t0.unwrap_or_else(|| stream.resolve_t0(m.timestamp)));
        let mut c = Self { t0, delta: stream.delta, messages: Vec::new(), seed_tokens: Vec::new(), tokens: Vec::new() };
        for m in messages {
            if m.is_retweet || m.timestamp < t0 {
                continue;
            }
            let t = ((m.timestamp - t0) / stream.delta) as usize;
            if t >= c.messages.len() {
                c.messages.resize(t + 1, 0);
                c.seed_tokens.resize(t + 1, 0);
                c.tokens.resize(t + 1, 0);
            }
            c.messages[t] += 1;
            for tok in tokenize(&m.text) {
                c.tokens[t] += 1;
                if lexicon.matches(tok) {
                    c.seed_tokens[t] += 1;
                }
            }
        }
        c
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }
}

/// Non-retweet messages in slice `t`.
pub fn raw_freq(t: usize, counts: &SliceCounts) -> u64 {
    counts.messages.get(t).copied().unwrap_or(0)
}

/// Seed-token occurrences in slice `t`.
pub fn token_freq(t: usize, counts: &SliceCounts) -> u64 {
    counts.seed_tokens.get(t).copied().unwrap_or(0)
}

/// Seed-token occurrences in one text.
pub fn count_seed_tokens(text: &str, lexicon: &SeedLexicon) -> u64 {
    tokenize(text).into_iter().filter(|t| lexicon.matches(t)).count() as u64
}

/// How the moving average treats the current slice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum AverageMode {
    /// Mean of the k slices strictly before `t`.
    #[default]
    Prior,
    /// Sum over slices `t-k ..= t` divided by `k`.
    Literal,
}

/// Moving average at `t`, or `None` during warm-up (`t < k`).
pub fn window_avg(k: usize, t: usize, series: &[f64], mode: AverageMode) -> Option<f64> {
    if k == 0 || t < k || t >= series.len() {
        return None;
    }
    let terms = match mode {
        AverageMode::Prior => &series[t - k..t],
        AverageMode::Literal => &series[t - k..=t],
    };
    Some(terms.iter().sum::<f64>() / k as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaselineMethod {
    RawBurst,
    TokenBurst,
}

impl BaselineMethod {
    pub fn name(self) -> &'static str {
        match self {
            BaselineMethod::RawBurst => "rawburst",
            BaselineMethod::TokenBurst => "tokenburst",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeltaPoint {
    pub t: i64,
    pub time: i64,
    pub freq: f64,
    /// `None` during warm-up.
    pub avg: Option<f64>,
    pub delta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeltaSeries {
    pub method: BaselineMethod,
    pub k: usize,
    pub points: Vec<DeltaPoint>,
}

/// `freq(t) - avg(k, t)` for every slice.
pub fn delta_series(method: BaselineMethod, counts: &SliceCounts, k: usize, mode: AverageMode) -> DeltaSeries {
    let freq: Vec<f64> = match method {
        BaselineMethod::RawBurst => &counts.messages,
        BaselineMethod::TokenBurst => &counts.seed_tokens,
    }
    .iter()
    .map(|&c| c as f64)
    .collect();
    let points = (0..freq.len())
        .map(|t| {
            let avg = window_avg(k, t, &freq, mode);
            DeltaPoint {
                t: t as i64,
                time: counts.t0 + t as i64 * counts.delta,
                freq: freq[t],
                avg,
                delta: avg.map(|a| freq[t] - a),
            }
        })
        .collect();
    DeltaSeries { method, k, points }
}

/// `Δ(t, k)` for a single slice, or `None` during warm-up.
pub fn raw_delta(t: usize, k: usize, counts: &SliceCounts) -> Option<f64> {
    let freq: Vec<f64> = counts.messages.iter().map(|&c| c as f64).collect();
    window_avg(k, t, &freq, AverageMode::Prior).map(|a| freq[t] - a)
}

impl DeltaSeries {
    /// Score series for the evaluator; warm-up slices are flagged.
    pub fn score_points(&self) -> Vec<ScorePoint> {
        self.points
            .iter()
            .map(|p| ScorePoint { t: p.t, time: p.time, score: p.delta.unwrap_or(0.0), warm_up: p.delta.is_none() })
            .collect()
    }

    /// `t,time,freq,avg,delta`; warm-up rows leave `avg` and `delta` empty.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let wrap = |e: csv::Error| Error::InvalidInput(e.to_string());
        w.write_record(["t", "time", "freq", "avg", "delta"]).map_err(wrap)?;
        let opt = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        for p in &self.points {
            w.write_record([p.t.to_string(), p.time.to_string(), p.freq.to_string(), opt(p.avg), opt(p.delta)])
                .map_err(wrap)?;
        }
        w.flush().map_err(|e| Error::InvalidInput(e.to_string()))
    }

    pub fn read_csv<R: std::io::Read>(reader: R, method: BaselineMethod, k: usize) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let mut points = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let bad = |what: &str| Error::InvalidInput(format!("delta series row {}: {what}", i + 1));
            let rec = rec.map_err(|e| bad(&e.to_string()))?;
            let num = |j: usize| rec.get(j).unwrap_or("").to_string();
            let opt = |s: String| -> Result<Option<f64>> {
                if s.is_empty() {
                    Ok(None)
                } else {
                    s.parse().map(Some).map_err(|_| bad("bad number"))
                }
            };
            points.push(DeltaPoint {
                t: num(0).parse().map_err(|_| bad("bad t"))?,
                time: num(1).parse().map_err(|_| bad("bad time"))?,
                freq: num(2).parse().map_err(|_| bad("bad freq"))?,
                avg: opt(num(3))?,
                delta: opt(num(4))?,
            });
        }
        Ok(Self { method, k, points })
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn msg(ts: i64, text: &str, rt: bool) -> Message {
        Message { id: ts.to_string(), timestamp: ts, author_id: "u".into(), text: text.into(), is_retweet: rt }
    }

    #[test]
    fn collapse_examples() {
        assert_eq!(collapse_runs("gooaallll"), "goal");
        assert_eq!(collapse_runs("GOAL!!"), "goal");
        assert_eq!(collapse_runs("golazo"), "golazo");
        assert_eq!(collapse_runs("goooaaal"), "goal");
        assert_eq!(collapse_runs("golazo-x"), "golazo-x");
        assert_eq!(collapse_runs("#Goool"), "gol");
        assert_eq!(collapse_runs("2002"), "2002");
    }

    #[test]
    fn lexicon_seeds() {
        let wc = SeedLexicon::for_sports(&[Sport::WorldCup]).unwrap();
        assert_eq!(count_seed_tokens("goal gol goooal", &wc), 3);
        assert_eq!(count_seed_tokens("nothing to see", &wc), 0);
        let all = SeedLexicon::combined();
        assert!(all.matches("touchdown") && all.matches("HOMERUN") && all.matches("goooool"));
        assert!(SeedLexicon::parse("# none\n\n").is_err());
        let f = SeedLexicon::parse("goal\n# c\n").unwrap();
        assert_eq!(f.canonical().collect::<Vec<_>>(), vec!["goal"]);
    }

    #[test]
    fn retweets_not_counted() {
        let mut ms: Vec<Message> = (0..7).map(|i| msg(i, "x", i < 2)).collect();
        ms.push(msg(65, "y", false));
        let c = SliceCounts::tally(&ms, &StreamConfig { t0: Some(0), ..Default::default() }, &SeedLexicon::combined());
        assert_eq!(raw_freq(0, &c), 5);
        assert_eq!(raw_freq(1, &c), 1);
        assert_eq!(raw_freq(9, &c), 0);
    }

    #[test]
    fn averages() {
        let s: Vec<f64> = (1..=11).map(f64::from).collect();
        assert_eq!(window_avg(10, 10, &s, AverageMode::Prior), Some(5.5));
        assert_eq!(window_avg(10, 10, &s, AverageMode::Literal), Some(6.6));
        assert_eq!(window_avg(10, 9, &s, AverageMode::Prior), None);
        assert_eq!(window_avg(3, 5, &[4.0; 8], AverageMode::Prior), Some(4.0));
    }

    #[test]
    fn spike_delta_is_twice_baseline() {
        let mut counts =
            SliceCounts { t0: 0, delta: 60, messages: vec![100; 15], seed_tokens: vec![0; 15], tokens: vec![0; 15] };
        counts.messages[12] = 300;
        assert_eq!(raw_delta(12, 10, &counts), Some(200.0));
        assert_eq!(raw_delta(11, 10, &counts), Some(0.0));
        assert_eq!(raw_delta(9, 10, &counts), None);
        let pts = delta_series(BaselineMethod::RawBurst, &counts, 10, AverageMode::Prior).score_points();
        assert!(pts[..10].iter().all(|p| p.warm_up));
        assert_eq!(pts[12].score, 200.0);
    }

    #[test]
    fn csv_round_trip() {
        let counts = SliceCounts {
            t0: 600,
            delta: 60,
            messages: vec![3, 1, 4, 1, 5],
            seed_tokens: vec![0; 5],
            tokens: vec![0; 5],
        };
        let s = delta_series(BaselineMethod::RawBurst, &counts, 2, AverageMode::Prior);
        let mut buf = Vec::new();
        s.write_csv(&mut buf).unwrap();
        assert_eq!(DeltaSeries::read_csv(&buf[..], BaselineMethod::RawBurst, 2).unwrap(), s);
    }

    proptest! {
        #[test]
        fn collapse_idempotent(s in "\\PC{0,12}") {
            let once = collapse_runs(&s);
            prop_assert_eq!(collapse_runs(&once), once);
        }

        #[test]
        fn seed_count_bounded_by_tokens(words in prop::collection::vec("(goal|gooal|gol|foo|bar|x)", 0..30)) {
            let ms: Vec<Message> = words.iter().enumerate().map(|(i, w)| msg(i as i64, w, false)).collect();
            let c = SliceCounts::tally(&ms, &StreamConfig { t0: Some(0), ..Default::default() }, &SeedLexicon::combined());
            for t in 0..c.len() {
                prop_assert!(token_freq(t, &c) <= c.tokens[t]);
            }
        }
    }
}

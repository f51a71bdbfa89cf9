// SPDX-License-Identifier: Apache-2.0

//! Deterministic synthetic message streams with planted token bursts.
//!
//! Background tokens follow a Zipf law over a vocabulary whose top ranks are
//! the shipped English and Spanish stop words. Each second carries exactly
//! `rate` messages (times any active volume boost). Each distinct planted
//! token list is one channel: a message carries one of its variants with
//! probability `planted_base_prob`, multiplied by the largest `intensity`
//! among the channel's active bursts.

use std::io::Write;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Zipf};
use serde::{Deserialize, Serialize};

use crate::classify::training::shipped_stopwords_ordered;
use crate::error::{Error, Result};
use crate::eval::{GroundTruth, Moment};
use crate::ingest::{to_record_line, Message};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BurstSpec {
    /// Seconds from the stream start.
    pub start: i64,
    /// Seconds.
    pub length: i64,
    /// Surface variants; each planted occurrence picks one uniformly.
    pub tokens: Vec<String>,
    /// Multiplier on the planted-token probability while active.
    pub intensity: f64,
    /// Multiplier on the message rate while active.
    pub volume_boost: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub name: String,
    /// Epoch seconds of the first message.
    pub start_time: i64,
    /// Seconds.
    pub duration: i64,
    /// Messages per second.
    pub rate: u32,
    pub vocab_size: usize,
    pub zipf_exponent: f64,
    pub user_pool: usize,
    pub min_tokens: usize,
    pub max_tokens: usize,
    /// Chance that a message mentions another user.
    pub mention_prob: f64,
    /// Per-message chance of a planted token outside its burst.
    pub planted_base_prob: f64,
    /// Slice length used to place ground-truth moments.
    pub delta: i64,
    pub bursts: Vec<BurstSpec>,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            name: "synthetic".into(),
            start_time: 1_404_000_000,
            duration: 1800,
            rate: 66,
            vocab_size: 5000,
            zipf_exponent: 1.1,
            user_pool: 50_000,
            min_tokens: 4,
            max_tokens: 12,
            mention_prob: 0.1,
            planted_base_prob: 0.002,
            delta: 60,
            bursts: Vec::new(),
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.rate == 0 || self.duration <= 0 || self.delta <= 0 {
            return bad("rate, duration and delta must be positive".into());
        }
        if self.vocab_size == 0 || self.user_pool == 0 {
            return bad("vocab_size and user_pool must be positive".into());
        }
        if self.zipf_exponent.is_nan() || self.zipf_exponent <= 0.0 {
            return bad("zipf_exponent must be positive".into());
        }
        if self.min_tokens == 0 || self.min_tokens > self.max_tokens {
            return bad("need 1 <= min_tokens <= max_tokens".into());
        }
        for p in [self.mention_prob, self.planted_base_prob] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("probability {p} outside [0, 1]"));
            }
        }
        for (i, b) in self.bursts.iter().enumerate() {
            if b.tokens.is_empty() || b.tokens.iter().any(|t| t.is_empty() || t.contains(char::is_whitespace)) {
                return bad(format!("burst {i}: needs non-empty tokens without whitespace"));
            }
            if b.intensity.is_nan() || b.intensity <= 1.0 {
                return bad(format!("burst {i}: intensity must exceed 1"));
            }
            if b.volume_boost.is_nan() || b.volume_boost < 1.0 {
                return bad(format!("burst {i}: volume_boost must be >= 1"));
            }
            if b.start < 0 || b.length <= 0 || b.start + b.length > self.duration {
                return bad(format!("burst {i}: outside the stream"));
            }
        }
        Ok(())
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: Self = serde_json::from_str(s).map_err(|e| Error::Config(format!("synth config: {e}")))?;
        c.validate()?;
        Ok(c)
    }
}

/// Vocabulary by Zipf rank. Stop words (English and Spanish interleaved)
/// are spread over the top 30% of ranks, thinning out with rank so that
/// they span the same frequency range as the `w<rank>` filler words.
pub fn vocabulary(size: usize) -> Vec<String> {
    let all = shipped_stopwords_ordered();
    let en_len = crate::classify::StopWords::english().len();
    let (en, es) = all.split_at(en_len.min(all.len()));
    let mut stop = Vec::with_capacity(all.len());
    for i in 0..en.len().max(es.len()) {
        stop.extend(en.get(i).cloned());
        stop.extend(es.get(i).cloned());
    }
    let span = (size as f64 * 0.3).max(stop.len() as f64);
    let alpha = if stop.len() > 1 { span.ln() / (stop.len() as f64).ln() } else { 1.0 };
    let mut slots = vec![None; size];
    let mut next = 0usize;
    for (j, w) in stop.into_iter().enumerate() {
        let want = ((j + 1) as f64).powf(alpha).round() as usize - 1;
        let at = want.max(next);
        if at >= size {
            break;
        }
        slots[at] = Some(w);
        next = at + 1;
    }
    slots.into_iter().enumerate().map(|(r, w)| w.unwrap_or_else(|| format!("w{r}"))).collect()
}

/// Generates the stream and its ground truth (the first slice of every
/// burst).
pub fn generate(cfg: &SynthConfig) -> Result<(Vec<Message>, GroundTruth)> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let vocab = vocabulary(cfg.vocab_size);
    let zipf = Zipf::new(cfg.vocab_size as f64, cfg.zipf_exponent).map_err(|e| Error::Config(e.to_string()))?;
    let mut messages = Vec::with_capacity(cfg.rate as usize * cfg.duration as usize);
    let mut tokens: Vec<&str> = Vec::with_capacity(cfg.max_tokens + 4);
    let mut channels: Vec<&[String]> = Vec::new();
    for b in &cfg.bursts {
        if !channels.contains(&&b.tokens[..]) {
            channels.push(&b.tokens);
        }
    }

    for s in 0..cfg.duration {
        let active: Vec<&BurstSpec> =
            cfg.bursts.iter().filter(|b| (b.start..b.start + b.length).contains(&s)).collect();
        let boost = active.iter().map(|b| b.volume_boost).fold(1.0, f64::max);
        let probs: Vec<f64> = channels
            .iter()
            .map(|ch| {
                let intensity = active.iter().filter(|b| b.tokens[..] == **ch).map(|b| b.intensity).fold(1.0, f64::max);
                (cfg.planted_base_prob * intensity).min(1.0)
            })
            .collect();
        let n = (cfg.rate as f64 * boost).round() as usize;
        for _ in 0..n {
            tokens.clear();
            let author = rng.random_range(0..cfg.user_pool);
            let len = rng.random_range(cfg.min_tokens..=cfg.max_tokens);
            for _ in 0..len {
                let r = zipf.sample(&mut rng) as usize;
                tokens.push(&vocab[r.clamp(1, cfg.vocab_size) - 1]);
            }
            for (ch, &p) in channels.iter().zip(&probs) {
                if rng.random_bool(p) {
                    let v = &ch[rng.random_range(0..ch.len())];
                    let at = rng.random_range(0..=tokens.len());
                    tokens.insert(at, v);
                }
            }
            let mention =
                rng.random_bool(cfg.mention_prob).then(|| format!("@u{}", rng.random_range(0..cfg.user_pool)));
            let mut text = tokens.join(" ");
            if let Some(m) = mention {
                text.push(' ');
                text.push_str(&m);
            }
            messages.push(Message {
                id: messages.len().to_string(),
                timestamp: cfg.start_time + s,
                author_id: format!("u{author}"),
                text,
                is_retweet: false,
            });
        }
    }

    let origin = cfg.start_time.div_euclid(cfg.delta) * cfg.delta;
    let moments = cfg
        .bursts
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let t = cfg.start_time + b.start;
            Moment {
                event: cfg.name.clone(),
                time: origin + (t - origin).div_euclid(cfg.delta) * cfg.delta,
                label: format!("burst{}:{}", i + 1, b.tokens.join("|")),
            }
        })
        .collect();
    Ok((messages, GroundTruth { moments }))
}

pub fn write_jsonl<W: Write>(messages: &[Message], mut out: W) -> Result<()> {
    for m in messages {
        writeln!(out, "{}", to_record_line(m)).map_err(|e| Error::InvalidInput(e.to_string()))?;
    }
    Ok(())
}

/// Writes the stream as JSON lines and the ground truth as CSV.
pub fn write_files(messages: &[Message], truth: &GroundTruth, stream: &Path, truth_path: &Path) -> Result<()> {
    let f = std::fs::File::create(stream).map_err(|e| Error::io(stream, e))?;
    let mut w = std::io::BufWriter::new(f);
    write_jsonl(messages, &mut w)?;
    w.flush().map_err(|e| Error::io(stream, e))?;
    let f = std::fs::File::create(truth_path).map_err(|e| Error::io(truth_path, e))?;
    truth.write_csv(std::io::BufWriter::new(f))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::StopWords;

    fn small(bursts: Vec<BurstSpec>) -> SynthConfig {
        SynthConfig { duration: 600, rate: 20, vocab_size: 800, bursts, seed: 3, ..Default::default() }
    }

    fn burst(start: i64, intensity: f64) -> BurstSpec {
        BurstSpec { start, length: 60, tokens: vec!["goal".into(), "gooal".into()], intensity, volume_boost: 1.0 }
    }

    #[test]
    fn no_bursts_no_truth() {
        let (ms, truth) = generate(&small(vec![])).unwrap();
        assert!(truth.moments.is_empty());
        assert_eq!(ms.len(), 20 * 600);
    }

    #[test]
    fn exact_message_count_and_order() {
        let mut cfg = small(vec![burst(120, 5.0)]);
        cfg.bursts[0].volume_boost = 3.0;
        let (ms, truth) = generate(&cfg).unwrap();
        assert_eq!(ms.len(), 20 * 540 + 60 * 60);
        assert!(ms.windows(2).all(|w| w[0].timestamp <= w[1].timestamp));
        assert_eq!(truth.moments[0].time, cfg.start_time + 120);
    }

    #[test]
    fn same_seed_same_bytes() {
        let cfg = small(vec![burst(300, 20.0)]);
        let render = || {
            let (ms, t) = generate(&cfg).unwrap();
            let mut a = Vec::new();
            write_jsonl(&ms, &mut a).unwrap();
            t.write_csv(&mut a).unwrap();
            a
        };
        assert_eq!(render(), render());
        let mut other = cfg.clone();
        other.seed = 4;
        let (ms, _) = generate(&other).unwrap();
        let mut b = Vec::new();
        write_jsonl(&ms, &mut b).unwrap();
        assert_ne!(render(), b);
    }

    #[test]
    fn burst_slice_dominates_background() {
        let cfg = SynthConfig { duration: 1200, bursts: vec![burst(600, 20.0)], ..small(vec![]) };
        let (ms, _) = generate(&cfg).unwrap();
        let mut per_slice = vec![0u64; 20];
        for m in &ms {
            let n = m.text.split_whitespace().filter(|t| *t == "goal" || *t == "gooal").count() as u64;
            per_slice[((m.timestamp - cfg.start_time) / 60) as usize] += n;
        }
        let background: f64 =
            per_slice.iter().enumerate().filter(|(i, _)| *i != 10).map(|(_, &c)| c as f64).sum::<f64>() / 19.0;
        assert!(per_slice[10] as f64 >= 10.0 * background.max(1.0), "{per_slice:?}");
    }

    #[test]
    fn vocabulary_ranks() {
        let v = vocabulary(1000);
        assert_eq!(v.len(), 1000);
        assert_eq!(&v[..2], &["i", "de"]);
        assert!(v[999].starts_with('w'));
        let last_stop = v.iter().rposition(|w| !w.starts_with('w') || w == "was" || w == "we").unwrap();
        assert!(last_stop < 1000);
        let big = vocabulary(5000);
        let stops = StopWords::english_spanish();
        let ranks: Vec<usize> = (0..5000).filter(|&r| stops.contains(&big[r])).collect();
        assert_eq!(ranks.len(), stops.len());
        assert!((1400..=1600).contains(ranks.last().unwrap()));
        let distinct: std::collections::HashSet<_> = v.iter().collect();
        assert_eq!(distinct.len(), 1000);
    }

    #[test]
    fn rejects_bad_config() {
        assert!(generate(&small(vec![burst(580, 20.0)])).is_err());
        assert!(generate(&small(vec![burst(0, 1.0)])).is_err());
        let mut c = small(vec![]);
        c.rate = 0;
        assert!(c.validate().is_err());
    }
}

// SPDX-License-Identifier: Apache-2.0

//! Message stream ingestion.
//!
//! Streams are newline-delimited JSON, one record per line, optionally gzip
//! compressed. A record carries `id`, `timestamp` (seconds since epoch),
//! `user` (or `author` / `author_id`), `text` and an optional retweet marker
//! (`is_retweet`, `retweet`, or a `retweeted_status` object). Records whose
//! text starts with `RT @` are also treated as retweets.
//!
//! Replay drops retweets, skips malformed records with a counted warning and
//! emits the remaining messages in non-decreasing timestamp order.

use std::fmt;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::{Path, PathBuf};

use flate2::read::MultiGzDecoder;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

const GZIP_MAGIC: [u8; 2] = [0x1f, 0x8b];

/// One item of the message stream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub id: String,
    /// Seconds since epoch.
    pub timestamp: i64,
    pub author_id: String,
    pub text: String,
    pub is_retweet: bool,
}

/// Outcome of parsing a single record line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Parsed {
    Message(Message),
    Skip(String),
}

/// Parses one newline-delimited record. Never fails: malformed records come
/// back as [`Parsed::Skip`] with a reason.
pub fn parse_message(line: &str) -> Parsed {
    let value: Value = match serde_json::from_str(line.trim()) {
        Ok(v) => v,
        Err(e) => return Parsed::Skip(format!("malformed json: {e}")),
    };
    let Some(obj) = value.as_object() else {
        return Parsed::Skip("record is not an object".into());
    };

    let id = match obj.get("id") {
        Some(Value::String(s)) if !s.is_empty() => s.clone(),
        Some(Value::Number(n)) => n.to_string(),
        _ => return Parsed::Skip("missing id".into()),
    };
    let timestamp = match obj.get("timestamp").and_then(timestamp_seconds) {
        Some(ts) if ts >= 0 => ts,
        Some(_) => return Parsed::Skip(format!("negative timestamp in record {id}")),
        None => return Parsed::Skip(format!("missing timestamp in record {id}")),
    };
    let text = match obj.get("text") {
        Some(Value::String(s)) => s.clone(),
        _ => return Parsed::Skip(format!("missing text in record {id}")),
    };
    let author_id = ["user", "author", "author_id"]
        .iter()
        .find_map(|key| match obj.get(*key) {
            Some(Value::String(s)) => Some(s.clone()),
            Some(Value::Number(n)) => Some(n.to_string()),
            _ => None,
        })
        .unwrap_or_default();

    let structured_retweet = matches!(obj.get("is_retweet"), Some(Value::Bool(true)))
        || matches!(obj.get("retweet"), Some(Value::Bool(true)))
        || obj.get("retweeted_status").is_some_and(|v| !v.is_null());
    let is_retweet = structured_retweet || text.starts_with("RT @");

    Parsed::Message(Message { id, timestamp, author_id, text, is_retweet })
}

/// Integer seconds from a JSON number or numeric string; fractions are
/// truncated toward negative infinity.
fn timestamp_seconds(v: &Value) -> Option<i64> {
    match v {
        Value::Number(n) => n.as_i64().or_else(|| n.as_f64().filter(|f| f.is_finite()).map(|f| f.floor() as i64)),
        Value::String(s) => s
            .trim()
            .parse::<i64>()
            .ok()
            .or_else(|| s.trim().parse::<f64>().ok().filter(|f| f.is_finite()).map(|f| f.floor() as i64)),
        _ => None,
    }
}

/// Splits on runs of Unicode whitespace. Tokens are returned verbatim.
pub fn tokenize(text: &str) -> Vec<&str> {
    text.split_whitespace().collect()
}

/// Reader over a record file. `cursor` is the index of the next record line.
pub struct StreamSource {
    path: PathBuf,
    reader: Box<dyn BufRead>,
    cursor: usize,
    buf: Vec<u8>,
}

impl StreamSource {
    /// Opens a plain or gzip-compressed record file.
    pub fn open(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref().to_path_buf();
        let mut file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        let mut magic = [0u8; 2];
        let n = read_prefix(&mut file, &mut magic).map_err(|e| Error::io(&path, e))?;
        let file = File::open(&path).map_err(|e| Error::io(&path, e))?;
        let reader: Box<dyn BufRead> = if n == 2 && magic == GZIP_MAGIC {
            Box::new(BufReader::new(MultiGzDecoder::new(file)))
        } else {
            Box::new(BufReader::new(file))
        };
        Ok(Self { path, reader, cursor: 0, buf: Vec::new() })
    }

    pub fn cursor(&self) -> usize {
        self.cursor
    }

    /// Next record, or `None` at end of input.
    pub fn next_record(&mut self) -> Result<Option<Parsed>> {
        self.buf.clear();
        let n = self.reader.read_until(b'\n', &mut self.buf).map_err(|e| Error::io(&self.path, e))?;
        if n == 0 {
            return Ok(None);
        }
        self.cursor += 1;
        let parsed = match std::str::from_utf8(&self.buf) {
            Ok(line) if line.trim().is_empty() => Parsed::Skip("blank line".into()),
            Ok(line) => parse_message(line),
            Err(_) => Parsed::Skip("invalid utf-8".into()),
        };
        Ok(Some(parsed))
    }
}

fn read_prefix(file: &mut File, buf: &mut [u8]) -> std::io::Result<usize> {
    let mut filled = 0;
    while filled < buf.len() {
        match file.read(&mut buf[filled..])? {
            0 => break,
            n => filled += n,
        }
    }
    Ok(filled)
}

/// Line accounting for one replay.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplayStats {
    pub total: usize,
    pub emitted: usize,
    pub skipped: usize,
    pub retweets: usize,
}

impl fmt::Display for ReplayStats {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "replay: total={} emitted={} skipped={} retweets={}",
            self.total, self.emitted, self.skipped, self.retweets
        )
    }
}

/// Replays a source: drops retweets and malformed records, then stable-sorts
/// the survivors by timestamp.
pub fn replay(mut source: StreamSource) -> Result<(Vec<Message>, ReplayStats)> {
    let mut stats = ReplayStats::default();
    let mut messages = Vec::new();
    while let Some(parsed) = source.next_record()? {
        stats.total += 1;
        match parsed {
            Parsed::Message(m) if m.is_retweet => stats.retweets += 1,
            Parsed::Message(m) => messages.push(m),
            Parsed::Skip(reason) => {
                stats.skipped += 1;
                log::warn!("record {}: {reason}", source.cursor());
            }
        }
    }
    messages.sort_by_key(|m| m.timestamp);
    stats.emitted = messages.len();
    Ok((messages, stats))
}

/// Convenience wrapper around [`StreamSource::open`] and [`replay`].
pub fn replay_file(path: impl AsRef<Path>) -> Result<(Vec<Message>, ReplayStats)> {
    replay(StreamSource::open(path)?)
}

/// Serializes one message in the record format read by [`parse_message`].
pub fn to_record_line(msg: &Message) -> String {
    let mut value = serde_json::json!({
        "id": msg.id,
        "timestamp": msg.timestamp,
        "user": msg.author_id,
        "text": msg.text,
    });
    if msg.is_retweet {
        value["is_retweet"] = Value::Bool(true);
    }
    value.to_string()
}

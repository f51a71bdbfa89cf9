// SPDX-License-Identifier: Apache-2.0

//! Flat `key = value` run configuration. Command-line flags win over file
//! values, file values win over built-in defaults.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::CliError;

/// Keys accepted in a config file. Anything else is rejected so typos do not
/// silently fall back to defaults.
pub const KNOWN_KEYS: &[&str] = &[
    "delta",
    "omega",
    "k",
    "tau",
    "rho",
    "min_count",
    "lexicon",
    "seeds",
    "stopwords",
    "model",
    "rng_seed",
    "input",
    "output",
    "truth",
    "series",
    "training_set",
    "folds",
    "theta",
    "negative_windows",
    "n_trees",
    "max_features",
    "svm_c",
    "svm_gamma",
    "average",
    "method",
    "roc",
    "summary",
];

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    /// Parses `key = value` lines; `#` starts a comment, blank lines are
    /// ignored.
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::Usage(format!("config line {}: expected key = value", i + 1)))?;
            let key = key.trim().replace('-', "_");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!("config line {}: unknown key `{key}`", i + 1)));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// Flag value if given, else the parsed file value.
    pub fn pick<T: FromStr>(&self, key: &str, flag: Option<T>) -> Result<Option<T>, CliError> {
        if flag.is_some() {
            return Ok(flag);
        }
        match self.raw(key) {
            None => Ok(None),
            Some(v) => {
                v.parse().map(Some).map_err(|_| CliError::Usage(format!("config key `{key}`: cannot parse `{v}`")))
            }
        }
    }

    pub fn pick_or<T: FromStr>(&self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError> {
        Ok(self.pick(key, flag)?.unwrap_or(default))
    }

    /// Like [`pick`](Self::pick) but a missing value is a usage error naming
    /// the flag.
    pub fn require<T: FromStr>(&self, key: &str, flag: Option<T>) -> Result<T, CliError> {
        self.pick(key, flag)?.ok_or_else(|| missing(key))
    }

    /// Repeatable path flag; the file form is comma separated.
    pub fn paths(&self, key: &str, flag: &[PathBuf]) -> Vec<PathBuf> {
        if !flag.is_empty() {
            return flag.to_vec();
        }
        self.raw(key)
            .map(|v| v.split(',').map(str::trim).filter(|s| !s.is_empty()).map(PathBuf::from).collect())
            .unwrap_or_default()
    }
}

pub fn missing(key: &str) -> CliError {
    CliError::Usage(format!("missing --{} (or `{key}` in the config file)", key.replace('_', "-")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let c = ConfigFile::parse("delta = 30\n# comment\nrho=3  # trailing\n\ninput = a.jsonl, b.jsonl\n").unwrap();
        assert_eq!(c.pick_or("delta", None, 60i64).unwrap(), 30);
        assert_eq!(c.pick_or("delta", Some(15i64), 60).unwrap(), 15);
        assert_eq!(c.pick_or("rho", None, 2usize).unwrap(), 3);
        assert_eq!(c.pick_or("tau", None, 2i64).unwrap(), 2);
        assert_eq!(c.paths("input", &[]), vec![PathBuf::from("a.jsonl"), PathBuf::from("b.jsonl")]);
        assert_eq!(c.paths("input", &[PathBuf::from("x")]), vec![PathBuf::from("x")]);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(matches!(ConfigFile::parse("dleta = 3"), Err(CliError::Usage(_))));
        assert!(matches!(ConfigFile::parse("delta"), Err(CliError::Usage(_))));
        let c = ConfigFile::parse("k = ten").unwrap();
        assert!(c.pick::<usize>("k", None).is_err());
    }

    #[test]
    fn missing_names_the_flag() {
        let err = ConfigFile::default().require::<PathBuf>("training_set", None).unwrap_err();
        assert!(err.to_string().contains("--training-set"));
    }
}

//! Flat `key = value` text documents, shared by experiment configs and scene
//! dumps. One entry per line; `#` starts a comment; blank lines are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::ConfigError;

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: usize,
}

/// A parsed document. Typed accessors remove the keys they read, and
/// [`KvDocument::finish`] reports whatever is left as unknown.
#[derive(Debug, Clone, Default)]
pub struct KvDocument {
    entries: BTreeMap<String, Entry>,
}

impl KvDocument {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let content = match raw.find('#') {
                Some(pos) => &raw[..pos],
                None => raw,
            }
            .trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or(ConfigError::Syntax { line })?;
            let key = key.trim();
            if key.is_empty() || key.chars().any(char::is_whitespace) {
                return Err(ConfigError::Syntax { line });
            }
            let entry = Entry {
                value: value.trim().to_string(),
                line,
            };
            if entries.insert(key.to_string(), entry).is_some() {
                return Err(ConfigError::DuplicateKey {
                    key: key.to_string(),
                    line,
                });
            }
        }
        Ok(KvDocument { entries })
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    /// Line the key was defined on.
    pub fn line_of(&self, key: &str) -> Option<usize> {
        self.entries.get(key).map(|e| e.line)
    }

    pub fn take_str(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key).map(|e| e.value)
    }

    pub fn take<T: FromStr>(
        &mut self,
        key: &str,
        expected: &'static str,
    ) -> Result<Option<T>, ConfigError> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some(e) => e
                .value
                .parse::<T>()
                .map(Some)
                .map_err(|_| ConfigError::TypeMismatch {
                    key: key.to_string(),
                    expected,
                    found: e.value,
                }),
        }
    }

    pub fn take_f64(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        let v = self.take::<f64>(key, "a number")?;
        if let Some(x) = v {
            if !x.is_finite() {
                return Err(ConfigError::TypeMismatch {
                    key: key.to_string(),
                    expected: "a finite number",
                    found: x.to_string(),
                });
            }
        }
        Ok(v)
    }

    pub fn take_bool(&mut self, key: &str) -> Result<Option<bool>, ConfigError> {
        self.take::<bool>(key, "true or false")
    }

    /// Comma-separated list of finite numbers.
    pub fn take_f64_list(&mut self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        let Some(raw) = self.entries.remove(key) else {
            return Ok(None);
        };
        raw.value
            .split(',')
            .map(|s| {
                let s = s.trim();
                s.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| ConfigError::TypeMismatch {
                        key: key.to_string(),
                        expected: "a comma-separated list of numbers",
                        found: raw.value.clone(),
                    })
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Some)
    }

    /// Keys still present, in sorted order.
    pub fn remaining_keys(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    /// Fails on the first key no accessor consumed.
    pub fn finish(self) -> Result<(), ConfigError> {
        match self.entries.into_keys().next() {
            Some(key) => Err(ConfigError::UnknownKey { key }),
            None => Ok(()),
        }
    }
}

/// Accumulates `key = value` lines in insertion order.
#[derive(Debug, Default)]
pub struct KvWriter {
    out: String,
}

impl KvWriter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn comment(&mut self, text: &str) -> &mut Self {
        let _ = writeln!(self.out, "# {text}");
        self
    }

    pub fn entry(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        let _ = writeln!(self.out, "{key} = {value}");
        self
    }

    pub fn list(&mut self, key: &str, values: &[f64]) -> &mut Self {
        let joined = values
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(", ");
        self.entry(key, joined)
    }

    pub fn finish(self) -> String {
        self.out
    }
}

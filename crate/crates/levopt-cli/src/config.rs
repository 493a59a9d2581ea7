//! Flat key-value config files.
//!
//! The format is one `key = value` pair per line; blank lines and lines
//! starting with `#` are ignored. Keys are consumed by the caller through
//! the typed `take_*` accessors, and [`ConfigMap::finish`] rejects any key
//! nobody asked for — a misspelled knob is an error, never a silent
//! default.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use thiserror::Error;

/// Errors from parsing or interpreting a config file.
#[derive(Debug, Error)]
pub enum ConfigError {
    /// A line that is neither blank, a comment, nor `key = value`.
    #[error("config line {line}: expected `key = value`, got `{text}`")]
    Malformed {
        /// 1-based line number.
        line: usize,
        /// The offending line.
        text: String,
    },
    /// The same key appeared twice.
    #[error("config: duplicate key `{0}`")]
    Duplicate(String),
    /// A value failed to parse as its expected type.
    #[error("config key `{key}`: {reason}")]
    BadValue {
        /// The key whose value is bad.
        key: String,
        /// Why it failed.
        reason: String,
    },
    /// A required key is absent.
    #[error("config: missing required key `{0}`")]
    Missing(String),
    /// Keys nobody consumed (misspellings, stale knobs).
    #[error("config: unknown key(s): {0}")]
    Unknown(String),
    /// The file could not be read.
    #[error("config: cannot read file: {0}")]
    Io(#[from] std::io::Error),
}

/// Parsed key-value pairs with consumption tracking.
#[derive(Debug, Default)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    /// Parse config text. Later callers pull values out with `take_*`.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(ConfigError::Malformed { line: i + 1, text: raw.to_string() });
            };
            let key = key.trim().to_string();
            let value = value.trim().to_string();
            if key.is_empty() {
                return Err(ConfigError::Malformed { line: i + 1, text: raw.to_string() });
            }
            if entries.insert(key.clone(), value).is_some() {
                return Err(ConfigError::Duplicate(key));
            }
        }
        Ok(ConfigMap { entries })
    }

    /// Read and parse a config file.
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        Ok(Self::parse(&std::fs::read_to_string(path)?)?)
    }

    /// Remove and return the raw value for `key`, if present.
    pub fn take(&mut self, key: &str) -> Option<String> {
        self.entries.remove(key)
    }

    /// Remove and parse the value for `key`.
    pub fn take_parse<T>(&mut self, key: &str) -> Result<Option<T>, ConfigError>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.entries.remove(key) {
            None => Ok(None),
            Some(v) => v.parse::<T>().map(Some).map_err(|e| ConfigError::BadValue {
                key: key.to_string(),
                reason: format!("`{v}`: {e}"),
            }),
        }
    }

    /// Remove and parse a boolean (`true/false/yes/no/1/0`).
    pub fn take_bool(&mut self, key: &str) -> Result<Option<bool>, ConfigError> {
        match self.entries.remove(key) {
            None => Ok(None),
            Some(v) => match v.to_ascii_lowercase().as_str() {
                "true" | "yes" | "1" => Ok(Some(true)),
                "false" | "no" | "0" => Ok(Some(false)),
                _ => Err(ConfigError::BadValue {
                    key: key.to_string(),
                    reason: format!("`{v}`: expected true/false"),
                }),
            },
        }
    }

    /// Remove and parse a comma-separated list.
    pub fn take_list<T>(&mut self, key: &str) -> Result<Option<Vec<T>>, ConfigError>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.entries.remove(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|item| {
                    let item = item.trim();
                    item.parse::<T>().map_err(|e| ConfigError::BadValue {
                        key: key.to_string(),
                        reason: format!("`{item}`: {e}"),
                    })
                })
                .collect::<Result<Vec<T>, _>>()
                .map(Some),
        }
    }

    /// Fail on any key that was never consumed.
    pub fn finish(self) -> Result<(), ConfigError> {
        if self.entries.is_empty() {
            Ok(())
        } else {
            let keys: Vec<&str> = self.entries.keys().map(String::as_str).collect();
            Err(ConfigError::Unknown(keys.join(", ")))
        }
    }
}

//! Flat `key = value` configuration files.
//!
//! A config file supplies defaults for long options of any subcommand;
//! values given on the command line win. Lines starting with `#` and blank
//! lines are ignored. Keys are spelled exactly like the long option they
//! back (for example `per-attribute = 12`).

use std::collections::HashMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use cbound::{Error, Result};

#[derive(Debug, Default)]
pub struct Config {
    values: HashMap<String, String>,
}

impl Config {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut values = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::Parse {
                    line: i as u64 + 1,
                    message: format!("expected key = value, got {line:?}"),
                });
            };
            let key = key.trim().to_string();
            if key.is_empty() {
                return Err(Error::Parse {
                    line: i as u64 + 1,
                    message: "empty config key".into(),
                });
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    fn parse<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|e| Error::InvalidInput {
                context: format!("config key {key}: cannot parse {raw:?}: {e}"),
            }),
        }
    }

    /// Command-line value, else config value, else the built-in default.
    pub fn resolve<T>(&self, cli: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(match cli {
            Some(v) => v,
            None => self.parse(key)?.unwrap_or(default),
        })
    }

    /// Command-line value, else config value, else nothing.
    pub fn resolve_opt<T>(&self, cli: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match cli {
            Some(v) => Ok(Some(v)),
            None => self.parse(key),
        }
    }

    /// A boolean switch: set on the command line, or `key = true` in the
    /// config.
    pub fn resolve_flag(&self, cli: bool, key: &str) -> Result<bool> {
        if cli {
            return Ok(true);
        }
        Ok(self.parse::<bool>(key)?.unwrap_or(false))
    }
}

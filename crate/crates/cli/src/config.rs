//! Flat key=value config files mirroring the CLI flags.
//!
//! A config file assigns defaults for the subcommand it is passed to; flags
//! given on the command line win. Lines are `key=value`, `#` starts a
//! comment, keys are the long flag names.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use toprank::{Error, Result};

/// Parsed config file contents.
#[derive(Debug, Default)]
pub struct Overlay {
    values: BTreeMap<String, String>,
}

impl Overlay {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path)?;
        let mut values = BTreeMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(Error::Parse {
                line: idx + 1,
                msg: format!("expected 'key=value', found '{line}'"),
            })?;
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    fn get<T>(&self, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse().map(Some).map_err(|e| {
                Error::Config(format!("config key '{key}': cannot parse '{raw}': {e}"))
            }),
        }
    }

    /// CLI value if given, else the config value, else the default.
    pub fn resolve<T>(&self, cli: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        match cli {
            Some(v) => Ok(v),
            None => Ok(self.get(key)?.unwrap_or(default)),
        }
    }

    /// CLI value if given, else the config value, else an error.
    pub fn require<T>(&self, cli: Option<T>, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        match cli {
            Some(v) => Ok(v),
            None => self.get(key)?.ok_or_else(|| {
                Error::Config(format!("missing required option '--{key}' (or config key)"))
            }),
        }
    }

    /// Optional value: CLI, then config, then none.
    pub fn optional<T>(&self, cli: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        match cli {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }
}

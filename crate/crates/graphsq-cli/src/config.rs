//! Config-file loading and flag merging.
//!
//! The config source is a plain `key = value` text file (one pair per line,
//! `#` comments); keys are the long flag names. Flags win over file values,
//! and the merged effective config is echoed into the run manifest so there
//! is never ambiguity about what actually ran.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use crate::{CliError, CliResult};

pub fn parse_config_file(path: &Path) -> CliResult<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            CliError::usage(format!(
                "{}:{}: expected `key = value`, got {raw:?}",
                path.display(),
                lineno + 1
            ))
        })?;
        map.insert(key.trim().to_string(), value.trim().to_string());
    }
    Ok(map)
}

/// Merges CLI flags with file values and records every resolved setting.
pub struct Resolver {
    file: BTreeMap<String, String>,
    effective: BTreeMap<String, String>,
}

impl Resolver {
    pub fn load(config: Option<&Path>) -> CliResult<Self> {
        let file = match config {
            Some(p) => parse_config_file(p)?,
            None => BTreeMap::new(),
        };
        Ok(Resolver {
            file,
            effective: BTreeMap::new(),
        })
    }

    /// Flag value if present, else the file value parsed as `T`.
    pub fn get<T: FromStr + Display>(&mut self, cli: Option<T>, key: &str) -> CliResult<Option<T>> {
        let value = match cli {
            Some(v) => Some(v),
            None => match self.file.get(key) {
                Some(raw) => Some(raw.parse::<T>().map_err(|_| {
                    CliError::usage(format!("config key {key}: cannot parse {raw:?}"))
                })?),
                None => None,
            },
        };
        if let Some(v) = &value {
            self.effective.insert(key.to_string(), v.to_string());
        }
        Ok(value)
    }

    pub fn get_or<T: FromStr + Display>(
        &mut self,
        cli: Option<T>,
        key: &str,
        default: T,
    ) -> CliResult<T> {
        Ok(match self.get(cli, key)? {
            Some(v) => v,
            None => {
                self.effective.insert(key.to_string(), default.to_string());
                default
            }
        })
    }

    pub fn require<T: FromStr + Display>(&mut self, cli: Option<T>, key: &str) -> CliResult<T> {
        self.get(cli, key)?
            .ok_or_else(|| CliError::usage(format!("missing required parameter --{key}")))
    }

    /// Record a setting that was computed rather than parsed.
    pub fn note(&mut self, key: &str, value: impl Display) {
        self.effective.insert(key.to_string(), value.to_string());
    }

    pub fn effective(&self) -> &BTreeMap<String, String> {
        &self.effective
    }
}

/// Parse a comma-separated list.
pub fn parse_list<T: FromStr>(raw: &str, what: &str) -> CliResult<Vec<T>> {
    raw.split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|_| CliError::usage(format!("bad {what} entry: {s:?}")))
        })
        .collect()
}

/// Output directory: flag, else `GRAPHSQ_OUT_DIR`, else the current dir.
pub fn out_dir(flag: Option<std::path::PathBuf>) -> std::path::PathBuf {
    flag.or_else(|| std::env::var_os("GRAPHSQ_OUT_DIR").map(Into::into))
        .unwrap_or_else(|| ".".into())
}

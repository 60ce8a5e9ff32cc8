//! Plain-text `key=value` configuration files.
//!
//! UTF-8 lines; `#` starts a comment line; blank lines ignored; unknown
//! keys rejected. Command-line flags take precedence over config values,
//! which take precedence over built-in defaults.

use std::collections::HashMap;
use std::path::Path;

use crate::CliError;

/// Every key any subcommand understands; anything else is rejected.
const KNOWN_KEYS: &[&str] = &[
    // shared detector / evaluation parameters
    "process",
    "convention",
    "mg",
    "E",
    "c",
    "lambda",
    "L",
    "lp",
    "method",
    "template",
    "cutoff",
    "scale",
    // sweep controls
    "axis",
    "min",
    "max",
    "count",
    "spacing",
    "conventions",
    "output",
    // figure controls
    "recipe",
    "outdir",
    "points",
    "mass_min",
    "mass_max",
    "gap_min",
    "gap_max",
    "lp_min",
    "lp_max",
    "fixed_gap",
    "fixed_lp",
];

#[derive(Debug, Clone, Default)]
pub struct Config {
    values: HashMap<String, String>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::InvalidParams(format!(
                    "config line {}: expected key=value, got {line:?}",
                    lineno + 1
                )));
            };
            let key = key.trim();
            let value = value.trim();
            if !KNOWN_KEYS.contains(&key) {
                return Err(CliError::InvalidParams(format!(
                    "config line {}: unknown key {key:?}",
                    lineno + 1
                )));
            }
            values.insert(key.to_string(), value.to_string());
        }
        Ok(Self { values })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    pub fn get_f64(&self, key: &str) -> Result<Option<f64>, CliError> {
        self.get(key)
            .map(|s| {
                s.parse::<f64>().map_err(|_| {
                    CliError::InvalidParams(format!("config key {key} is not a number: {s:?}"))
                })
            })
            .transpose()
    }

    pub fn get_usize(&self, key: &str) -> Result<Option<usize>, CliError> {
        self.get(key)
            .map(|s| {
                s.parse::<usize>().map_err(|_| {
                    CliError::InvalidParams(format!("config key {key} is not an integer: {s:?}"))
                })
            })
            .transpose()
    }
}

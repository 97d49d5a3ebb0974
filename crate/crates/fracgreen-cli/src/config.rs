//! Flat key = value run-configuration files.
//!
//! One assignment per line, `#` starts a comment, keys are case-sensitive.
//! Every command documents its keys in the README; unknown keys are rejected
//! so typos fail loudly.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

#[derive(Debug)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "config: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

pub struct Config {
    map: BTreeMap<String, String>,
    path: String,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
        let mut map = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(ConfigError(format!(
                    "{}:{}: expected `key = value`, got `{raw}`",
                    path.display(),
                    lineno + 1
                )));
            };
            map.insert(k.trim().to_string(), v.trim().to_string());
        }
        Ok(Config {
            map,
            path: path.display().to_string(),
        })
    }

    pub fn require_known_keys(&self, known: &[&str]) -> Result<(), ConfigError> {
        for k in self.map.keys() {
            if !known.contains(&k.as_str()) {
                return Err(ConfigError(format!(
                    "{}: unknown key `{k}` (known: {})",
                    self.path,
                    known.join(", ")
                )));
            }
        }
        Ok(())
    }

    pub fn get_str(&self, key: &str) -> Result<&str, ConfigError> {
        self.map
            .get(key)
            .map(|s| s.as_str())
            .ok_or_else(|| ConfigError(format!("{}: missing key `{key}`", self.path)))
    }

    pub fn get_str_or(&self, key: &str, default: &'static str) -> &str {
        self.map.get(key).map(|s| s.as_str()).unwrap_or(default)
    }

    pub fn get_f64(&self, key: &str) -> Result<f64, ConfigError> {
        self.get_str(key)?
            .parse()
            .map_err(|e| ConfigError(format!("{}: key `{key}`: {e}", self.path)))
    }

    pub fn get_f64_or(&self, key: &str, default: f64) -> Result<f64, ConfigError> {
        match self.map.get(key) {
            None => Ok(default),
            Some(s) => s
                .parse()
                .map_err(|e| ConfigError(format!("{}: key `{key}`: {e}", self.path))),
        }
    }

    pub fn get_usize(&self, key: &str) -> Result<usize, ConfigError> {
        self.get_str(key)?
            .parse()
            .map_err(|e| ConfigError(format!("{}: key `{key}`: {e}", self.path)))
    }

    pub fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    /// Comma-separated list value.
    pub fn get_list(&self, key: &str) -> Result<Vec<String>, ConfigError> {
        Ok(self
            .get_str(key)?
            .split(',')
            .map(|s| s.trim().to_string())
            .filter(|s| !s.is_empty())
            .collect())
    }
}

/// Inclusive linear range with `count` points (count = 1 pins to `start`).
pub fn linear_range(start: f64, stop: f64, count: usize) -> Result<Vec<f64>, ConfigError> {
    if count == 0 {
        return Err(ConfigError("empty range: count must be >= 1".into()));
    }
    if count == 1 {
        return Ok(vec![start]);
    }
    let step = (stop - start) / (count as f64 - 1.0);
    Ok((0..count).map(|i| start + step * i as f64).collect())
}

//! Flat `key = value` config files and flag merging.
//!
//! Precedence: built-in defaults, then the config file, then explicit CLI
//! flags. The effective values are echoed into `meta.json`.

use std::collections::HashMap;
use std::path::Path;

use anyhow::{Context, Result};

use crate::UsageError;

#[derive(Debug, Default, Clone)]
pub struct IniConfig {
    values: HashMap<String, String>,
}

impl IniConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config file {}", path.display()))?;
        let mut values = HashMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') || line.starts_with(';') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(UsageError(format!(
                    "{}:{}: expected 'key = value'",
                    path.display(),
                    lineno + 1
                ))
                .into());
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(IniConfig { values })
    }

    pub fn get<T: std::str::FromStr>(&self, key: &str) -> Result<Option<T>> {
        match self.values.get(key) {
            None => Ok(None),
            Some(raw) => raw.parse::<T>().map(Some).map_err(|_| {
                UsageError(format!("config key '{key}': cannot parse value '{raw}'")).into()
            }),
        }
    }
}

/// Flag value if given, else config value, else default.
pub fn resolve<T: std::str::FromStr + Clone>(
    flag: &Option<T>,
    config: &IniConfig,
    key: &str,
    default: T,
) -> Result<T> {
    if let Some(v) = flag {
        return Ok(v.clone());
    }
    Ok(config.get::<T>(key)?.unwrap_or(default))
}

//! Flat key-value configuration with flag overrides; flags win.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use anyhow::{bail, Context, Result};

/// Key-value settings merged from a config file and command-line flags.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Settings {
    /// Parse `key = value` lines; `#` starts a comment.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let mut values = BTreeMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                bail!("config line {}: expected key = value", lineno + 1);
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Settings { values })
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        match path {
            Some(p) => Self::from_file(p),
            None => Ok(Settings::default()),
        }
    }

    /// Flag value wins, then config file, then the built-in default.
    pub fn resolve<T: FromStr + ToString>(
        &self,
        key: &str,
        flag: Option<T>,
        default: T,
    ) -> Result<T> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.values.get(key) {
            Some(raw) => raw
                .parse::<T>()
                .map_err(|_| anyhow::anyhow!("config key {key}: cannot parse {raw:?}")),
            None => Ok(default),
        }
    }

    /// Snapshot of the effective configuration for the manifest.
    pub fn snapshot(&self, effective: &[(&str, String)]) -> BTreeMap<String, String> {
        let mut map = self.values.clone();
        for (key, value) in effective {
            map.insert((*key).to_string(), value.clone());
        }
        map
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn flags_beat_config_beats_default() {
        let mut file = tempfile::NamedTempFile::new().unwrap();
        writeln!(file, "seed = 7\nratio = 2.5 # comment").unwrap();
        let settings = Settings::from_file(file.path()).unwrap();
        assert_eq!(settings.resolve("seed", Some(9u64), 0).unwrap(), 9);
        assert_eq!(settings.resolve("seed", None, 0u64).unwrap(), 7);
        assert_eq!(settings.resolve("ratio", None, 1.0f64).unwrap(), 2.5);
        assert_eq!(settings.resolve("missing", None, 4u32).unwrap(), 4);
    }
}

//! Flat key-value run configuration.
//!
//! A config file holds one `key = value` pair per line (`#` comments and
//! blank lines ignored); keys match the long flag names. Command-line
//! flags always win over file values. The resolved configuration is
//! echoed into the JSON sidecar so every run can be replayed.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

pub struct Config {
    file: BTreeMap<String, String>,
    resolved: BTreeMap<String, String>,
}

impl Config {
    pub fn empty() -> Self {
        Self { file: BTreeMap::new(), resolved: BTreeMap::new() }
    }

    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
        let mut file = BTreeMap::new();
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| format!("{}:{}: expected key = value", path.display(), ln + 1))?;
            file.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { file, resolved: BTreeMap::new() })
    }

    /// Flag > config file > default; records the winning value.
    pub fn resolve<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, String>
    where
        T: FromStr + Display,
    {
        let value = if let Some(v) = flag {
            v
        } else if let Some(raw) = self.file.get(key) {
            raw.parse::<T>().map_err(|_| format!("config key {key}: cannot parse `{raw}`"))?
        } else {
            default
        };
        self.resolved.insert(key.to_string(), value.to_string());
        Ok(value)
    }

    /// Optional value: flag > config file > none.
    pub fn resolve_opt<T>(&mut self, key: &str, flag: Option<T>) -> Result<Option<T>, String>
    where
        T: FromStr + Display,
    {
        let value = if let Some(v) = flag {
            Some(v)
        } else if let Some(raw) = self.file.get(key) {
            Some(raw.parse::<T>().map_err(|_| format!("config key {key}: cannot parse `{raw}`"))?)
        } else {
            None
        };
        if let Some(v) = &value {
            self.resolved.insert(key.to_string(), v.to_string());
        }
        Ok(value)
    }

    pub fn note(&mut self, key: &str, value: impl Display) {
        self.resolved.insert(key.to_string(), value.to_string());
    }

    /// The effective configuration, for the JSON sidecar.
    pub fn echo(&self) -> &BTreeMap<String, String> {
        &self.resolved
    }
}

/// Parses a comma-separated α grid.
pub fn parse_alpha_grid(text: &str) -> Result<Vec<f64>, String> {
    let values: Result<Vec<f64>, _> =
        text.split(',').map(|t| t.trim().parse::<f64>()).collect();
    let values = values.map_err(|e| format!("bad alpha grid `{text}`: {e}"))?;
    if values.is_empty() {
        return Err("alpha grid is empty".into());
    }
    Ok(values)
}

pub const DEFAULT_ALPHA_GRID: &str = "1.1,1.2,1.3,1.4,1.5,1.6,1.7,1.8,1.9,2.0";

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_flag_over_file_over_default() {
        let dir = std::env::temp_dir().join("padec-config-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("run.conf");
        std::fs::write(&path, "seed = 9\n# comment\nn = 4\n").unwrap();
        let mut cfg = Config::load(&path).unwrap();
        assert_eq!(cfg.resolve("seed", Some(3u64), 1).unwrap(), 3);
        assert_eq!(cfg.resolve("n", None::<usize>, 2).unwrap(), 4);
        assert_eq!(cfg.resolve("m", None::<usize>, 1).unwrap(), 1);
        assert_eq!(cfg.echo().get("seed").unwrap(), "3");
    }

    #[test]
    fn alpha_grid_parsing() {
        assert_eq!(parse_alpha_grid("1.5, 2.0").unwrap(), vec![1.5, 2.0]);
        assert!(parse_alpha_grid("1.5,oops").is_err());
    }
}

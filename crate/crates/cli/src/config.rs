//! Optional `key=value` configuration file.
//!
//! Keys are the long flag names without dashes. Blank lines and lines starting
//! with `#` are skipped. A value given on the command line wins over the file.

use std::collections::BTreeMap;
use std::str::FromStr;

use crate::CliError;

pub const KNOWN_KEYS: &[&str] =
    &["seed", "trials", "bound", "tol", "max-iter", "resolution", "denominator-cap", "extent", "k", "out", "svg"];

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (number, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Usage(format!("config line {}: expected key=value", number + 1)));
            };
            let key = key.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Usage(format!("config line {}: unknown key {key:?}", number + 1)));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(ConfigFile { values })
    }

    pub fn load(path: &str) -> Result<Self, CliError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read config {path}: {e}")))?;
        Self::parse(&text)
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    /// The flag value if present, else the file value, else `default`.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.raw(key) {
            Some(text) => {
                text.parse().map_err(|_| CliError::Usage(format!("config value {text:?} for {key} is invalid")))
            }
            None => Ok(default),
        }
    }

    pub fn pick_path(&self, flag: Option<String>, key: &str) -> Option<String> {
        flag.or_else(|| self.raw(key).map(str::to_string))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let cfg = ConfigFile::parse("# comment\nseed = 7\nmax_iter=50\n").unwrap();
        assert_eq!(cfg.pick(None, "seed", 0u64).unwrap(), 7);
        assert_eq!(cfg.pick(Some(3u64), "seed", 0).unwrap(), 3);
        assert_eq!(cfg.pick(None, "max-iter", 10usize).unwrap(), 50);
        assert_eq!(cfg.pick(None, "trials", 5usize).unwrap(), 5);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_lines() {
        assert!(ConfigFile::parse("colour=blue").is_err());
        assert!(ConfigFile::parse("seed").is_err());
        assert!(ConfigFile::parse("seed=abc").unwrap().pick(None, "seed", 0u64).is_err());
    }
}

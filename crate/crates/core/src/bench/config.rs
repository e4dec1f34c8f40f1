use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use super::CliError;

/// Every key a config file may set; each mirrors a command-line flag.
pub const KNOWN_KEYS: &[&str] = &[
    "case",
    "seed",
    "out",
    "samples",
    "data",
    "c-positive",
    "cneg-ratio",
    "svm-tolerance",
    "max-passes",
    "grid-search",
    "folds",
    "model",
    "mode",
    "scenarios",
    "horizon",
    "gap-tol",
    "node-limit",
    "pwl-segments",
    "trials",
    "repeats",
    "parallel-trials",
    "suite",
    "feasibility-tol",
    "optimality-tol",
    "pivot-tol",
];

/// `key = value` lines; `#` starts a comment. Underscores in keys are read
/// as dashes so `gap_tol` and `gap-tol` are the same key.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConfigFile {
    values: BTreeMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let Some((k, v)) = line.split_once('=') else {
                return Err(CliError::Input(format!("config line {}: expected key = value", n + 1)));
            };
            let key = k.trim().replace('_', "-");
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::Input(format!("config line {}: unknown key '{key}'", n + 1)));
            }
            values.insert(key, v.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>, CliError> {
        match self.values.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| CliError::Input(format!("config key '{key}': cannot parse '{v}'"))),
        }
    }

    /// The flag value if given, else the config value.
    pub fn pick<T: FromStr>(&self, flag: Option<T>, key: &str) -> Result<Option<T>, CliError> {
        match flag {
            Some(v) => Ok(Some(v)),
            None => self.get(key),
        }
    }

    pub fn pick_or<T: FromStr>(&self, flag: Option<T>, key: &str, default: T) -> Result<T, CliError> {
        Ok(self.pick(flag, key)?.unwrap_or(default))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_win_over_file() {
        let c = ConfigFile::parse("# defaults\nseed = 9\ngap_tol = 1e-3  # loose\n").unwrap();
        assert_eq!(c.pick_or::<u64>(None, "seed", 0).unwrap(), 9);
        assert_eq!(c.pick_or(Some(4u64), "seed", 0).unwrap(), 4);
        assert_eq!(c.pick_or::<f64>(None, "gap-tol", 1e-6).unwrap(), 1e-3);
        assert_eq!(c.pick_or::<usize>(None, "trials", 5).unwrap(), 5);
    }

    #[test]
    fn bad_lines_are_input_errors() {
        assert_eq!(ConfigFile::parse("seed 9").unwrap_err().exit_code(), 2);
        assert_eq!(ConfigFile::parse("colour = red").unwrap_err().exit_code(), 2);
        let c = ConfigFile::parse("seed = nine").unwrap();
        assert!(c.get::<u64>("seed").is_err());
    }
}

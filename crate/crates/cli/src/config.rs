//! Flat key-value sweep configuration files. Keys mirror the sweep flags;
//! values given on the command line override file values.

use std::collections::BTreeMap;
use std::path::Path;

use crate::CliError;

/// Parsed `key = value` pairs, later keys overriding earlier ones.
#[derive(Debug, Default, Clone)]
pub struct KeyValueFile {
    entries: BTreeMap<String, String>,
}

impl KeyValueFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)?;
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::Usage(format!(
                    "{}:{}: expected 'key = value', got {line:?}",
                    path.display(),
                    lineno + 1
                )));
            };
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(KeyValueFile { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

/// A value from the command line, falling back to the config file.
pub fn resolve<'a>(flag: Option<&'a str>, file: &'a KeyValueFile, key: &str) -> Option<&'a str> {
    flag.or_else(|| file.get(key))
}

pub fn parse_list<T, E: std::fmt::Display>(
    raw: &str,
    what: &str,
    parse: impl Fn(&str) -> Result<T, E>,
) -> Result<Vec<T>, CliError> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(s).map_err(|e| CliError::Usage(format!("{what} {s:?}: {e}"))))
        .collect()
}

//! Flat `key = value` configuration files.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Parses `key = value` lines. Blank lines and lines starting with `#` are
/// skipped; later keys override earlier ones.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Parse { line: i + 1, message: format!("expected `key = value`, got {line:?}") })?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Parse { line: i + 1, message: "empty key".into() });
        }
        map.insert(key.to_owned(), value.trim().to_owned());
    }
    Ok(map)
}

pub(crate) fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Config(format!("invalid value {value:?} for `{key}`")))
}

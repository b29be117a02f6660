//! Layered settings: command-line flags, then config-file keys, then defaults.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::path::Path;
use std::str::FromStr;

use anyhow::{anyhow, Context, Result};
use transweight::config::parse_key_values;

#[derive(Debug, Default, Clone)]
pub struct Settings {
    file: BTreeMap<String, String>,
}

impl Settings {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Settings::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let file = parse_key_values(&text).with_context(|| format!("parsing config {}", path.display()))?;
        Ok(Settings { file })
    }

    #[cfg(test)]
    pub fn from_map(file: BTreeMap<String, String>) -> Self {
        Settings { file }
    }

    /// The flag if given, else the config key parsed as `T`.
    pub fn get<T>(&self, flag: Option<T>, key: &str) -> Result<Option<T>>
    where
        T: FromStr,
        T::Err: Display,
    {
        if flag.is_some() {
            return Ok(flag);
        }
        self.file
            .get(key)
            .map(|raw| raw.parse::<T>().map_err(|e| anyhow!("config key `{key}` = {raw:?}: {e}")))
            .transpose()
    }

    pub fn or<T>(&self, flag: Option<T>, key: &str, default: T) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        Ok(self.get(flag, key)?.unwrap_or(default))
    }

    pub fn required<T>(&self, flag: Option<T>, key: &str) -> Result<T>
    where
        T: FromStr,
        T::Err: Display,
    {
        self.get(flag, key)?
            .ok_or_else(|| anyhow!("missing `--{}` (or `{key}` in the config file)", key.replace('_', "-")))
    }

    pub fn raw(&self, key: &str) -> Option<&str> {
        self.file.get(key).map(String::as_str)
    }
}

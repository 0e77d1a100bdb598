//! `key = value` text files with `#` comments.

use std::collections::BTreeMap;

use crate::error::{Error, Result};

/// Parses a key-value document; duplicate keys are rejected.
pub fn parse_key_values(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", n + 1)))?;
        let key = key.trim();
        if key.is_empty() {
            return Err(Error::Config(format!("line {}: empty key", n + 1)));
        }
        if out.insert(key.to_string(), value.trim().to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key `{key}`", n + 1)));
        }
    }
    Ok(out)
}

/// Renders a map back into the same format, sorted by key.
pub fn render_key_values(map: &BTreeMap<String, String>) -> String {
    map.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}

pub(crate) fn parse_value<V: std::str::FromStr>(key: &str, value: &str) -> Result<V> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("`{key}`: cannot parse `{value}`")))
}

pub(crate) fn parse_list<V: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<V>> {
    value.split(',').map(|v| parse_value(key, v.trim())).collect()
}

//! Resolution of command settings: built-in defaults, then an optional
//! `key = value` file, then command-line flags.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use regchange::kv::{parse_key_values, render_key_values};

use crate::CliError;

pub struct Settings {
    command: &'static str,
    values: BTreeMap<String, String>,
}

impl Settings {
    /// `defaults` lists every key the command accepts. Keys in the file that
    /// are not listed are rejected.
    pub fn resolve(
        command: &'static str,
        defaults: &[(&str, &str)],
        file: Option<&Path>,
        flags: &[(&str, Option<String>)],
    ) -> Result<Self, CliError> {
        let mut values: BTreeMap<String, String> =
            defaults.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
        if let Some(path) = file {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            let parsed = parse_key_values(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
            for (key, value) in parsed {
                if !values.contains_key(&key) {
                    return Err(CliError::Config(format!(
                        "{}: `{key}` is not a setting of `{command}`",
                        path.display()
                    )));
                }
                values.insert(key, value);
            }
        }
        for (key, value) in flags {
            debug_assert!(values.contains_key(*key), "flag `{key}` missing from defaults");
            if let Some(v) = value {
                values.insert(key.to_string(), v.clone());
            }
        }
        Ok(Self { command, values })
    }

    pub fn raw(&self, key: &str) -> &str {
        self.values.get(key).map(String::as_str).unwrap_or("")
    }

    pub fn get<V: FromStr>(&self, key: &str) -> Result<V, CliError> {
        let raw = self.raw(key);
        raw.parse()
            .map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{raw}`")))
    }

    pub fn list<V: FromStr>(&self, key: &str) -> Result<Vec<V>, CliError> {
        let raw = self.raw(key).trim();
        if raw.is_empty() {
            return Ok(Vec::new());
        }
        raw.split(',')
            .map(|v| {
                v.trim()
                    .parse()
                    .map_err(|_| CliError::Config(format!("`{key}`: cannot parse `{v}`")))
            })
            .collect()
    }

    /// A path setting; empty means unset.
    pub fn path(&self, key: &str) -> Option<PathBuf> {
        let raw = self.raw(key);
        (!raw.is_empty()).then(|| PathBuf::from(raw))
    }

    pub fn required_path(&self, key: &str) -> Result<PathBuf, CliError> {
        self.path(key)
            .ok_or_else(|| CliError::Config(format!("`{}` needs `{key}`", self.command)))
    }

    /// Writes the resolved settings next to the outputs.
    pub fn write_sidecar(&self, dir: &Path) -> Result<(), CliError> {
        let path = dir.join(format!("{}.config", self.command));
        fs::write(&path, render_key_values(&self.values)).map_err(|e| CliError::Failed(format!("{}: {e}", path.display())))
    }

    /// Sizes the global worker pool; 0 keeps the default.
    pub fn apply_workers(&self) -> Result<(), CliError> {
        let n: usize = self.get("workers")?;
        if n > 0 {
            // A second build in the same process fails harmlessly.
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
        Ok(())
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::Failed(format!("{}: {e}", dir.display())))
}

//! Flat `key = value` config files, merged UNDER explicit flags: a flag
//! given on the command line always wins over the config entry of the
//! same name.

use std::collections::BTreeMap;
use std::path::Path;

use crate::CliError;

#[derive(Debug, Default, Clone)]
pub struct ConfigMap {
    entries: BTreeMap<String, String>,
}

impl ConfigMap {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::usage(format!("cannot read config {}: {e}", path.display())))?;
        let mut entries = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(CliError::usage(format!(
                    "{}:{}: expected `key = value`, got `{raw}`",
                    path.display(),
                    lineno + 1
                )));
            };
            entries.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(ConfigMap { entries })
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }
}

/// Resolve a raw string value (flag text wins over the config entry),
/// parse it, or fall back to `default`; missing everywhere is a usage
/// error naming the flag.
pub fn resolve_str<T, F>(
    flag: &Option<String>,
    config: &ConfigMap,
    key: &str,
    parse: F,
    default: Option<T>,
) -> Result<T, CliError>
where
    F: Fn(&str) -> Result<T, String>,
{
    match flag.as_deref().or_else(|| config.get(key)) {
        Some(raw) => parse(raw).map_err(|e| CliError::usage(format!("--{key}: {e}"))),
        None => default.ok_or_else(|| CliError::usage(format!("missing required flag --{key}"))),
    }
}

/// Resolve an already-typed flag; only the config entry needs parsing.
pub fn resolve_typed<T, F>(
    flag: Option<T>,
    config: &ConfigMap,
    key: &str,
    parse: F,
    default: Option<T>,
) -> Result<T, CliError>
where
    F: Fn(&str) -> Result<T, String>,
{
    if let Some(v) = flag {
        return Ok(v);
    }
    if let Some(raw) = config.get(key) {
        return parse(raw).map_err(|e| CliError::usage(format!("config key `{key}`: {e}")));
    }
    default.ok_or_else(|| CliError::usage(format!("missing required flag --{key}")))
}
